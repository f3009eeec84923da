"""Slotted Monte Carlo simulation of the relay network.

Decode events are drawn from the conditional success probabilities of the
realised transmit set, independently per link, which is the same erasure
abstraction the closed forms use.  ``physical_success_rate`` instead samples
Rayleigh fading gains and tests the SINR directly, to check the link formula
itself.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channel import DEST, RELAY, LinkParams, SelfInterference, as_transmit_set
from .errors import ConfigurationError
from .n_user import SymmetricConfig
from .two_user import TwoUserConfig

CHUNK = 1 << 16
N_BATCHES = 100


@dataclass(frozen=True)
class SimConfig:
    scenario: TwoUserConfig | SymmetricConfig
    slots: int
    seed: int = 0
    warmup: int | None = None

    def __post_init__(self):
        if self.warmup is None:
            object.__setattr__(self, "warmup", default_warmup(self.slots))
        if not self.slots > self.warmup >= 0:
            raise ConfigurationError(f"need slots > warmup >= 0, got slots={self.slots}, warmup={self.warmup}")
        if self.slots - self.warmup < N_BATCHES:
            raise ConfigurationError(f"need at least {N_BATCHES} measured slots for batch means")


def default_warmup(slots: int) -> int:
    """1% of the run, at least 10^4 slots when the run is long enough to afford it."""
    return max(slots // 100, min(10_000, slots // 10))


class Estimate(NamedTuple):
    value: float
    se: float

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.value - target) <= k * self.se


@dataclass(frozen=True)
class SimReport:
    empirical_lambda: Estimate
    empirical_mu: Estimate
    empirical_p_empty: Estimate
    empirical_qbar: Estimate
    per_user_throughput: tuple
    aggregate_throughput: Estimate
    max_queue_seen: int
    slots_run: int
    counts: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {}
        for name in ("empirical_lambda", "empirical_mu", "empirical_p_empty", "empirical_qbar", "aggregate_throughput"):
            est = getattr(self, name)
            out[name] = est.value
            out[name + "_se"] = est.se
        for u, est in enumerate(self.per_user_throughput, start=1):
            out[f"throughput_user{u}"] = est.value
            out[f"throughput_user{u}_se"] = est.se
        out["max_queue_seen"] = self.max_queue_seen
        out["slots_run"] = self.slots_run
        return out


class _SlotModel:
    """Success tables indexed by a per-slot key derived from the source transmit pattern."""

    def __init__(self, scenario):
        if isinstance(scenario, TwoUserConfig):
            self.q = np.array([scenario.q1, scenario.q2])
            self.q0 = scenario.q0
            n = 2
            self.pd = np.zeros((4, 2, n))
            self.pr = np.zeros((4, 2, n))
            self.p0d = np.zeros(4)
            for mask in range(4):
                senders = [u for u in (1, 2) if mask >> (u - 1) & 1]
                for j in (0, 1):
                    active = frozenset(senders + ([RELAY] if j else []))
                    for u in senders:
                        self.pd[mask, j, u - 1] = scenario.lookup(u, DEST, active)
                        self.pr[mask, j, u - 1] = scenario.lookup(u, RELAY, active)
                self.p0d[mask] = scenario.lookup(RELAY, DEST, frozenset(senders + [RELAY]))
            self._weights = np.array([1, 2])
        elif isinstance(scenario, SymmetricConfig):
            n = scenario.n
            self.q = np.full(n, scenario.q)
            self.q0 = scenario.q0
            probs = scenario.probs
            self.pd = np.repeat(np.nan_to_num(probs.dest)[:, :, None], n, axis=2)
            self.pr = np.repeat(np.nan_to_num(probs.relay)[:, :, None], n, axis=2)
            self.p0d = probs.relay_dest.copy()
            self._weights = None
        else:
            raise ConfigurationError(f"unsupported scenario type {type(scenario).__name__}")
        self.n = self.q.size

    def key(self, tx: np.ndarray) -> np.ndarray:
        if self._weights is None:
            return tx.sum(axis=1)
        return tx @ self._weights


class _Trace(NamedTuple):
    queue: np.ndarray  # length at the start of each slot
    arrivals: np.ndarray
    departures: np.ndarray
    busy: np.ndarray
    delivered: np.ndarray  # (slots, n): packets of each source reaching the destination
    counts: dict


def _run(cfg: SimConfig) -> _Trace:
    model = _SlotModel(cfg.scenario)
    n, slots = model.n, cfg.slots
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    user_bits = 1 << np.arange(n)

    queue_len = np.zeros(slots, dtype=np.int64)
    arrivals = np.zeros(slots, dtype=np.int64)
    departures = np.zeros(slots, dtype=np.int64)
    busy_slots = np.zeros(slots, dtype=bool)
    delivered = np.zeros((slots, n), dtype=np.int32)

    fifo: deque = deque()
    sent = direct_total = stored_total = lost_total = relayed_total = 0

    for start in range(0, slots, CHUNK):
        m = min(CHUNK, slots - start)
        tx = rng.random((m, n)) < model.q
        relay_coin = rng.random(m) < model.q0
        u_dest = rng.random((m, n))
        u_relay = rng.random((m, n))
        u_out = rng.random(m)

        key = model.key(tx)
        direct, stored = [], []
        for j in (0, 1):
            d = tx & (u_dest < model.pd[key, j])
            s = tx & ~d & (u_relay < model.pr[key, j])
            direct.append(d)
            stored.append(s)
        relay_ok = u_out < model.p0d[key]
        stored_mask = [(s @ user_bits).tolist() for s in stored]
        stored_count = [s.sum(axis=1).tolist() for s in stored]
        coin = relay_coin.tolist()
        ok = relay_ok.tolist()

        relay_on = np.zeros(m, dtype=bool)
        credit = np.full(m, -1, dtype=np.int64)
        q = len(fifo)
        for t in range(m):
            queue_len[start + t] = q
            on = q > 0 and coin[t]
            j = 1 if on else 0
            if on:
                relay_on[t] = True
                if ok[t]:
                    credit[t] = fifo.popleft()
                    q -= 1
            mask = stored_mask[j][t]
            if mask:
                c = stored_count[j][t]
                arrivals[start + t] = c
                q += c
                u = 0
                while mask:
                    if mask & 1:
                        fifo.append(u)
                    mask >>= 1
                    u += 1

        sl = slice(start, start + m)
        busy_slots[sl] = queue_len[sl] > 0
        realised_direct = np.where(relay_on[:, None], direct[1], direct[0])
        realised_stored = np.where(relay_on[:, None], stored[1], stored[0])
        delivered[sl] = realised_direct
        gone = credit >= 0
        departures[sl] = gone
        delivered[sl][np.nonzero(gone)[0], credit[gone]] += 1

        n_sent = int(tx.sum())
        n_direct = int(realised_direct.sum())
        n_stored = int(realised_stored.sum())
        sent += n_sent
        direct_total += n_direct
        stored_total += n_stored
        lost_total += n_sent - n_direct - n_stored
        relayed_total += int(gone.sum())

    counts = {
        "sent": sent,
        "direct": direct_total,
        "enqueued": stored_total,
        "relayed": relayed_total,
        "lost": lost_total,
        "final_queue": len(fifo),
    }
    return _Trace(queue_len, arrivals, departures, busy_slots, delivered, counts)


def _batch_mean(x: np.ndarray) -> Estimate:
    means = np.array([b.mean() for b in np.array_split(x, N_BATCHES)])
    return Estimate(float(x.mean()), float(means.std(ddof=1) / math.sqrt(N_BATCHES)))


def _batch_ratio(num: np.ndarray, den: np.ndarray) -> Estimate:
    total_den = den.sum()
    if total_den == 0:
        return Estimate(math.nan, math.nan)
    ratios = [a.sum() / b.sum() for a, b in zip(np.array_split(num, N_BATCHES), np.array_split(den, N_BATCHES)) if b.sum() > 0]
    se = float(np.std(ratios, ddof=1) / math.sqrt(len(ratios))) if len(ratios) > 1 else math.nan
    return Estimate(float(num.sum() / total_den), se)


def _report(cfg: SimConfig, trace: _Trace) -> SimReport:
    w = cfg.warmup
    queue = trace.queue[w:]
    delivered = trace.delivered[w:]
    return SimReport(
        empirical_lambda=_batch_mean(trace.arrivals[w:]),
        empirical_mu=_batch_ratio(trace.departures[w:], trace.busy[w:]),
        empirical_p_empty=_batch_mean((queue == 0).astype(float)),
        empirical_qbar=_batch_mean(queue.astype(float)),
        per_user_throughput=tuple(_batch_mean(delivered[:, u]) for u in range(delivered.shape[1])),
        aggregate_throughput=_batch_mean(delivered.sum(axis=1)),
        max_queue_seen=int(trace.queue.max(initial=0)),
        slots_run=cfg.slots,
        counts=trace.counts,
    )


def simulate(cfg: SimConfig) -> SimReport:
    """Run the slotted system for ``cfg.slots`` slots from an empty relay queue.

    Statistics cover the slots after the warmup; standard errors come from
    batch means over 100 batches.  ``empirical_mu`` is departures per busy
    slot; throughput counts packets reaching the destination, directly or
    through the relay.
    """
    return _report(cfg, _run(cfg))


@dataclass(frozen=True)
class InstabilityVerdict:
    verdict: str  # "stable", "unstable" or "indeterminate"
    slope: float
    slope_se: float
    final_queue: int
    warmup_mean: float

    @property
    def unstable(self) -> bool:
        return self.verdict == "unstable"


def detect_instability(cfg: SimConfig, trace: _Trace | None = None) -> InstabilityVerdict:
    """Classify queue growth from the drift of batch-averaged queue lengths.

    Unstable: slope above 5 standard errors and a final queue more than ten
    times the warmup-window mean.  Stable: slope below 3 standard errors.
    Anything else is reported as indeterminate.
    """
    trace = trace or _run(cfg)
    w = cfg.warmup
    queue = trace.queue[w:].astype(float)
    batches = np.array_split(np.arange(queue.size), N_BATCHES)
    centres = np.array([b.mean() for b in batches])
    means = np.array([queue[b].mean() for b in batches])
    x = centres - centres.mean()
    slope = float(np.dot(x, means - means.mean()) / np.dot(x, x))
    resid = means - means.mean() - slope * x
    slope_se = float(math.sqrt(np.dot(resid, resid) / (N_BATCHES - 2) / np.dot(x, x)))

    warmup_mean = float(trace.queue[:w].mean()) if w else float(trace.queue[0])
    final = int(trace.counts["final_queue"])
    t_stat = slope / slope_se if slope_se > 0 else (math.inf if slope > 0 else 0.0)
    if t_stat > 5.0 and final > 10.0 * max(warmup_mean, 1.0):
        verdict = "unstable"
    elif t_stat < 3.0:
        verdict = "stable"
    else:
        verdict = "indeterminate"
    return InstabilityVerdict(verdict, slope, slope_se, final, warmup_mean)


def simulate_with_verdict(cfg: SimConfig) -> tuple:
    """One run yielding both the report and the instability verdict."""
    trace = _run(cfg)
    return _report(cfg, trace), detect_instability(cfg, trace)


def physical_success_rate(
    tx,
    rx,
    active,
    links,
    si: SelfInterference,
    draws: int,
    rng: np.random.Generator,
) -> Estimate:
    """Empirical decode frequency from sampled exponential fading gains.

    Each link's received power is an exponential variable with mean
    ``v * P_tx * r^-alpha``.  When ``rx`` also transmits, its residual
    self-interference is exponential with mean ``g * r^alpha * v * P_tx * r^-alpha``
    measured on the wanted link, the scaling under which the closed form holds.
    """
    active = as_transmit_set(active)
    wanted: LinkParams = links[(tx, rx)]
    signal = rng.exponential(wanted.mean_rx_power, draws)
    interference = np.full(draws, wanted.noise_w)
    if rx in active and si.coefficient_g > 0:
        self_mean = si.coefficient_g * wanted.distance_m**wanted.path_loss_exp * wanted.mean_rx_power
        interference += rng.exponential(self_mean, draws)
    for k in sorted(active - {tx, rx}, key=str):
        interference += rng.exponential(links[(k, rx)].mean_rx_power, draws)
    hits = signal >= wanted.sinr_threshold * interference
    p = float(hits.mean())
    return Estimate(p, math.sqrt(p * (1 - p) / draws))

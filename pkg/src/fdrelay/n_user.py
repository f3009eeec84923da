"""Binomial-sum closed forms for ``n`` statistically identical sources."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import DEST, RELAY, SymmetricProbTable
from .errors import ConfigurationError
from .oracle import SlotSlice, enumerate_slot_outcomes
from .reports import (
    QueueAnalysis,
    SlotOutcomeDistribution,
    ThroughputReport,
    analysis_from_distribution,
    stability_threshold,
)
from .two_user import TwoUserConfig


@dataclass(frozen=True)
class SymmetricConfig:
    n: int
    q: float
    q0: float
    probs: SymmetricProbTable

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError("n must be at least 1")
        for name in ("q", "q0"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {value!r}")
        if self.probs.n != self.n:
            raise ConfigurationError(f"probability table is sized for n={self.probs.n}, config has n={self.n}")

    def with_q0(self, q0: float) -> "SymmetricConfig":
        return SymmetricConfig(self.n, self.q, q0, self.probs)

    def to_two_user(self) -> TwoUserConfig:
        """The equivalent two-source configuration (``n == 2`` only)."""
        if self.n != 2:
            raise ConfigurationError("only a two-source symmetric config reduces to the two-source model")
        success = {}
        for u in (1, 2):
            for others in ((), (3 - u,)):
                for relay_on in (False, True):
                    active = frozenset((u, *others) + ((RELAY,) if relay_on else ()))
                    success[(u, DEST, active)] = float(self.probs.dest[1 + len(others), int(relay_on)])
                    success[(u, RELAY, active)] = float(self.probs.relay[1 + len(others), int(relay_on)])
        for users in ((), (1,), (2,), (1, 2)):
            success[(RELAY, DEST, frozenset((RELAY, *users)))] = float(self.probs.relay_dest[len(users)])
        return TwoUserConfig(self.q0, self.q, self.q, success)


def _activity_weights(n: int, q: float) -> np.ndarray:
    """``C(n, i) q^i (1-q)^(n-i)`` for ``i = 0..n``, with exact integer binomials."""
    return np.array([math.comb(n, i) * q**i * (1.0 - q) ** (n - i) for i in range(n + 1)])


def _stored_prob(cfg: SymmetricConfig, j: int) -> np.ndarray:
    """Per-transmitter probability of being enqueued, ``P_0 (1 - P_d)``, for ``i = 1..n`` (index 0 unused)."""
    s = cfg.probs.relay[:, j] * (1.0 - cfg.probs.dest[:, j])
    s[0] = 0.0
    return s


def _arrival_sums(cfg: SymmetricConfig, j: int, extra: np.ndarray | None = None, shift: int = 0) -> np.ndarray:
    """``sum_{i} C(n,i) C(i,k+shift) q^i (1-q)^(n-i) extra_i s_i^(k+shift) (1-s_i)^(i-k-shift)``.

    Returned for ``k = 1..n`` (array index ``k - 1``).
    """
    n = cfg.n
    w = _activity_weights(n, cfg.q)
    if extra is not None:
        w = w * extra
    s = _stored_prob(cfg, j)
    out = np.zeros(n)
    for k in range(1, n + 1):
        m = k + shift
        total = 0.0
        for i in range(m, n + 1):
            total += math.comb(i, m) * w[i] * s[i] ** m * (1.0 - s[i]) ** (i - m)
        out[k - 1] = total
    return out


def _coefficients(cfg: SymmetricConfig):
    """``(A_k, B_k, A)``: arrival terms with the relay silent / transmitting and the mean relay success."""
    a_k = _arrival_sums(cfg, 0)
    b_k = _arrival_sums(cfg, 1)
    a = float(np.dot(_activity_weights(cfg.n, cfg.q), cfg.probs.relay_dest))
    return a_k, b_k, a


def n_service_rate(cfg: SymmetricConfig) -> float:
    return cfg.q0 * float(np.dot(_activity_weights(cfg.n, cfg.q), cfg.probs.relay_dest))


def n_slot_distribution(cfg: SymmetricConfig) -> SlotOutcomeDistribution:
    n, q0 = cfg.n, cfg.q0
    a_k, b_k, _ = _coefficients(cfg)
    w = _activity_weights(n, cfg.q)
    s1 = _stored_prob(cfg, 1)
    p_0d = cfg.probs.relay_dest

    k = np.arange(n + 1)
    p_down = q0 * float(np.sum(w * p_0d * (1.0 - s1) ** k))
    gains_busy = (
        (1 - q0) * a_k
        + q0 * _arrival_sums(cfg, 1, extra=1.0 - p_0d)
        + q0 * _arrival_sums(cfg, 1, extra=p_0d, shift=1)
    )
    return SlotOutcomeDistribution.from_parts(
        gains_empty=list(a_k),
        p_down=p_down,
        gains_busy=list(gains_busy),
        arrivals_busy=list((1 - q0) * a_k + q0 * b_k),
    )


def enumerate_n_slot(cfg: SymmetricConfig, queue_nonempty: bool) -> SlotSlice:
    """Exhaustive one-slot enumeration over all ``2^n`` transmit patterns."""
    return enumerate_slot_outcomes([cfg.q] * cfg.n, cfg.q0, queue_nonempty, cfg.probs.lookup)


def n_q0_min(cfg: SymmetricConfig) -> float:
    a_k, b_k, a = _coefficients(cfg)
    k = np.arange(1, cfg.n + 1)
    return stability_threshold(float(np.dot(k, a_k)), float(np.dot(k, b_k)), a)


def n_analyze_queue(cfg: SymmetricConfig) -> QueueAnalysis:
    return analysis_from_distribution(n_slot_distribution(cfg), n_service_rate(cfg), cfg.q0, n_q0_min(cfg))


def _per_user_rate(cfg: SymmetricConfig, j: int, include_relay: bool) -> float:
    """Rate at which a tagged source is served with the relay in state ``j``.

    The tagged source transmits alongside ``k`` of the other ``n - 1``.
    """
    n, q = cfg.n, cfg.q
    total = 0.0
    for k in range(n):
        pd = cfg.probs.dest[k + 1, j]
        served = pd + (1 - pd) * cfg.probs.relay[k + 1, j] if include_relay else pd
        total += math.comb(n - 1, k) * q ** (k + 1) * (1 - q) ** (n - 1 - k) * served
    return total


def n_throughput(cfg: SymmetricConfig, qa: QueueAnalysis) -> ThroughputReport:
    """Per-source and aggregate throughput; see :func:`fdrelay.two_user.throughput`."""
    n = cfg.n
    if qa.stable:
        busy = cfg.q0 * (1.0 - qa.p_empty)
        each = busy * _per_user_rate(cfg, 1, True) + (1 - busy) * _per_user_rate(cfg, 0, True)
        direct = busy * _per_user_rate(cfg, 1, False) + (1 - busy) * _per_user_rate(cfg, 0, False)
        relayed = each - direct
    else:
        q0 = cfg.q0
        direct = q0 * _per_user_rate(cfg, 1, False) + (1 - q0) * _per_user_rate(cfg, 0, False)
        relayed = qa.mu / n
        each = direct + relayed
    return ThroughputReport((each,) * n, (direct,) * n, (relayed,) * n, n * each, qa.stable)

"""Closed forms for two (possibly asymmetric) saturated sources.

All expressions consume a precomputed table of conditional success
probabilities ``P[i -> j | T]`` so they can be exercised with synthetic tables
as well as with tables derived from link geometry.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from types import SimpleNamespace

from .channel import DEST, RELAY, SelfInterference, success_probability
from .errors import ConfigurationError
from .oracle import SlotSlice, enumerate_slot_outcomes
from .reports import (
    QueueAnalysis,
    SlotOutcomeDistribution,
    ThroughputReport,
    analysis_from_distribution,
    stability_threshold,
)

USERS = (1, 2)


def required_keys() -> list:
    """Every ``(tx, rx, T)`` conditioning the two-source expressions use."""
    keys = []
    for u in USERS:
        for rx in (DEST, RELAY):
            for active in ({u}, {1, 2}, {RELAY, u}, {RELAY, 1, 2}):
                keys.append((u, rx, frozenset(active)))
    for active in ({RELAY}, {RELAY, 1}, {RELAY, 2}, {RELAY, 1, 2}):
        keys.append((RELAY, DEST, frozenset(active)))
    return keys


def success_table(links: Mapping, si: SelfInterference) -> dict:
    """Evaluate every required conditional success probability from geometry."""
    return {key: success_probability(key[0], key[1], key[2], links, si) for key in required_keys()}


@dataclass(frozen=True)
class TwoUserConfig:
    q0: float
    q1: float
    q2: float
    success: Mapping

    def __post_init__(self):
        for name in ("q0", "q1", "q2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {value!r}")
        table = {}
        for key in required_keys():
            if key not in self.success:
                tx, rx, active = key
                raise ConfigurationError(f"success table lacks P[{tx} -> {rx} | {sorted(map(str, active))}]")
            p = float(self.success[key])
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"success probability {key!r} = {p!r} outside [0, 1]")
            table[key] = p
        object.__setattr__(self, "success", table)

    @classmethod
    def from_links(cls, q0, q1, q2, links, si):
        return cls(q0, q1, q2, success_table(links, si))

    def p(self, tx, rx, *active) -> float:
        return self.success[(tx, rx, frozenset(active))]

    def lookup(self, tx, rx, active: frozenset) -> float:
        return self.success[(tx, rx, active)]

    def with_q0(self, q0: float) -> "TwoUserConfig":
        return TwoUserConfig(q0, self.q1, self.q2, self.success)


def _terms(cfg: TwoUserConfig) -> SimpleNamespace:
    """Short local names for the probabilities appearing in the expressions.

    ``d1`` is P[1 -> d | {1}], ``r1`` is P[1 -> relay | {1}], suffix ``_12``
    conditions on {1, 2}, ``_0`` on {relay, i}, ``_012`` on {relay, 1, 2}; ``s*``
    are relay -> destination probabilities.
    """
    p = cfg.p
    t = SimpleNamespace(q0=cfg.q0, q1=cfg.q1, q2=cfg.q2)
    for u in USERS:
        o = 3 - u
        setattr(t, f"d{u}", p(u, DEST, u))
        setattr(t, f"r{u}", p(u, RELAY, u))
        setattr(t, f"d{u}_12", p(u, DEST, u, o))
        setattr(t, f"r{u}_12", p(u, RELAY, u, o))
        setattr(t, f"d{u}_0", p(u, DEST, RELAY, u))
        setattr(t, f"r{u}_0", p(u, RELAY, RELAY, u))
        setattr(t, f"d{u}_012", p(u, DEST, RELAY, 1, 2))
        setattr(t, f"r{u}_012", p(u, RELAY, RELAY, 1, 2))
    t.s0 = p(RELAY, DEST, RELAY)
    t.s1 = p(RELAY, DEST, RELAY, 1)
    t.s2 = p(RELAY, DEST, RELAY, 2)
    t.s12 = p(RELAY, DEST, RELAY, 1, 2)
    return t


def _relay_success_given_tx(t) -> float:
    """Relay success probability averaged over source activity (``A``)."""
    q1, q2 = t.q1, t.q2
    return (1 - q1) * (1 - q2) * t.s0 + q1 * (1 - q2) * t.s1 + q2 * (1 - q1) * t.s2 + q1 * q2 * t.s12


def service_rate(cfg: TwoUserConfig) -> float:
    return cfg.q0 * _relay_success_given_tx(_terms(cfg))


def _one_arrival(t, d1, r1, d1_12, r1_12, d2, r2, d2_12, r2_12) -> float:
    """Probability of exactly one enqueued packet for a fixed relay state."""
    q1, q2 = t.q1, t.q2
    return (
        q1 * (1 - q2) * (1 - d1) * r1
        + q2 * (1 - q1) * (1 - d2) * r2
        + q1 * q2 * (1 - d1_12) * r1_12 * (1 - d2_12) * (1 - r2_12)
        + q1 * q2 * (1 - d1_12) * r1_12 * d2_12
        + q1 * q2 * (1 - d2_12) * r2_12 * (1 - d1_12) * (1 - r1_12)
        + q1 * q2 * (1 - d2_12) * r2_12 * d1_12
    )


def _two_arrivals(t, d1_12, r1_12, d2_12, r2_12) -> float:
    return t.q1 * t.q2 * (1 - d1_12) * r1_12 * (1 - d2_12) * r2_12


def _arrival_coefficients(t):
    """``(A1, A2, B1, B2)``: one/two-arrival probabilities with the relay silent / transmitting."""
    a1 = _one_arrival(t, t.d1, t.r1, t.d1_12, t.r1_12, t.d2, t.r2, t.d2_12, t.r2_12)
    a2 = _two_arrivals(t, t.d1_12, t.r1_12, t.d2_12, t.r2_12)
    b1 = _one_arrival(t, t.d1_0, t.r1_0, t.d1_012, t.r1_012, t.d2_0, t.r2_0, t.d2_012, t.r2_012)
    b2 = _two_arrivals(t, t.d1_012, t.r1_012, t.d2_012, t.r2_012)
    return a1, a2, b1, b2


def _departure_without_arrival(t) -> float:
    q0, q1, q2 = t.q0, t.q1, t.q2
    return (
        q0 * (1 - q1) * (1 - q2) * t.s0
        + q0 * (1 - q1) * q2 * t.s2 * t.d2_0
        + q0 * (1 - q1) * q2 * t.s2 * (1 - t.d2_0) * (1 - t.r2_0)
        + q0 * q1 * (1 - q2) * t.s1 * t.d1_0
        + q0 * q1 * (1 - q2) * t.s1 * (1 - t.d1_0) * (1 - t.r1_0)
        + q0 * q1 * q2 * t.s12 * t.d1_012 * t.d2_012
        + q0 * q1 * q2 * t.s12 * (1 - t.d1_012) * (1 - t.r1_012) * (1 - t.d2_012) * (1 - t.r2_012)
        + q0 * q1 * q2 * t.s12 * t.d1_012 * (1 - t.d2_012) * (1 - t.r2_012)
        + q0 * q1 * q2 * t.s12 * (1 - t.d1_012) * (1 - t.r1_012) * t.d2_012
    )


def _net_gain_one(t) -> float:
    q0, q1, q2 = t.q0, t.q1, t.q2
    silent = (
        (1 - q0) * q1 * (1 - q2) * (1 - t.d1) * t.r1
        + (1 - q0) * q1 * q2 * (1 - t.d1_12) * t.r1_12 * t.d2_12
        + (1 - q0) * q1 * q2 * (1 - t.d1_12) * t.r1_12 * (1 - t.d2_12) * (1 - t.r2_12)
        + (1 - q0) * (1 - q1) * q2 * (1 - t.d2) * t.r2
        + (1 - q0) * q1 * q2 * (1 - t.d2_12) * t.r2_12 * t.d1_12
        + (1 - q0) * q1 * q2 * (1 - t.d2_12) * t.r2_12 * (1 - t.d1_12) * (1 - t.r1_12)
    )
    # relay transmits: two arrivals and a departure, or one arrival and no departure
    busy = (
        q0 * q1 * q2 * t.s12 * (1 - t.d1_012) * t.r1_012 * (1 - t.d2_012) * t.r2_012
        + q0 * q1 * (1 - q2) * (1 - t.s1) * (1 - t.d1_0) * t.r1_0
        + q0 * q1 * q2 * (1 - t.s12) * (1 - t.d1_012) * t.r1_012 * t.d2_012
        + q0 * q1 * q2 * (1 - t.s12) * (1 - t.d1_012) * t.r1_012 * (1 - t.d2_012) * (1 - t.r2_012)
        + q0 * q2 * (1 - q1) * (1 - t.s2) * (1 - t.d2_0) * t.r2_0
        + q0 * q1 * q2 * (1 - t.s12) * (1 - t.d2_012) * t.r2_012 * t.d1_012
        + q0 * q1 * q2 * (1 - t.s12) * (1 - t.d2_012) * t.r2_012 * (1 - t.d1_012) * (1 - t.r1_012)
    )
    return silent + busy


def _net_gain_two(t) -> float:
    q0, q1, q2 = t.q0, t.q1, t.q2
    return (
        (1 - q0) * q1 * q2 * (1 - t.d1_12) * t.r1_12 * (1 - t.d2_12) * t.r2_12
        + q0 * q1 * q2 * (1 - t.s12) * (1 - t.d1_012) * t.r1_012 * (1 - t.d2_012) * t.r2_012
    )


def slot_distribution(cfg: TwoUserConfig) -> SlotOutcomeDistribution:
    t = _terms(cfg)
    a1, a2, b1, b2 = _arrival_coefficients(t)
    q0 = cfg.q0
    return SlotOutcomeDistribution.from_parts(
        gains_empty=[a1, a2],
        p_down=_departure_without_arrival(t),
        gains_busy=[_net_gain_one(t), _net_gain_two(t)],
        arrivals_busy=[(1 - q0) * a1 + q0 * b1, (1 - q0) * a2 + q0 * b2],
    )


def enumerate_slot(cfg: TwoUserConfig, queue_nonempty: bool) -> SlotSlice:
    """Exact one-slot outcome distribution by exhaustive enumeration."""
    return enumerate_slot_outcomes((cfg.q1, cfg.q2), cfg.q0, queue_nonempty, cfg.lookup)


def q0_min(cfg: TwoUserConfig) -> float:
    t = _terms(cfg)
    a1, a2, b1, b2 = _arrival_coefficients(t)
    return stability_threshold(a1 + 2 * a2, b1 + 2 * b2, _relay_success_given_tx(t))


def analyze_queue(cfg: TwoUserConfig) -> QueueAnalysis:
    dist = slot_distribution(cfg)
    return analysis_from_distribution(dist, service_rate(cfg), cfg.q0, q0_min(cfg))


def _accepted(t, u: int, relay_on: bool) -> float:
    """Per-slot probability that source ``u``'s packet reaches the destination or the relay."""
    q_u, q_o = (t.q1, t.q2) if u == 1 else (t.q2, t.q1)
    sfx_alone, sfx_both = ("_0", "_012") if relay_on else ("", "_12")
    d_a, r_a = getattr(t, f"d{u}{sfx_alone}"), getattr(t, f"r{u}{sfx_alone}")
    d_b, r_b = getattr(t, f"d{u}{sfx_both}"), getattr(t, f"r{u}{sfx_both}")
    return q_u * (1 - q_o) * (d_a + (1 - d_a) * r_a) + q_u * q_o * (d_b + (1 - d_b) * r_b)


def _direct(t, u: int, relay_on: bool) -> float:
    q_u, q_o = (t.q1, t.q2) if u == 1 else (t.q2, t.q1)
    sfx_alone, sfx_both = ("_0", "_012") if relay_on else ("", "_12")
    return q_u * (1 - q_o) * getattr(t, f"d{u}{sfx_alone}") + q_u * q_o * getattr(t, f"d{u}{sfx_both}")


def throughput(cfg: TwoUserConfig, qa: QueueAnalysis) -> ThroughputReport:
    """Per-source throughput.

    Stable queue: every packet accepted by the destination or the relay
    counts, with the relay transmitting in a fraction ``q0 P(Q>0)`` of slots.
    Unstable queue: the relay always contends; each source gets its direct
    deliveries plus the relay output in proportion to its share of relay
    arrivals (the FIFO composition of an ever-growing queue).
    """
    t = _terms(cfg)
    if qa.stable:
        busy = cfg.q0 * (1.0 - qa.p_empty)
        per_user = tuple(busy * _accepted(t, u, True) + (1 - busy) * _accepted(t, u, False) for u in USERS)
        direct = tuple(busy * _direct(t, u, True) + (1 - busy) * _direct(t, u, False) for u in USERS)
        relayed = tuple(pu - du for pu, du in zip(per_user, direct))
        return ThroughputReport(per_user, direct, relayed, math.fsum(per_user), True)

    q0 = cfg.q0
    direct = tuple(q0 * _direct(t, u, True) + (1 - q0) * _direct(t, u, False) for u in USERS)
    stored = [
        q0 * (_accepted(t, u, True) - _direct(t, u, True)) + (1 - q0) * (_accepted(t, u, False) - _direct(t, u, False))
        for u in USERS
    ]
    total_stored = math.fsum(stored)
    relayed = tuple(qa.mu * s / total_stored if total_stored > 0 else 0.0 for s in stored)
    per_user = tuple(d + r for d, r in zip(direct, relayed))
    return ThroughputReport(per_user, direct, relayed, math.fsum(direct) + qa.mu, False)

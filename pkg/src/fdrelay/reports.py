"""Result records shared by the two-source and symmetric analyses."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .channel import check_probability
from .errors import InternalConsistencyError
from .queue_analysis import HessenbergChain, mean_queue_size

NORM_TOL = 1e-13


@dataclass(frozen=True)
class SlotOutcomeDistribution:
    """Per-slot queue-size change and arrival distributions.

    ``empty[k]``: growth by ``k`` from the empty queue (``k = 0..n``).
    ``busy[k + 1]``: change by ``k`` from a nonempty queue (``k = -1..n``).
    ``arrivals_empty[k]`` / ``arrivals_busy[k]``: ``k`` packets enqueued.
    Index 0 of the arrival arrays is the complement of the rest.
    """

    empty: np.ndarray
    busy: np.ndarray
    arrivals_empty: np.ndarray
    arrivals_busy: np.ndarray

    @classmethod
    def from_parts(cls, gains_empty, p_down, gains_busy, arrivals_busy):
        """Assemble the families from their nonzero-change terms.

        The zero-change entries are filled in by complement.
        """
        gains_empty = [check_probability(x, "p^0") for x in gains_empty]
        gains_busy = [check_probability(x, "p^1") for x in gains_busy]
        arrivals_busy = [check_probability(x, "r^1") for x in arrivals_busy]
        p_down = check_probability(p_down, "p^1_-1")
        stay_empty = check_probability(1.0 - math.fsum(gains_empty), "p^0_0")
        stay_busy = check_probability(1.0 - p_down - math.fsum(gains_busy), "p^1_0")
        none_busy = check_probability(1.0 - math.fsum(arrivals_busy), "r^1_0")
        empty = np.array([stay_empty, *gains_empty])
        dist = cls(
            empty=empty,
            busy=np.array([p_down, stay_busy, *gains_busy]),
            arrivals_empty=empty.copy(),
            arrivals_busy=np.array([none_busy, *arrivals_busy]),
        )
        dist.check_normalised()
        return dist

    @property
    def n(self) -> int:
        return self.empty.size - 1

    @property
    def lambda0(self) -> float:
        return float(np.dot(np.arange(self.arrivals_empty.size), self.arrivals_empty))

    @property
    def lambda1(self) -> float:
        return float(np.dot(np.arange(self.arrivals_busy.size), self.arrivals_busy))

    @property
    def p_down(self) -> float:
        return float(self.busy[0])

    def gains_busy(self) -> np.ndarray:
        """``p_1^1, ..., p_n^1``."""
        return self.busy[2:]

    def check_normalised(self, tol: float = NORM_TOL) -> None:
        for name in ("empty", "busy", "arrivals_empty", "arrivals_busy"):
            total = math.fsum(getattr(self, name))
            if abs(total - 1.0) > tol:
                raise InternalConsistencyError(f"{name} family sums to {total!r}")

    def chain(self) -> HessenbergChain:
        return HessenbergChain.from_slot_families(self.empty, self.busy)


@dataclass(frozen=True)
class QueueAnalysis:
    """Steady-state characteristics of the relay queue.

    ``lambda_`` is the long-run arrival rate when the queue is stable.  In the
    unstable regime it is the arrival rate seen by an ever-busy queue
    (``lambda1``), ``p_empty`` is 0, ``qbar`` is ``inf`` and
    ``departure_rate`` is the service rate.
    """

    lambda0: float
    lambda1: float
    lambda_: float
    mu: float
    p_empty: float
    q0min: float
    qbar: float
    stable: bool

    @property
    def departure_rate(self) -> float:
        return self.lambda_ if self.stable else self.mu

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ThroughputReport:
    """Per-source and aggregate delivered-packet rates (packets/slot).

    ``direct`` holds each source's rate of packets decoded straight at the
    destination; ``relayed`` the share of the relay's output credited to it.
    """

    per_user: tuple
    direct: tuple
    relayed: tuple
    aggregate: float
    stable: bool

    def as_dict(self) -> dict:
        return asdict(self)


def stability_threshold(arrivals_idle: float, arrivals_tx: float, service_per_tx: float) -> float:
    """Smallest relay transmit probability keeping the queue stable.

    ``arrivals_idle`` / ``arrivals_tx`` are the mean arrivals per slot while the
    relay is silent / transmitting, ``service_per_tx`` the relay's success
    probability when it transmits.  Returns ``inf`` when no ``q0`` works.
    """
    den = service_per_tx + arrivals_idle - arrivals_tx
    if not den > 0.0:
        return math.inf
    return arrivals_idle / den


def analysis_from_distribution(dist: SlotOutcomeDistribution, mu: float, q0: float, q0min: float) -> QueueAnalysis:
    """Combine slot families and rates into a :class:`QueueAnalysis`.

    Stability needs both the Loynes comparison and ``q0 > q0min``; the two
    only disagree through round-off at the boundary, which is classed unstable.
    """
    lam0, lam1 = dist.lambda0, dist.lambda1
    stable = lam1 < mu and q0 > q0min
    if not stable:
        return QueueAnalysis(lam0, lam1, lam1, mu, 0.0, q0min, math.inf, False)

    i = np.arange(1, dist.n + 1)
    margin = dist.p_down - float(np.dot(i, dist.gains_busy()))
    den = margin + lam0
    if not den > 0.0 or not margin > 0.0:
        raise InternalConsistencyError(f"P(Q=0) denominator {den!r} (drift margin {margin!r}) with lambda1 < mu")
    p_empty = margin / den
    lam = p_empty * lam0 + (1.0 - p_empty) * lam1
    return QueueAnalysis(lam0, lam1, lam, mu, p_empty, q0min, mean_queue_size(dist.chain()), True)

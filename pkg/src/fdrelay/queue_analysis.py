"""Skip-free-to-the-left queue chains: transform quantities and a numeric solver.

The relay queue is a discrete-time chain on {0, 1, 2, ...} that moves down by
at most one per slot.  From the empty state it jumps up by ``i`` with
probability ``a[i]``; from any other state it changes by ``i - 1`` with
probability ``b[i]``.  In terms of per-slot size changes, ``b[0]`` is the
probability of a net departure and ``b[i + 1]`` that of a net gain of ``i``.

Derivatives follow the ``z^-i`` transform convention, so for example
``A'(1) = -sum(i * a[i])``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, InternalConsistencyError, TruncationError, UnstableChainError

SUM_TOL = 1e-14
TAIL_TOL = 1e-12
MAX_TRUNCATION = 1 << 22


@dataclass(frozen=True)
class HessenbergChain:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if a.ndim != 1 or b.ndim != 1 or a.size < 1 or b.size < 2:
            raise ConfigurationError("a needs at least one entry and b at least two")
        for name, v in (("a", a), ("b", b)):
            if np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
                raise ConfigurationError(f"entries of {name} must lie in [0, 1]")
            if abs(math.fsum(v) - 1.0) > SUM_TOL * max(1, v.size):
                raise ConfigurationError(f"{name} sums to {math.fsum(v)!r}, not 1")

    @classmethod
    def from_slot_families(cls, p_empty, p_busy):
        """Build from size-change families.

        ``p_empty[k]`` is the probability of growing by ``k`` from the empty
        state; ``p_busy[k + 1]`` that of changing by ``k`` (``k >= -1``) from a
        nonempty state.
        """
        return cls(np.asarray(p_empty, dtype=float), np.asarray(p_busy, dtype=float))

    @property
    def p_down(self) -> float:
        return float(self.b[0])

    @property
    def p_up(self) -> np.ndarray:
        """Nonempty-state gains ``p_1, p_2, ...`` (index 0 holds ``p_1``)."""
        return self.b[2:]

    def drift(self) -> float:
        """Mean size change per slot from a nonempty state."""
        return float(np.dot(np.arange(-1, self.b.size - 1), self.b))


class TransformDerivatives(NamedTuple):
    a1: float
    b1: float
    a2: float
    b2: float


def transform_derivatives(chain: HessenbergChain) -> TransformDerivatives:
    """First and second derivatives of A(z) and B(z) at z = 1.

    Written in the size-change probabilities: with ``p_-1 = b[0]`` and
    ``p_i = b[i + 1]``, ``B'(1) = -1 + p_-1 - sum(i p_i)`` and
    ``B''(1) = 2 - 2 p_-1 + sum(i (i + 3) p_i)``.
    """
    i_a = np.arange(chain.a.size)
    arrivals = float(np.dot(i_a, chain.a))
    gains = chain.p_up
    i_b = np.arange(1, gains.size + 1)
    a1 = -arrivals
    b1 = -1.0 + chain.p_down - float(np.dot(i_b, gains))
    a2 = float(np.dot(i_a * (i_a + 1), chain.a))
    b2 = 2.0 - 2.0 * chain.p_down + float(np.dot(i_b * (i_b + 3), gains))
    return TransformDerivatives(a1, b1, a2, b2)


def _drift_margin(d: TransformDerivatives) -> float:
    margin = 1.0 + d.b1
    if not margin > 0.0:
        raise UnstableChainError(f"1 + B'(1) = {margin!r}: no downward drift, the chain is not positive recurrent")
    return margin


def empty_probability(chain: HessenbergChain) -> float:
    """Stationary probability of the empty state."""
    d = transform_derivatives(chain)
    margin = _drift_margin(d)
    return margin / (margin - d.a1)


def mean_queue_size(chain: HessenbergChain) -> float:
    """Stationary mean of the chain, ``-S'(1) = -s0 K''(1) / L''(1)``."""
    d = transform_derivatives(chain)
    margin = _drift_margin(d)
    s0 = margin / (margin - d.a1)
    a_at_1 = float(chain.a.sum())
    k2 = (2 * a_at_1 - 2 * d.a1 + d.a2 - d.b2) * (-1.0 - d.b1) - (2.0 - d.b2) * (-a_at_1 + d.a1 - d.b1)
    l2 = 2.0 * (-1.0 - d.b1) ** 2
    qbar = -s0 * k2 / l2
    if qbar < 0.0:
        if qbar < -1e-12 * max(1.0, abs(s0 * k2 / l2)):
            raise InternalConsistencyError(f"negative mean queue size {qbar!r}")
        qbar = 0.0
    return qbar


@dataclass(frozen=True)
class StationaryDistribution:
    probs: np.ndarray
    tail_mass: float

    @property
    def mass_at_zero(self) -> float:
        return float(self.probs[0])

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(self.probs.size), self.probs))


def _cut_recursion(chain: HessenbergChain, size: int) -> np.ndarray:
    """Unnormalised stationary weights of states ``0..size-1``.

    Balances probability flow across each cut ``{0..i} | {i+1..}``: only the
    one-step descent ``i+1 -> i`` crosses downwards, so every new weight is a
    sum of non-negative terms.
    """
    a, b = chain.a, chain.b
    a_tail = np.concatenate([np.cumsum(a[::-1])[::-1][1:], [0.0]])  # a_tail[i] = P(jump from 0 lands above i)
    b_tail = np.concatenate([np.cumsum(b[::-1])[::-1][1:], [0.0]])  # b_tail[l] = sum_{m>l} b[m]
    reach = b.size - 2  # b_tail[l] == 0 for l > reach
    s = np.zeros(size)
    s[0] = 1.0
    for i in range(size - 1):
        flow = s[0] * (a_tail[i] if i < a_tail.size else 0.0)
        lo = max(1, i - reach + 1)
        if lo <= i:
            # j runs lo..i, weight b_tail[i - j + 1]
            flow += float(np.dot(s[lo : i + 1], b_tail[i - lo + 1 : 0 : -1]))
        s[i + 1] = flow / chain.p_down
    return s


def _tail_estimate(s: np.ndarray) -> float:
    total = s.sum()
    last = s[-1]
    if last == 0.0:
        return 0.0
    window = max(1, min(64, s.size // 4))
    ref = s[-1 - window]
    if ref <= 0.0:
        return math.inf
    ratio = (last / ref) ** (1.0 / window)
    if ratio >= 1.0:
        return math.inf
    return last * ratio / (1.0 - ratio) / total


def stationary_solve(chain: HessenbergChain, truncation: int | None = None) -> StationaryDistribution:
    """Numeric stationary distribution on a truncated state space.

    With ``truncation=None`` the number of states doubles until the estimated
    mass beyond the last state drops below 1e-12.  An explicit truncation that
    cannot reach that bound raises :class:`TruncationError`.
    """
    if chain.drift() >= 0.0:
        raise UnstableChainError(f"mean drift {chain.drift()!r} from nonempty states is not negative")
    if chain.a[0] == 1.0:
        probs = np.zeros(truncation or 1)
        probs[0] = 1.0
        return StationaryDistribution(probs, 0.0)
    if chain.p_down == 0.0:
        raise UnstableChainError("the chain can never move down")

    if truncation is not None:
        s = _cut_recursion(chain, truncation)
        tail = _tail_estimate(s)
        if not tail < TAIL_TOL:
            raise TruncationError(f"truncation at {truncation} states leaves estimated tail mass {tail:.3g}", tail)
        return StationaryDistribution(s / s.sum(), tail)

    size = 256
    while True:
        s = _cut_recursion(chain, size)
        tail = _tail_estimate(s)
        if tail < TAIL_TOL:
            return StationaryDistribution(s / s.sum(), tail)
        if size >= MAX_TRUNCATION:
            raise TruncationError(f"tail mass still {tail:.3g} at {size} states", tail)
        size *= 2


def transition_matrix(chain: HessenbergChain, size: int) -> np.ndarray:
    """Row-stochastic matrix of the chain truncated to ``size`` states.

    Jumps past the last state land on it.
    """
    P = np.zeros((size, size))
    for k, p in enumerate(chain.a):
        P[0, min(k, size - 1)] += p
    for row in range(1, size):
        for k, p in enumerate(chain.b):
            P[row, min(row + k - 1, size - 1)] += p
    return P

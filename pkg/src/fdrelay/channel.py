"""Link success probabilities under Rayleigh fading with multi-packet reception.

A packet from ``tx`` is decoded at ``rx`` when its SINR clears the receiver
threshold.  With exponentially distributed fading gains the outage event has a
closed form: a noise factor, one factor per concurrent interferer and, when the
receiver is itself transmitting, a residual self-interference factor scaled by
the coefficient ``g``.

Node identifiers: the relay is ``RELAY`` (0), the destination ``DEST`` ("d"),
and sources are the integers ``1..n``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainAssumptionError, InternalConsistencyError

RELAY = 0
DEST = "d"

# Round-off allowance when clamping computed probabilities into [0, 1].
PROB_SLACK = 1e-15


def check_probability(value: float, what: str = "probability") -> float:
    """Clamp ``value`` into [0, 1] if it is outside only by round-off."""
    if -PROB_SLACK <= value <= 1.0 + PROB_SLACK:
        return min(max(value, 0.0), 1.0)
    raise InternalConsistencyError(f"{what} = {value!r} is outside [0, 1]")


@dataclass(frozen=True)
class LinkParams:
    """Physical parameters of one directed link ``tx -> rx``.

    ``noise_w`` and ``sinr_threshold`` belong to the receiver; they are stored
    per link so that heterogeneous receivers need no separate table.
    """

    distance_m: float
    tx_power_w: float
    fading_v: float = 1.0
    noise_w: float = 1e-11
    sinr_threshold: float = 0.2
    path_loss_exp: float = 4.0

    def __post_init__(self):
        for name in ("distance_m", "tx_power_w", "fading_v", "sinr_threshold"):
            value = getattr(self, name)
            if not value > 0 or not math.isfinite(value):
                raise ConfigurationError(f"LinkParams.{name} must be positive and finite, got {value!r}")
        if not self.noise_w >= 0 or not math.isfinite(self.noise_w):
            raise ConfigurationError(f"LinkParams.noise_w must be >= 0, got {self.noise_w!r}")
        if not 2.0 <= self.path_loss_exp <= 4.0:
            raise ConfigurationError(f"LinkParams.path_loss_exp must lie in [2, 4], got {self.path_loss_exp!r}")
        if not self.power_factor > 0:
            raise ConfigurationError("received-power factor underflows to zero")

    @property
    def power_factor(self) -> float:
        """Mean received power factor ``P_tx * r^-alpha`` (watts)."""
        return self.tx_power_w * self.distance_m ** (-self.path_loss_exp)

    @property
    def mean_rx_power(self) -> float:
        return self.fading_v * self.power_factor

    def noise_success(self) -> float:
        """Success probability against noise alone."""
        return math.exp(-self.sinr_threshold * self.noise_w / self.mean_rx_power)


@dataclass(frozen=True)
class SelfInterference:
    coefficient_g: float

    def __post_init__(self):
        if not 0.0 <= self.coefficient_g <= 1.0:
            raise ConfigurationError(f"self-interference coefficient must lie in [0, 1], got {self.coefficient_g!r}")


def as_transmit_set(nodes: Iterable) -> frozenset:
    nodes = list(nodes)
    active = frozenset(nodes)
    if len(active) != len(nodes):
        raise ConfigurationError(f"duplicate node in transmit set {nodes!r}")
    return active


def _link(links: Mapping, tx, rx) -> LinkParams:
    try:
        return links[(tx, rx)]
    except KeyError:
        raise ConfigurationError(f"missing link parameters for pair ({tx!r}, {rx!r})") from None


def success_probability(tx, rx, active: Iterable, links: Mapping, si: SelfInterference) -> float:
    """Probability that ``rx`` decodes ``tx`` while the nodes in ``active`` transmit.

    ``links`` maps ``(tx, rx)`` pairs to :class:`LinkParams`; entries are needed
    for the wanted link and for every other active node towards ``rx``.
    """
    active = active if isinstance(active, frozenset) else as_transmit_set(active)
    if tx not in active:
        raise ConfigurationError(f"transmitter {tx!r} is not in the transmit set")
    if tx == rx:
        raise ConfigurationError("transmitter and receiver must differ")
    wanted = _link(links, tx, rx)
    gamma = wanted.sinr_threshold
    signal = wanted.mean_rx_power

    prob = wanted.noise_success()
    if rx in active:
        # residual self-interference, written exactly as the closed form prints it
        prob /= 1.0 + gamma * wanted.distance_m ** wanted.path_loss_exp * si.coefficient_g
    for k in active:
        if k == tx or k == rx:
            continue
        prob /= 1.0 + gamma * _link(links, k, rx).mean_rx_power / signal
    return check_probability(prob, f"P[{tx}->{rx} | {sorted(map(str, active))}]")


def symmetric_links(
    n: int,
    link_ur: LinkParams,
    link_ud: LinkParams,
    link_rd: LinkParams,
) -> dict:
    """Link table for ``n`` identical sources around one relay and destination."""
    links = {(RELAY, DEST): link_rd}
    for u in range(1, n + 1):
        links[(u, RELAY)] = link_ur
        links[(u, DEST)] = link_ud
    return links


@dataclass(frozen=True)
class SymmetricProbTable:
    """Success probabilities for ``n`` statistically identical sources.

    ``dest[i, j]`` is the probability that the destination decodes one source
    when ``i`` sources transmit and the relay is silent (``j=0``) or
    transmitting (``j=1``); ``relay[i, j]`` is the same at the relay receiver;
    ``relay_dest[i]`` is the relay->destination success probability alongside
    ``i`` transmitting sources.  Row 0 of ``dest`` and ``relay`` is NaN.
    """

    n: int
    dest: np.ndarray
    relay: np.ndarray
    relay_dest: np.ndarray
    beta: float = math.nan

    def __post_init__(self):
        n = self.n
        if n < 1:
            raise ConfigurationError("need at least one source")
        if self.dest.shape != (n + 1, 2) or self.relay.shape != (n + 1, 2) or self.relay_dest.shape != (n + 1,):
            raise ConfigurationError(f"probability tables are not sized for n={n}")
        for arr in (self.dest[1:], self.relay[1:], self.relay_dest):
            if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
                raise ConfigurationError("symmetric success probabilities must lie in [0, 1]")

    @classmethod
    def from_arrays(cls, dest, relay, relay_dest, beta=math.nan):
        """Build a table from ``(n, 2)``, ``(n, 2)`` and ``(n+1,)`` arrays indexed from i=1."""
        dest = np.asarray(dest, dtype=float)
        relay = np.asarray(relay, dtype=float)
        n = dest.shape[0]
        pad = np.full((1, 2), np.nan)
        return cls(
            n=n,
            dest=np.vstack([pad, dest]),
            relay=np.vstack([pad, relay]),
            relay_dest=np.asarray(relay_dest, dtype=float),
            beta=beta,
        )

    def to_arrays(self):
        return self.dest[1:].copy(), self.relay[1:].copy(), self.relay_dest.copy()

    def lookup(self, tx, rx, active: frozenset) -> float:
        """Success probability in the generic ``(tx, rx, T)`` form."""
        relay_on = RELAY in active
        users = len(active) - relay_on
        if tx == RELAY:
            return float(self.relay_dest[users])
        if rx == DEST:
            return float(self.dest[users, int(relay_on)])
        return float(self.relay[users, int(relay_on)])


def symmetric_success_probs(
    n: int,
    link_ur: LinkParams,
    link_ud: LinkParams,
    link_rd: LinkParams,
    si: SelfInterference,
    beta: float | None = None,
    verbatim_relay_dest: bool = False,
) -> SymmetricProbTable:
    """Closed-form success tables for the symmetric network.

    ``beta`` is the relay-to-source received-power ratio at the destination;
    it is derived from the links unless overridden.  ``verbatim_relay_dest``
    reproduces the printed relay->destination noise term, which reuses the
    source->relay parameters.
    """
    if n < 1:
        raise ConfigurationError("need at least one source")
    if beta is None:
        beta = link_rd.mean_rx_power / link_ud.mean_rx_power
    if not beta > 1.0:
        raise DomainAssumptionError(f"beta = {beta!r}; the symmetric forms assume the relay is the stronger transmitter at the destination (beta > 1)")

    gamma_0 = link_ur.sinr_threshold
    gamma_d = link_ud.sinr_threshold
    p_0 = link_ur.noise_success()
    p_d = link_ud.noise_success()
    p_0d = p_0 if verbatim_relay_dest else link_rd.noise_success()
    self_factor = 1.0 / (1.0 + gamma_0 * link_ur.distance_m ** link_ur.path_loss_exp * si.coefficient_g)

    i = np.arange(1, n + 1)
    dest = np.full((n + 1, 2), np.nan)
    relay = np.full((n + 1, 2), np.nan)
    dest[1:, 0] = p_d * (1.0 + gamma_d) ** -(i - 1.0)
    dest[1:, 1] = dest[1:, 0] / (1.0 + beta * gamma_d)
    relay[1:, 0] = p_0 * (1.0 + gamma_0) ** -(i - 1.0)
    relay[1:, 1] = relay[1:, 0] * self_factor
    relay_dest = p_0d * (1.0 + gamma_d / beta) ** -np.arange(n + 1.0)
    return SymmetricProbTable(n=n, dest=dest, relay=relay, relay_dest=relay_dest, beta=float(beta))

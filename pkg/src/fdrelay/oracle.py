"""Brute-force enumeration of every joint outcome of one slot.

This is the reference the closed-form slot distributions are checked against.
It knows nothing about the binomial or term-by-term expressions: it walks each
transmit decision and each relevant decode indicator, applies the forwarding
rules and accumulates the probability of each queue-size change.

Forwarding rules per source packet:
  * decoded at the destination            -> delivered, never enqueued
  * missed by the destination, decoded at
    the relay                              -> enqueued at the relay
  * missed by both                         -> lost (source keeps it)
The relay's head-of-line packet leaves when the relay transmits and the
destination decodes it.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from .channel import DEST, RELAY

MAX_ENUMERATED_USERS = 12

SuccessLookup = Callable[[object, object, frozenset], float]


@dataclass(frozen=True)
class SlotSlice:
    """Exact one-slot distributions for a fixed queue state.

    ``change[k]`` is the probability that the queue grows by ``k`` (``k=-1``
    is a net departure); ``arrivals[k]`` that ``k`` packets are enqueued.
    """

    change: dict
    arrivals: dict

    def change_vector(self, lo: int, hi: int) -> list:
        return [self.change.get(k, 0.0) for k in range(lo, hi + 1)]

    def arrival_vector(self, hi: int) -> list:
        return [self.arrivals.get(k, 0.0) for k in range(0, hi + 1)]


def enumerate_slot_outcomes(
    user_q: Sequence[float],
    q0: float,
    queue_nonempty: bool,
    success: SuccessLookup,
) -> SlotSlice:
    n = len(user_q)
    if n > MAX_ENUMERATED_USERS:
        raise ValueError(f"exhaustive enumeration is capped at {MAX_ENUMERATED_USERS} sources")
    users = list(range(1, n + 1))
    change = defaultdict(float)
    arrivals = defaultdict(float)

    relay_choices = [(True, q0), (False, 1.0 - q0)] if queue_nonempty else [(False, 1.0)]
    for relay_on, p_relay in relay_choices:
        if p_relay == 0.0:
            continue
        for pattern in itertools.product((0, 1), repeat=n):
            p_pattern = p_relay
            for u, bit in zip(users, pattern):
                p_pattern *= user_q[u - 1] if bit else 1.0 - user_q[u - 1]
            if p_pattern == 0.0:
                continue
            senders = [u for u, bit in zip(users, pattern) if bit]
            active = frozenset(senders + ([RELAY] if relay_on else []))

            fates = []
            for u in senders:
                p_dir = success(u, DEST, active)
                p_rel = success(u, RELAY, active)
                fates.append(((0, p_dir), (1, (1.0 - p_dir) * p_rel), (0, (1.0 - p_dir) * (1.0 - p_rel))))
            if relay_on:
                p_out = success(RELAY, DEST, active)
                departures = ((1, p_out), (0, 1.0 - p_out))
            else:
                departures = ((0, 1.0),)

            for gone, p_gone in departures:
                for combo in itertools.product(*fates):
                    p = p_pattern * p_gone
                    stored = 0
                    for s, p_fate in combo:
                        p *= p_fate
                        stored += s
                    change[stored - gone] += p
                    arrivals[stored] += p
    return SlotSlice(change=dict(change), arrivals=dict(arrivals))

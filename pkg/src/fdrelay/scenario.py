"""Scenario description, file parsing and single-point evaluation."""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass

from .channel import DEST, RELAY, LinkParams, SelfInterference, symmetric_links, symmetric_success_probs
from .errors import ConfigurationError
from .n_user import SymmetricConfig, n_analyze_queue, n_q0_min, n_throughput
from .reports import QueueAnalysis, ThroughputReport
from .two_user import TwoUserConfig, analyze_queue, q0_min, throughput

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

MODES = ("n-symmetric", "two-user")
SWEEPABLE = ("g", "gamma", "q", "q0", "n", "q1", "q2")


@dataclass(frozen=True)
class Scenario:
    """Network geometry, radio parameters and access probabilities.

    Distances in meters, powers in watts.  ``q0`` may be ``"auto"``: the
    midpoint of the stability interval ``(q0min, 1)``, or 1 when it is empty.
    In ``two-user`` mode ``q1``/``q2`` default to ``q`` and the second
    source may sit at its own distances ``r_0_2``/``r_d_2``.
    """

    mode: str = "n-symmetric"
    n: int = 2
    r_d: float = 130.0
    r_0: float = 60.0
    r_0d: float = 80.0
    alpha: float = 4.0
    eta: float = 1e-11
    p_relay: float = 10e-3
    p_user: float = 1e-3
    fading_v: float = 1.0
    gamma: float = 0.6
    g: float = 1.0
    q: float = 0.3
    q0: float | str = 0.9
    q1: float | None = None
    q2: float | None = None
    r_0_2: float | None = None
    r_d_2: float | None = None
    beta: float | None = None
    verbatim_relay_dest: bool = False
    slots: int = 1_000_000
    seed: int = 0
    warmup: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode: expected one of {MODES}, got {self.mode!r}")
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ConfigurationError(f"n: expected a positive integer, got {self.n!r}")
        if self.mode == "two-user" and self.n != 2:
            raise ConfigurationError("n: two-user mode needs n = 2")
        for name in ("q", "q1", "q2"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"{name}: expected a probability, got {value!r}")
        if self.q0 != "auto" and not (isinstance(self.q0, (int, float)) and 0.0 <= self.q0 <= 1.0):
            raise ConfigurationError(f"q0: expected a probability or 'auto', got {self.q0!r}")
        if not 0.0 <= self.g <= 1.0:
            raise ConfigurationError(f"g: expected a value in [0, 1], got {self.g!r}")
        if self.slots < 1 or self.seed < 0:
            raise ConfigurationError("slots must be positive and seed non-negative")

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def link(self, distance: float, power: float) -> LinkParams:
        try:
            return LinkParams(distance, power, self.fading_v, self.eta, self.gamma, self.alpha)
        except ConfigurationError as exc:
            raise ConfigurationError(f"link parameters: {exc}") from None

    def links(self) -> dict:
        if self.mode == "n-symmetric":
            return symmetric_links(self.n, self.link(self.r_0, self.p_user), self.link(self.r_d, self.p_user), self.link(self.r_0d, self.p_relay))
        links = symmetric_links(2, self.link(self.r_0, self.p_user), self.link(self.r_d, self.p_user), self.link(self.r_0d, self.p_relay))
        links[(2, RELAY)] = self.link(self.r_0 if self.r_0_2 is None else self.r_0_2, self.p_user)
        links[(2, DEST)] = self.link(self.r_d if self.r_d_2 is None else self.r_d_2, self.p_user)
        return links

    def self_interference(self) -> SelfInterference:
        return SelfInterference(self.g)

    def build(self) -> TwoUserConfig | SymmetricConfig:
        """The analysable configuration, with ``q0='auto'`` resolved."""
        q0 = 0.5 if self.q0 == "auto" else float(self.q0)
        if self.mode == "n-symmetric":
            probs = symmetric_success_probs(
                self.n,
                self.link(self.r_0, self.p_user),
                self.link(self.r_d, self.p_user),
                self.link(self.r_0d, self.p_relay),
                self.self_interference(),
                beta=self.beta,
                verbatim_relay_dest=self.verbatim_relay_dest,
            )
            cfg = SymmetricConfig(self.n, self.q, q0, probs)
            threshold = n_q0_min
        else:
            q1 = self.q if self.q1 is None else self.q1
            q2 = self.q if self.q2 is None else self.q2
            cfg = TwoUserConfig.from_links(q0, q1, q2, self.links(), self.self_interference())
            threshold = q0_min
        if self.q0 == "auto":
            q0min = threshold(cfg)
            cfg = cfg.with_q0(0.5 * (q0min + 1.0) if q0min < 1.0 else 1.0)
        return cfg


def _coerce(name: str, value, field_type: str):
    if value is None:
        return None
    try:
        if name == "q0" and isinstance(value, str) and value.strip() == "auto":
            return "auto"
        if "bool" in field_type:
            if isinstance(value, str):
                if value.lower() in ("1", "true", "yes"):
                    return True
                if value.lower() in ("0", "false", "no"):
                    return False
                raise ValueError(value)
            return bool(value)
        if "int" in field_type and "float" not in field_type:
            as_float = float(value)
            if not as_float.is_integer():
                raise ValueError(value)
            return int(as_float)
        if "str" in field_type and "float" not in field_type:
            return str(value)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name}: cannot interpret {value!r} as {field_type}") from None


_FIELDS = {f.name: f for f in dataclasses.fields(Scenario)}


def scenario_from_mapping(values: dict, base: Scenario | None = None) -> Scenario:
    """Apply ``values`` on top of ``base`` (defaults otherwise); unknown keys are errors."""
    unknown = sorted(set(values) - set(_FIELDS))
    if unknown:
        raise ConfigurationError(f"unknown scenario key(s): {', '.join(unknown)}")
    changes = {k: _coerce(k, v, str(_FIELDS[k].type)) for k, v in values.items()}
    return dataclasses.replace(base or Scenario(), **changes)


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    steps: int
    log: bool = False

    def __post_init__(self):
        if self.variable not in SWEEPABLE:
            raise ConfigurationError(f"sweep variable: expected one of {SWEEPABLE}, got {self.variable!r}")
        if self.steps < 1:
            raise ConfigurationError("steps: need at least one sweep point")
        if self.log and not (self.start > 0 and self.stop > 0):
            raise ConfigurationError("logarithmic sweeps need positive bounds")

    def values(self) -> list:
        if self.steps == 1:
            points = [self.start]
        elif self.log:
            lo, hi = math.log10(self.start), math.log10(self.stop)
            points = [10 ** (lo + (hi - lo) * i / (self.steps - 1)) for i in range(self.steps)]
            points[0], points[-1] = self.start, self.stop
        else:
            points = [self.start + (self.stop - self.start) * i / (self.steps - 1) for i in range(self.steps)]
            points[-1] = self.stop
        if self.variable == "n":
            ints = [round(v) for v in points]
            if any(abs(v - i) > 1e-9 for v, i in zip(points, ints)):
                raise ConfigurationError("n sweep must land on integers; adjust --from/--to/--steps")
            return ints
        return points


def load_scenario_file(path) -> tuple:
    """Read a TOML scenario; returns ``(Scenario, SweepSpec | None)``.

    Top-level keys are scenario fields; an optional ``[sweep]`` table holds
    ``variable``, ``from``, ``to``, ``steps`` and ``log``.
    """
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
    sweep = data.pop("sweep", None)
    scenario = scenario_from_mapping(data)
    spec = None
    if sweep is not None:
        unknown = sorted(set(sweep) - {"variable", "from", "to", "steps", "log"})
        if unknown:
            raise ConfigurationError(f"unknown sweep key(s): {', '.join(unknown)}")
        try:
            spec = SweepSpec(sweep["variable"], float(sweep["from"]), float(sweep["to"]), int(sweep.get("steps", 1)), bool(sweep.get("log", False)))
        except KeyError as exc:
            raise ConfigurationError(f"sweep: missing key {exc.args[0]!r}") from None
    return scenario, spec


def analyse(scenario: Scenario) -> tuple:
    """Closed-form analysis of one scenario: ``(config, QueueAnalysis, ThroughputReport)``."""
    cfg = scenario.build()
    if isinstance(cfg, SymmetricConfig):
        qa = n_analyze_queue(cfg)
        return cfg, qa, n_throughput(cfg, qa)
    qa = analyze_queue(cfg)
    return cfg, qa, throughput(cfg, qa)


def point_record(scenario: Scenario, cfg, qa: QueueAnalysis, th: ThroughputReport) -> dict:
    """Flat machine-readable record of one evaluated point."""
    record = {
        "mode": scenario.mode,
        "n": scenario.n,
        "gamma": scenario.gamma,
        "g": scenario.g,
        "q": scenario.q,
        "q0": cfg.q0,
        "lambda0": qa.lambda0,
        "lambda1": qa.lambda1,
        "lambda": qa.lambda_,
        "mu": qa.mu,
        "p_empty": qa.p_empty,
        "q0min": qa.q0min,
        "qbar": qa.qbar,
        "throughput_per_user": th.aggregate / len(th.per_user),
        "aggregate_throughput": th.aggregate,
        "stable": qa.stable,
    }
    if scenario.mode == "two-user":
        record["q1"], record["q2"] = cfg.q1, cfg.q2
        record["throughput_user1"], record["throughput_user2"] = th.per_user
    return record

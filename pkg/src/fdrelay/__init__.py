"""Analytical model and simulator for a full-duplex relay serving random-access sources."""

from .channel import (
    DEST,
    RELAY,
    LinkParams,
    SelfInterference,
    SymmetricProbTable,
    success_probability,
    symmetric_links,
    symmetric_success_probs,
)
from .errors import (
    ConfigurationError,
    DomainAssumptionError,
    InternalConsistencyError,
    TruncationError,
    UnstableChainError,
)
from .n_user import (
    SymmetricConfig,
    enumerate_n_slot,
    n_analyze_queue,
    n_q0_min,
    n_service_rate,
    n_slot_distribution,
    n_throughput,
)
from .queue_analysis import (
    HessenbergChain,
    empty_probability,
    mean_queue_size,
    stationary_solve,
    transform_derivatives,
)
from .reports import QueueAnalysis, SlotOutcomeDistribution, ThroughputReport
from .scenario import Scenario, SweepSpec, analyse
from .simulator import SimConfig, SimReport, detect_instability, physical_success_rate, simulate
from .two_user import (
    TwoUserConfig,
    analyze_queue,
    enumerate_slot,
    q0_min,
    service_rate,
    slot_distribution,
    throughput,
)

__version__ = "0.1.0"

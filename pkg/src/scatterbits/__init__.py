"""Round-based simulator for probabilistic scattering of mobile robots,
with exact accounting of every random bit the robots consume."""

__version__ = "0.1.0"

from .geometry import (Configuration, RationalPoint, SafeRegion,
                       destination_at, safe_region, u_projection,
                       voronoi_membership)
from .protocols import (FFunction, ProtocolView, f_from_g, f_inv_ackermann,
                        f_loglog, f_logstar, parse_protocol)
from .randomness import BitLedger, BitSource, uniform_index, weighted_index
from .scheduler import (DetectionMode, SimulationState, TrialRecord,
                        run_to_scatter, step)

__all__ = [
    "__version__",
    "Configuration", "RationalPoint", "SafeRegion", "destination_at",
    "safe_region", "u_projection", "voronoi_membership",
    "FFunction", "ProtocolView", "f_from_g", "f_inv_ackermann", "f_loglog",
    "f_logstar", "parse_protocol",
    "BitLedger", "BitSource", "uniform_index", "weighted_index",
    "DetectionMode", "SimulationState", "TrialRecord", "run_to_scatter", "step",
]

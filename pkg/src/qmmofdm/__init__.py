"""Link-level simulator for Q-ary multi-mode OFDM with index modulation."""

from .constellation import ModeSet, build_modes
from .errors import ConfigurationError, GuardRailError, QmmError
from .index_code import IndexCodebook, generate_codebook
from .modem import BlockScheme, QmmScheme, SchemeParams
from .simulation import SweepConfig, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BlockScheme",
    "ConfigurationError",
    "GuardRailError",
    "IndexCodebook",
    "ModeSet",
    "QmmError",
    "QmmScheme",
    "SchemeParams",
    "SweepConfig",
    "build_modes",
    "generate_codebook",
    "run_sweep",
]

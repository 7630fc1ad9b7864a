"""Constrained-sequence coding toolkit.

Capacity analysis of DC-free constraints, the balanced 4B6B line code,
an OOK/AWGN channel front end, classical and neural decoders, and a
Monte-Carlo bit-error-rate harness.
"""

__version__ = "0.1.0"

from . import bits, channel, codebook, constraint
from .channel import ChannelModel, add_noise, hard_decision, llr, modulate_ook, snr_to_sigma
from .codebook import Codebook, base_4b6b, concat_4b6b, nearest_codeword, shuffled_concat
from .constraint import (
    CapacityResult,
    ConstraintFsm,
    RateEntry,
    build_dcfree_fsm,
    capacity,
    count_sequences,
    rate_table,
)

# Heavier submodules (scikit-learn, the training loop) are imported lazily so
# that capacity/codebook tooling stays cheap to import.
_LAZY_SUBMODULES = ("decoders", "eval", "nn", "training", "cli")


def __getattr__(name):
    if name in _LAZY_SUBMODULES:
        import importlib

        module = importlib.import_module(f".{name}", __name__)
        globals()[name] = module
        return module
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")

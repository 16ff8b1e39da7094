"""Chart-based constituency parsing: in-order, top-down and CKY decoders over one span scorer."""

from ._core import (
    ConfigError,
    Model,
    ModelError,
    ParseError,
    binarize,
    collapse_unaries,
    evaluate,
    leaves,
    normalize,
    oracle_check,
    oracle_parents,
    spans,
    synth,
)

__all__ = [
    "ConfigError",
    "Model",
    "ModelError",
    "ParseError",
    "binarize",
    "collapse_unaries",
    "evaluate",
    "leaves",
    "normalize",
    "oracle_check",
    "oracle_parents",
    "spans",
    "synth",
]

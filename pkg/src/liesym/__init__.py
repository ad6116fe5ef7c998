"""Affine matrix Lie group model of measurement symmetries."""

__version__ = "0.1.0"

from .errors import DomainError, FlowError, LiesymError, UsageError  # noqa: E402
from .lie_core import (  # noqa: E402
    Generator,
    GroupElement,
    MeasurementVector,
    apply,
    bracket,
    compose,
    exp_map,
    inverse,
    log_map,
    make_group,
)

__all__ = [
    "__version__",
    "DomainError",
    "FlowError",
    "LiesymError",
    "UsageError",
    "Generator",
    "GroupElement",
    "MeasurementVector",
    "apply",
    "bracket",
    "compose",
    "exp_map",
    "inverse",
    "log_map",
    "make_group",
]

"""Metric operator fields over finite-dimensional C*-algebras."""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    AlgebraElement,
    AlgebraSignature,
    DEFAULT_TOL,
    State,
    TensorSignature,
    ToleranceConfig,
)
from .errors import MofkitError  # noqa: E402
from .lipschitz import OperatorField, lip_seminorm  # noqa: E402
from .mof import MofSpace, verify_mof  # noqa: E402

__all__ = [
    "AlgebraElement",
    "AlgebraSignature",
    "DEFAULT_TOL",
    "MofSpace",
    "MofkitError",
    "OperatorField",
    "State",
    "TensorSignature",
    "ToleranceConfig",
    "lip_seminorm",
    "verify_mof",
]

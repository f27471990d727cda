"""Frame-level curvature engine for semi-Riemannian 4-manifolds.

The package computes connections, curvature and Ricci forms of 4-manifolds
presented through frame data (metric values, bracket coefficients and frame
derivatives of a small independent-variable set), builds the induced Kahler
metrics of such structures, and verifies central and warped-product
Kahler-Einstein properties on a built-in example catalog.
"""

__version__ = "0.1.0"

from .fields import (  # noqa: F401
    CScalarField,
    DomainError,
    ExpressionError,
    FieldError,
    KSet,
    ScalarField,
    SingularMatrixError,
    make_closed_form,
)
from .frames import FrameStructure  # noqa: F401

"""Gauge-scaled Bregman divergences and their applications."""

from .core import (
    Generator,
    IdentityCheck,
    ScaledGenerator,
    Scaler,
    bregman_divergence,
    check_restricted_homogeneity,
    deep_compose,
    expfam_kl_via_scaled,
    scaled_generator,
    trace_divergence,
    verify_scaled_identity,
)
from .catalog import CatalogEntry, Row, catalog_entry, closed_form_vs_generic
from .linalg import EigenDecomposition, matrix_fn, sym_eigen

__version__ = "0.1.0"

__all__ = [
    "Generator",
    "Scaler",
    "ScaledGenerator",
    "IdentityCheck",
    "bregman_divergence",
    "trace_divergence",
    "scaled_generator",
    "check_restricted_homogeneity",
    "verify_scaled_identity",
    "deep_compose",
    "expfam_kl_via_scaled",
    "CatalogEntry",
    "Row",
    "catalog_entry",
    "closed_form_vs_generic",
    "EigenDecomposition",
    "sym_eigen",
    "matrix_fn",
    "__version__",
]

"""Robust Dunnett-type multiple comparisons against a control."""

from ._robustmct import (
    DegenerateDataError,
    GroupedSample,
    InvalidDesignError,
    MaxTResult,
    TransformationModel,
    colr_dunnett,
    dunnett_test,
    fit_mlt,
    load_samples,
    mlt_dunnett,
    mmm_dunnett,
    npar_dunnett,
    robust_dunnett,
    run_simulation,
)

__all__ = [
    "DegenerateDataError",
    "GroupedSample",
    "InvalidDesignError",
    "MaxTResult",
    "TransformationModel",
    "colr_dunnett",
    "dunnett_test",
    "fit_mlt",
    "load_samples",
    "mlt_dunnett",
    "mmm_dunnett",
    "npar_dunnett",
    "robust_dunnett",
    "run_simulation",
]

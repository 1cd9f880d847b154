"""Coherent states on generalized Bergman spaces and their extended negative binomial law."""

from .bergman import DiskPoint, SpaceParams
from .distribution import (
    DistParams,
    StatClassification,
    Verdict,
    classify,
    moments,
    pgf_closed,
    pmf,
    pmf_table,
    sample,
)
from .errors import ConvergenceError, DegenerateError, DomainError, GnbError
from .oracle import ValidationReport, run_suite

__version__ = "0.1.0"

__all__ = [
    "DiskPoint",
    "SpaceParams",
    "DistParams",
    "StatClassification",
    "Verdict",
    "classify",
    "moments",
    "pgf_closed",
    "pmf",
    "pmf_table",
    "sample",
    "ConvergenceError",
    "DegenerateError",
    "DomainError",
    "GnbError",
    "ValidationReport",
    "run_suite",
]

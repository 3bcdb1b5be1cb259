"""Finite-difference cross-check of the trapped-mode certificates."""
from .classes import RestrictedOperator, class_fractions, classify_mode, project_field, restrict
from .eigen import lowest_eigenpairs
from .grid import DiscreteOperator, GridSpec, assemble, check_grid
from .modes import ModeResult, convergence_study, discrete_threshold, fit_decay, trapped_modes

__all__ = [
    "GridSpec",
    "DiscreteOperator",
    "assemble",
    "check_grid",
    "RestrictedOperator",
    "restrict",
    "classify_mode",
    "class_fractions",
    "project_field",
    "lowest_eigenpairs",
    "ModeResult",
    "trapped_modes",
    "convergence_study",
    "discrete_threshold",
    "fit_decay",
]

"""Harmonic-function approximation algorithms for multiple-choice geometric packing."""

from .harmonic import (DomainError, HarmonicContext, Rational, TransformMode, compute_T, f_of,
                       H_of, to_rational, transform_lengths, type_of, type_vector)
from .model import (InputError, Item, Itemset, Packing, PackingKind, Placement, RotationPolicy,
                    best_orientation, orientations, validate_packing)
from .results import Bound, SolveResult
from .fullh import fullh_bp, fullh_mcbp, lower_bound_bp
from .strip import hdh_mcsp, hdh_sp, lower_bound_sp
from .knapsack import hdh_ks, hdh_nf, mcks_1d_fptas
from .hgap import choose_and_pack, guess_shelves, hgap, inflate, round_instance
from .dff import weighting_transform_all, weighting_transform_dim

__all__ = [
    "DomainError", "HarmonicContext", "Rational", "TransformMode", "compute_T", "f_of", "H_of",
    "to_rational", "transform_lengths", "type_of", "type_vector",
    "InputError", "Item", "Itemset", "Packing", "PackingKind", "Placement", "RotationPolicy",
    "best_orientation", "orientations", "validate_packing",
    "Bound", "SolveResult",
    "fullh_bp", "fullh_mcbp", "lower_bound_bp",
    "hdh_mcsp", "hdh_sp", "lower_bound_sp",
    "hdh_ks", "hdh_nf", "mcks_1d_fptas",
    "choose_and_pack", "guess_shelves", "hgap", "inflate", "round_instance",
    "weighting_transform_all", "weighting_transform_dim",
]

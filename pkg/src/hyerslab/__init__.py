"""Numerical laboratory for Hyers-Ulam stability of the generalized Jensen
equation and ternary homomorphisms on Banach ternary algebras."""
from .algebra import AlgebraContext, Kind, MatrixElement, PolyElement
from .control import Constant, Direction, PowerType, Sampled, derivation_bound, phi_tilde, power_bound_closed_form
from .homstab import (LinearityMode, hom_residual, recover_hom, unimodular_three_split, verify_complex_linearity,
                      verify_generated_hom, verify_hom_defect, verify_scaling)
from .hyers import JensenParams, Pivot, ProbeFunction, hyers_iterate, hyers_limit, jensen_residual
from .kernels import BACKEND
from .perturb import PerturbationSpec, calibrate_epsilon, make_exact_hom, make_probe

__version__ = "0.1.0"

__all__ = [
    "AlgebraContext", "Kind", "MatrixElement", "PolyElement",
    "Constant", "Direction", "PowerType", "Sampled", "derivation_bound", "phi_tilde", "power_bound_closed_form",
    "LinearityMode", "hom_residual", "recover_hom", "unimodular_three_split", "verify_complex_linearity",
    "verify_generated_hom", "verify_hom_defect", "verify_scaling",
    "JensenParams", "Pivot", "ProbeFunction", "hyers_iterate", "hyers_limit", "jensen_residual",
    "BACKEND", "PerturbationSpec", "calibrate_epsilon", "make_exact_hom", "make_probe",
]

"""Numerical models and property checks for C*-semi-inner-product modules."""

from . import algebra, faults, harness, module_sip, operators, orthogonality, sip_classical
from .algebra import (
    DEFAULT_POLICY,
    AlgebraElement,
    DirectSum,
    Functions,
    Matrices,
    NumericPolicy,
)
from .errors import DomainError, PreconditionError, StructuralError, UsageError
from .harness import RunReport, SuiteConfig, find_counterexamples, run_suites
from .module_sip import (
    BlockIso,
    Bundle,
    DirectSumModule,
    MatrixSelf,
    ModuleElement,
    PermuteOmega,
    Transported,
    UnitaryConj,
    csip,
    module_action,
    module_element,
    rho,
    triple_norm,
)
from .operators import DualFunctional, Fibered, LeftMult, apply, min_K, op_norm
from .orthogonality import BJResult, bj_minimize
from .report import VerificationReport
from .sip_classical import Hilbert, LpGiles, SipVector

__all__ = [
    "DEFAULT_POLICY", "AlgebraElement", "BJResult", "BlockIso", "Bundle", "DirectSum",
    "DirectSumModule", "DomainError", "DualFunctional", "Fibered", "Functions", "Hilbert",
    "LeftMult", "LpGiles", "Matrices", "MatrixSelf", "ModuleElement", "NumericPolicy",
    "PermuteOmega", "PreconditionError", "RunReport", "SipVector", "StructuralError",
    "SuiteConfig", "Transported", "UnitaryConj", "UsageError", "VerificationReport",
    "algebra", "apply", "bj_minimize", "csip", "faults", "find_counterexamples", "harness",
    "min_K", "module_action", "module_element", "module_sip", "op_norm", "operators",
    "orthogonality", "rho", "run_suites", "sip_classical", "triple_norm",
]

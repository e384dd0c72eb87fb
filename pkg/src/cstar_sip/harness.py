"""Suite orchestration: configs in, deterministic run reports out."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from importlib import metadata

import numpy as np

from . import faults
from . import module_sip as ms
from . import operators as ops
from . import orthogonality as orth
from .algebra import DEFAULT_POLICY, NumericPolicy
from .errors import StructuralError, UsageError
from .report import VerificationReport, check, combine, skipped
from .rng import trial_generator
from .sip_classical import Hilbert, LpGiles

SUITES = ("axioms", "norms", "finsler", "fullness", "transport", "orthogonality", "thm34",
          "operators", "counterexamples")
NON_MANDATORY = frozenset({"counterexamples"})
DEFAULT_TRIALS = 1000
DEFAULT_SEED = 42


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# -- constructions ------------------------------------------------------------

def default_constructions():
    """One construction per example class: both fiber types, matrices over
    themselves, a direct sum and a transported module."""
    perm = ms.PermuteOmega((1, 0))
    return [
        ms.Bundle((Hilbert(2), Hilbert(2))),
        ms.Bundle((LpGiles(2, 3.0), LpGiles(2, 3.0))),
        ms.MatrixSelf(2),
        ms.DirectSumModule((ms.Bundle((Hilbert(2), LpGiles(2, 3.0))), ms.MatrixSelf(2))),
        ms.Transported(ms.Bundle((LpGiles(2, 3.0), LpGiles(2, 3.0))), perm),
    ]


def acceptance_constructions(seed=DEFAULT_SEED):
    """The wider set: three bundles, two matrix modules, a mixed direct sum and
    transported copies of each under permutations and unitary conjugations."""
    rng = trial_generator(seed, ("acceptance_unitaries",), 0)
    b1 = ms.Bundle((Hilbert(2), Hilbert(2)))
    b2 = ms.Bundle((LpGiles(2, 3.0), LpGiles(2, 3.0)))
    b3 = ms.Bundle((LpGiles(3, 1.5),) * 3)
    m2, m3 = ms.MatrixSelf(2), ms.MatrixSelf(3)
    ds = ms.DirectSumModule((ms.Bundle((Hilbert(2), LpGiles(2, 3.0))),
                             ms.Bundle((LpGiles(3, 1.5), Hilbert(1)))))
    mixed = ms.DirectSumModule((ms.Bundle((Hilbert(2), LpGiles(2, 3.0))), m2))
    u2 = ms.UnitaryConj(ms.random_unitary(2, rng))
    u3 = ms.UnitaryConj(ms.random_unitary(3, rng))
    swap, cyc = ms.PermuteOmega((1, 0)), ms.PermuteOmega((2, 0, 1))
    return [
        b1, b2, b3, m2, m3, ds,
        ms.Transported(b1, swap),
        ms.Transported(b2, swap),
        ms.Transported(b3, cyc),
        ms.Transported(m2, u2),
        ms.Transported(m3, u3),
        ms.Transported(ds, ms.BlockIso((swap, swap))),
        ms.Transported(mixed, ms.BlockIso((swap, ms.UnitaryConj(ms.random_unitary(2, rng))))),
    ]


# -- configuration ------------------------------------------------------------

@dataclass
class SuiteConfig:
    constructions: list = field(default_factory=default_constructions)
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    policy: NumericPolicy = DEFAULT_POLICY
    suites: tuple = SUITES
    fault_inject: str | None = None

    def __post_init__(self):
        if isinstance(self.trials, bool) or not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise UsageError(f"trials must be a positive integer, got {self.trials!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2 ** 64:
            raise UsageError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        self.suites = tuple(self.suites)
        if not self.suites:
            raise UsageError("at least one suite must be selected")
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise UsageError(f"unknown suites: {', '.join(unknown)}")
        if not self.constructions:
            raise UsageError("at least one construction is required")
        if self.fault_inject is not None and self.fault_inject not in faults.FAULT_MODES:
            raise UsageError(f"unknown fault mode {self.fault_inject!r}; choose from {', '.join(faults.FAULT_MODES)}")

    def to_json(self):
        return {
            "constructions": [c.to_json() for c in self.constructions],
            "trials": int(self.trials),
            "seed": int(self.seed),
            "policy": policy_to_json(self.policy),
            "suites": list(self.suites),
            "fault_inject": self.fault_inject,
        }

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise UsageError("config must be a JSON object")
        known = {"constructions", "trials", "seed", "policy", "suites", "fault_inject"}
        extra = set(obj) - known
        if extra:
            raise UsageError(f"unknown config keys: {', '.join(sorted(extra))}")
        kwargs = {}
        try:
            if "constructions" in obj:
                kwargs["constructions"] = [ms.module_descriptor_from_json(c) for c in obj["constructions"]]
        except StructuralError as exc:
            raise UsageError(str(exc)) from exc
        for key in ("trials", "seed", "fault_inject"):
            if key in obj:
                kwargs[key] = obj[key]
        if "suites" in obj:
            if not isinstance(obj["suites"], list):
                raise UsageError("suites must be a list")
            kwargs["suites"] = tuple(obj["suites"])
        if "policy" in obj:
            kwargs["policy"] = policy_from_json(obj["policy"])
        return cls(**kwargs)


def policy_to_json(policy):
    return {"tol_eq": policy.tol_eq, "tol_pos": policy.tol_pos, "tol_opt": policy.tol_opt}


def policy_from_json(obj):
    if not isinstance(obj, dict) or set(obj) - {"tol_eq", "tol_pos", "tol_opt"}:
        raise UsageError(f"policy must be an object with tol_eq, tol_pos, tol_opt: {obj!r}")
    try:
        return NumericPolicy(**{k: float(v) for k, v in obj.items()})
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


# -- reports -------------------------------------------------------------------

@dataclass
class SuiteResult:
    suite: str
    construction: str
    report: VerificationReport

    @property
    def mandatory(self):
        return self.suite not in NON_MANDATORY

    @property
    def status(self):
        if self.report.skipped:
            return "skipped"
        return "pass" if self.report.passed else "fail"

    def to_json(self):
        return {"suite": self.suite, "construction": self.construction, "status": self.status,
                "mandatory": self.mandatory, "report": self.report.to_json()}


@dataclass
class RunReport:
    config: SuiteConfig
    results: list
    timing: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(r.report.passed for r in self.results if r.mandatory)

    @property
    def overall(self):
        return "pass" if self.passed else "fail"

    def failing(self):
        return [(r.suite, r.construction) for r in self.results if r.status == "fail"]

    def comparable(self):
        """Everything except wall-clock timing."""
        return {
            "version": version(),
            "seed": int(self.config.seed),
            "trials": int(self.config.trials),
            "fault_inject": self.config.fault_inject,
            "policy": policy_to_json(self.config.policy),
            "overall": self.overall,
            "suites": [r.to_json() for r in self.results],
        }

    def to_json(self, timing=True):
        out = self.comparable()
        if timing:
            out["timing"] = {k: round(v, 6) for k, v in self.timing.items()}
        return out

    def dumps(self, timing=True):
        return json.dumps(self.to_json(timing), sort_keys=True, indent=2, allow_nan=False)


# -- suites ----------------------------------------------------------------------

def _fullness(desc, n, seed, policy):
    full = ms.fullness_check(desc, max(n, 4 * ms.alg.sa_dimension(desc.algebra)), seed, policy)
    return check("fullness", [0.0 if full else -1.0], 0.0,
                 lambda i: {"construction": desc.to_json()},
                 note=None if full else "sampled [x, x] do not span the algebra")


def _orthogonality(desc, n, seed, policy):
    return combine("orthogonality", [orth.verify_thm31(desc, n, seed, policy),
                                     orth.verify_continuity(desc, n, seed, policy)])


def _operators(desc, n, seed, policy, fault=None):
    extra = ()
    if fault == "fiber_mixing":
        extra = (faults.mixing_operator(desc, trial_generator(seed, ("fiber_mixing", desc.label()), 0)),)
    return ops.verify_operators(desc, n, seed, policy, extra=extra)


def _counterexamples(desc, n, seed, policy):
    return combine("counterexamples", [orth.find_converse_witness(desc, n, seed, policy),
                                       orth.find_defect_witness(desc, n, seed, policy)])


RUNNERS = {
    "axioms": ms.verify_axioms,
    "norms": ms.verify_norm_properties,
    "finsler": ms.verify_finsler,
    "fullness": _fullness,
    "transport": ms.verify_transport,
    "orthogonality": _orthogonality,
    "thm34": orth.verify_thm34,
    "counterexamples": _counterexamples,
}


def _run_one(suite, desc, config):
    if suite == "operators":
        return _operators(desc, config.trials, config.seed, config.policy, config.fault_inject)
    return RUNNERS[suite](desc, config.trials, config.seed, config.policy)


def run_suites(config: SuiteConfig) -> RunReport:
    """Run every selected suite on every construction, sequentially.

    Each trial draws from its own counter-based stream, so results do not
    depend on execution order.  When a construction fails the axioms suite
    the remaining suites on it are reported as skipped, since they assume a
    valid C*-s.i.p.
    """
    results, timing = [], {}
    order = [s for s in SUITES if s in config.suites]
    for desc in config.constructions:
        target = desc if config.fault_inject is None else faults.inject(desc, config.fault_inject)
        label = target.label()
        broken = False
        for suite in order:
            if broken:
                rep = skipped(suite, "axioms failed on this construction")
            else:
                t0 = time.perf_counter()
                rep = _run_one(suite, target, config)
                timing[f"{suite}:{label}"] = time.perf_counter() - t0
                if suite == "axioms" and not rep.passed:
                    broken = True
            results.append(SuiteResult(suite, label, rep))
    return RunReport(config, results, timing)


def find_counterexamples(config: SuiteConfig) -> RunReport:
    """Only the counterexample searches; witnesses are reported, never asserted."""
    return run_suites(replace(config, suites=("counterexamples",)))

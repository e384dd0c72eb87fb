"""Deliberately broken constructions used as negative controls.

Each mode is aimed at one suite:

``sign_flip``       pairing negated, so positivity fails (axioms).
``broken_action``   ``x . a`` replaced by ``x . a*`` (axioms).
``fiber_mixing``    a dense coordinate map that ignores the module action (operators).
``non_isometric``   the transport isomorphism scaled by 2 (transport).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algebra as alg
from . import module_sip as ms
from . import operators as ops
from .errors import StructuralError

FAULT_MODES = ("sign_flip", "broken_action", "fiber_mixing", "non_isometric")
TARGET_SUITE = {
    "sign_flip": "axioms",
    "broken_action": "axioms",
    "fiber_mixing": "operators",
    "non_isometric": "transport",
}


@dataclass(frozen=True)
class _Wrapped:
    inner: object

    @property
    def algebra(self):
        return self.inner.algebra

    @property
    def coord_count(self):
        return self.inner.coord_count

    @property
    def conjugate_symmetric(self):
        return self.inner.conjugate_symmetric

    def from_coords(self, z):
        return self.inner.from_coords(z)

    def coords(self, p):
        return self.inner.coords(p)

    def zero(self, batch_shape=()):
        return self.inner.zero(batch_shape)

    def batch_shape(self, p):
        return self.inner.batch_shape(p)

    def scale(self, p, lam):
        return self.inner.scale(p, lam)

    def act(self, p, a):
        return self.inner.act(p, a)

    def csip(self, p, q):
        return self.inner.csip(p, q)

    def validate(self, p):
        self.inner.validate(p)

    def payload_to_json(self, p):
        return self.inner.payload_to_json(p)

    def payload_from_json(self, obj):
        return self.inner.payload_from_json(obj)


@dataclass(frozen=True)
class SignFlipped(_Wrapped):
    """``[x, y] -> -[x, y]``."""

    def csip(self, p, q):
        return alg.scalar_mul(-1.0, self.inner.csip(p, q))

    def label(self):
        return f"sign_flip[{self.inner.label()}]"

    def to_json(self):
        return {"kind": "sign_flip", "inner": self.inner.to_json()}


@dataclass(frozen=True)
class BrokenAction(_Wrapped):
    """``x . a -> x . a*``."""

    def act(self, p, a):
        return self.inner.act(p, alg.star(a))

    def label(self):
        return f"broken_action[{self.inner.label()}]"

    def to_json(self):
        return {"kind": "broken_action", "inner": self.inner.to_json()}


class ScaledIso:
    """``psi -> factor * psi`` with the true inverse kept: multiplicative and
    isometric checks fail while the transported pairing stays valid."""

    def __init__(self, inner, factor=2.0):
        self.inner = inner
        self.factor = float(factor)

    def __eq__(self, other):
        return isinstance(other, ScaledIso) and self.inner == other.inner and self.factor == other.factor

    def __hash__(self):
        return hash((ScaledIso, self.inner, self.factor))

    def check_domain(self, desc):
        self.inner.check_domain(desc)

    def codomain(self, desc):
        return self.inner.codomain(desc)

    def apply(self, a):
        return alg.scalar_mul(self.factor, self.inner.apply(a))

    def inverse(self, b):
        return self.inner.inverse(b)

    def label(self):
        return f"scaled({self.factor:g},{self.inner.label()})"

    def to_json(self):
        return {"kind": "scaled", "factor": self.factor, "inner": self.inner.to_json()}


@dataclass(frozen=True, eq=False)
class FiberMixing:
    """``x -> from_coords(M coords(x))`` for a dense random ``M``; bounded but not A-linear."""

    domain: object
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        n = self.domain.coord_count
        if m.shape != (n, n):
            raise StructuralError(f"mixing matrix must be {n}x{n}, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def codomain(self):
        return self.domain

    def apply_payload(self, p):
        z = self.domain.coords(p)
        return self.domain.from_coords(np.einsum("ij,...j->...i", self.matrix, z))

    def exact_norm(self):
        return None

    def label(self):
        return "fiber_mixing"

    def to_json(self):
        return {"kind": "fiber_mixing", "domain": self.domain.to_json(),
                "matrix": alg.complex_to_json(self.matrix)}


def mixing_operator(desc, rng):
    n = desc.coord_count
    m = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
    return FiberMixing(desc, m)


def _rescale_isos(desc):
    if isinstance(desc, ms.Transported):
        return ms.Transported(_rescale_isos(desc.base), ScaledIso(desc.iso))
    if isinstance(desc, ms.DirectSumModule):
        return ms.DirectSumModule(tuple(_rescale_isos(p) for p in desc.parts))
    return desc


def inject(desc, mode):
    """The faulty variant of a construction (``fiber_mixing`` leaves it unchanged)."""
    if mode == "sign_flip":
        return SignFlipped(desc)
    if mode == "broken_action":
        return BrokenAction(desc)
    if mode == "non_isometric":
        return _rescale_isos(desc)
    if mode == "fiber_mixing":
        return desc
    raise StructuralError(f"unknown fault mode {mode!r}; choose from {', '.join(FAULT_MODES)}")


ms.MODULE_KINDS["sign_flip"] = lambda obj: SignFlipped(ms.module_descriptor_from_json(obj["inner"]))
ms.MODULE_KINDS["broken_action"] = lambda obj: BrokenAction(ms.module_descriptor_from_json(obj["inner"]))
ms.ISO_KINDS["scaled"] = lambda obj: ScaledIso(ms.iso_from_json(obj["inner"]), obj["factor"])
ops.OPERATOR_KINDS["fiber_mixing"] = lambda obj: FiberMixing(
    ms.module_descriptor_from_json(obj["domain"]), alg.complex_from_json(obj["matrix"]))

"""Semi-inner-product modules over finite-dimensional C*-algebras.

Constructions
-------------
``Bundle(fibers)``
    Sections of a bundle of classical s.i.p. spaces over a finite set.  The
    algebra is ``Functions(len(fibers))``, acting by pointwise scaling, and
    the pairing is computed fiber by fiber.
``MatrixSelf(n)``
    ``Matrices(n)`` as a module over itself with ``[x, y] = x* y``.
``DirectSumModule(parts)``
    Blockwise action of the direct sum of the part algebras.
``Transported(base, iso)``
    The base module viewed over the codomain of a *-isomorphism ``psi``:
    ``[x, y] = psi([x, y]_base)`` and ``x . psi(a) = x . a``.

Payloads are arrays (or tuples of arrays) whose leading axes may be batch
axes, in the same way as :class:`~cstar_sip.algebra.AlgebraElement`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import algebra as alg
from .algebra import DEFAULT_POLICY, AlgebraElement, Functions, Matrices
from .errors import DomainError, StructuralError
from .report import check, combine, skipped
from .rng import split_columns, trial_normals
from .sip_classical import Hilbert, LpGiles, SipVector


def _tree_map(fn, *trees):
    if isinstance(trees[0], tuple):
        return tuple(_tree_map(fn, *subs) for subs in zip(*trees))
    return fn(*trees)


def _tree_leaves(tree):
    if isinstance(tree, tuple):
        return [leaf for sub in tree for leaf in _tree_leaves(sub)]
    return [tree]


def _concat_last(arrays):
    batch = np.broadcast_shapes(*(a.shape[:-1] for a in arrays))
    return np.concatenate([np.broadcast_to(a, batch + a.shape[-1:]) for a in arrays], axis=-1)


def _lift(lam, core_ndim):
    lam = np.asarray(lam)
    if lam.ndim == 0:
        return lam
    return lam.reshape(lam.shape + (1,) * core_ndim)


# -- *-isomorphisms -----------------------------------------------------------

@dataclass(frozen=True)
class PermuteOmega:
    """``psi(a)[i] = a[perm[i]]`` on ``Functions(m)`` (0-based permutation)."""

    perm: tuple

    def __post_init__(self):
        perm = tuple(int(i) for i in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise StructuralError(f"not a permutation of 0..{len(perm) - 1}: {perm}")
        object.__setattr__(self, "perm", perm)

    @cached_property
    def _inverse(self):
        return tuple(int(i) for i in np.argsort(self.perm))

    def check_domain(self, desc):
        if desc != Functions(len(self.perm)):
            raise StructuralError(f"a permutation of {len(self.perm)} points cannot act on {alg.describe(desc)}")

    def codomain(self, desc):
        return desc

    def apply(self, a):
        return AlgebraElement(a.descriptor, [a.blocks[0][..., list(self.perm)]])

    def inverse(self, b):
        return AlgebraElement(b.descriptor, [b.blocks[0][..., list(self._inverse)]])

    def label(self):
        return "perm(" + ",".join(map(str, self.perm)) + ")"

    def to_json(self):
        return {"kind": "permute", "perm": list(self.perm)}


class UnitaryConj:
    """``psi(a) = u a u*`` on ``Matrices(n)``."""

    def __init__(self, u, tol=1e-9):
        u = np.array(u, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise StructuralError("u must be a square matrix")
        if np.linalg.norm(u.conj().T @ u - np.eye(len(u)), 2) > tol:
            raise StructuralError("u is not unitary")
        u.setflags(write=False)
        self.u = u

    def __eq__(self, other):
        return isinstance(other, UnitaryConj) and np.array_equal(self.u, other.u)

    def __hash__(self):
        return hash(self.u.tobytes())

    def __repr__(self):
        return f"UnitaryConj(n={len(self.u)})"

    def check_domain(self, desc):
        if desc != Matrices(len(self.u)):
            raise StructuralError(f"a {len(self.u)}x{len(self.u)} unitary cannot act on {alg.describe(desc)}")

    def codomain(self, desc):
        return desc

    def apply(self, a):
        return AlgebraElement(a.descriptor, [self.u @ a.blocks[0] @ self.u.conj().T])

    def inverse(self, b):
        return AlgebraElement(b.descriptor, [self.u.conj().T @ b.blocks[0] @ self.u])

    def label(self):
        return f"unitary({len(self.u)})"

    def to_json(self):
        return {"kind": "unitary", "u": alg.complex_to_json(self.u)}


@dataclass(frozen=True)
class BlockIso:
    """Blockwise isomorphism of a direct sum; ``None`` parts are the identity."""

    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def check_domain(self, desc):
        if not isinstance(desc, alg.DirectSum) or len(desc.parts) != len(self.parts):
            raise StructuralError(f"block isomorphism with {len(self.parts)} parts cannot act on {alg.describe(desc)}")
        for iso, d in zip(self.parts, desc.parts):
            if iso is not None:
                iso.check_domain(d)

    def codomain(self, desc):
        return desc

    def _map(self, a, forward):
        parts = alg.split(a)
        out = []
        for iso, p in zip(self.parts, parts):
            if iso is None:
                out.append(p)
            else:
                out.append(iso.apply(p) if forward else iso.inverse(p))
        return alg.join(a.descriptor, out)

    def apply(self, a):
        return self._map(a, True)

    def inverse(self, b):
        return self._map(b, False)

    def label(self):
        return "blocks(" + ",".join("id" if i is None else i.label() for i in self.parts) + ")"

    def to_json(self):
        return {"kind": "blockwise", "parts": [None if i is None else i.to_json() for i in self.parts]}


def random_unitary(n, rng):
    """Haar-distributed unitary via QR with the phase correction."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def iso_from_json(obj):
    if obj is None:
        return None
    kind = obj.get("kind")
    if kind == "permute":
        return PermuteOmega(tuple(obj["perm"]))
    if kind == "unitary":
        return UnitaryConj(alg.complex_from_json(obj["u"]))
    if kind == "blockwise":
        return BlockIso(tuple(iso_from_json(p) for p in obj["parts"]))
    if kind in ISO_KINDS:
        return ISO_KINDS[kind](obj)
    raise StructuralError(f"unknown isomorphism kind: {kind!r}")


# -- module descriptors -------------------------------------------------------

@dataclass(frozen=True)
class Bundle:
    """Sections of a bundle of classical s.i.p. spaces over ``len(fibers)`` points."""

    fibers: tuple

    def __post_init__(self):
        fibers = tuple(self.fibers)
        if not fibers:
            raise StructuralError("a bundle needs at least one fiber")
        for f in fibers:
            if not isinstance(f, (Hilbert, LpGiles)):
                raise StructuralError(f"not a s.i.p. space descriptor: {f!r}")
        object.__setattr__(self, "fibers", fibers)

    @cached_property
    def algebra(self):
        return Functions(len(self.fibers))

    @cached_property
    def coord_count(self):
        return sum(f.d for f in self.fibers)

    @property
    def conjugate_symmetric(self):
        return all(isinstance(f, Hilbert) or f.p == 2 for f in self.fibers)

    def label(self):
        return "bundle[" + ",".join(f.label() for f in self.fibers) + "]"

    def from_coords(self, z):
        return tuple(split_columns(z, [f.d for f in self.fibers]))

    def coords(self, p):
        return _concat_last(list(p))

    def zero(self, batch_shape=()):
        return tuple(np.zeros(tuple(batch_shape) + (f.d,), dtype=complex) for f in self.fibers)

    def batch_shape(self, p):
        return p[0].shape[:-1]

    def scale(self, p, lam):
        lam = _lift(lam, 1)
        return tuple(lam * v for v in p)

    def act(self, p, a):
        blk = a.blocks[0]
        return tuple(v * blk[..., t, None] for t, v in enumerate(p))

    def csip(self, p, q):
        vals = [f.pairing(u, v) for f, u, v in zip(self.fibers, p, q)]
        return AlgebraElement(self.algebra, [np.stack(np.broadcast_arrays(*vals), axis=-1)])

    def validate(self, p):
        if not isinstance(p, tuple) or len(p) != len(self.fibers):
            raise StructuralError(f"{self.label()} needs one vector per fiber")
        batch = None
        for f, v in zip(self.fibers, p):
            if not isinstance(v, np.ndarray) or v.shape[-1:] != (f.d,):
                raise StructuralError(f"fiber vector does not match {f.label()}")
            if batch is None:
                batch = v.shape[:-1]
            elif v.shape[:-1] != batch:
                raise StructuralError("fiber vectors carry inconsistent batch shapes")

    def payload_to_json(self, p):
        return [alg.complex_to_json(v) for v in p]

    def payload_from_json(self, obj):
        return tuple(alg.complex_from_json(v) for v in obj)

    def to_json(self):
        return {"kind": "bundle", "fibers": [sip_space_to_json(f) for f in self.fibers]}


@dataclass(frozen=True)
class MatrixSelf:
    """``Matrices(n)`` as a module over itself, ``[x, y] = x* y``."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise StructuralError(f"MatrixSelf needs n >= 1, got {self.n!r}")

    @cached_property
    def algebra(self):
        return Matrices(self.n)

    @property
    def coord_count(self):
        return self.n * self.n

    conjugate_symmetric = True

    def label(self):
        return f"matrix_self({self.n})"

    def from_coords(self, z):
        return z.reshape(z.shape[:-1] + (self.n, self.n))

    def coords(self, p):
        return p.reshape(p.shape[:-2] + (-1,))

    def zero(self, batch_shape=()):
        return np.zeros(tuple(batch_shape) + (self.n, self.n), dtype=complex)

    def batch_shape(self, p):
        return p.shape[:-2]

    def scale(self, p, lam):
        return _lift(lam, 2) * p

    def act(self, p, a):
        return p @ a.blocks[0]

    def csip(self, p, q):
        return AlgebraElement(self.algebra, [np.swapaxes(p, -1, -2).conj() @ q])

    def validate(self, p):
        if not isinstance(p, np.ndarray) or p.shape[-2:] != (self.n, self.n):
            raise StructuralError(f"{self.label()} needs {self.n}x{self.n} matrices")

    def payload_to_json(self, p):
        return alg.complex_to_json(p)

    def payload_from_json(self, obj):
        return alg.complex_from_json(obj)

    def to_json(self):
        return {"kind": "matrix_self", "n": int(self.n)}


@dataclass(frozen=True)
class DirectSumModule:
    """Direct sum of modules over the direct sum of their algebras."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise StructuralError("a direct sum needs at least one part")
        object.__setattr__(self, "parts", parts)

    @cached_property
    def algebra(self):
        return alg.DirectSum(tuple(p.algebra for p in self.parts))

    @cached_property
    def coord_count(self):
        return sum(p.coord_count for p in self.parts)

    @property
    def conjugate_symmetric(self):
        return all(p.conjugate_symmetric for p in self.parts)

    def label(self):
        return "sum[" + ",".join(p.label() for p in self.parts) + "]"

    def from_coords(self, z):
        cols = split_columns(z, [p.coord_count for p in self.parts])
        return tuple(p.from_coords(c) for p, c in zip(self.parts, cols))

    def coords(self, p):
        pieces = [d.coords(q) for d, q in zip(self.parts, p)]
        return _concat_last(pieces)

    def zero(self, batch_shape=()):
        return tuple(p.zero(batch_shape) for p in self.parts)

    def batch_shape(self, p):
        return self.parts[0].batch_shape(p[0])

    def scale(self, p, lam):
        return tuple(d.scale(q, lam) for d, q in zip(self.parts, p))

    def act(self, p, a):
        return tuple(d.act(q, ai) for d, q, ai in zip(self.parts, p, alg.split(a)))

    def csip(self, p, q):
        return alg.join(self.algebra, [d.csip(u, v) for d, u, v in zip(self.parts, p, q)])

    def validate(self, p):
        if not isinstance(p, tuple) or len(p) != len(self.parts):
            raise StructuralError(f"{self.label()} needs one payload per part")
        for d, q in zip(self.parts, p):
            d.validate(q)

    def payload_to_json(self, p):
        return [d.payload_to_json(q) for d, q in zip(self.parts, p)]

    def payload_from_json(self, obj):
        return tuple(d.payload_from_json(q) for d, q in zip(self.parts, obj))

    def to_json(self):
        return {"kind": "direct_sum", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True)
class Transported:
    """A module carried along a *-isomorphism of its algebra.

    The pairing is ``psi`` applied to the base pairing at evaluation time, so
    ``psi([x, y]_base) == [x, y]`` holds exactly.
    """

    base: object
    iso: object

    def __post_init__(self):
        self.iso.check_domain(self.base.algebra)

    @cached_property
    def algebra(self):
        return self.iso.codomain(self.base.algebra)

    @property
    def coord_count(self):
        return self.base.coord_count

    @property
    def conjugate_symmetric(self):
        return self.base.conjugate_symmetric

    def label(self):
        return f"transported[{self.base.label()}|{self.iso.label()}]"

    def from_coords(self, z):
        return self.base.from_coords(z)

    def coords(self, p):
        return self.base.coords(p)

    def zero(self, batch_shape=()):
        return self.base.zero(batch_shape)

    def batch_shape(self, p):
        return self.base.batch_shape(p)

    def scale(self, p, lam):
        return self.base.scale(p, lam)

    def act(self, p, b):
        return self.base.act(p, self.iso.inverse(b))

    def csip(self, p, q):
        return self.iso.apply(self.base.csip(p, q))

    def validate(self, p):
        self.base.validate(p)

    def payload_to_json(self, p):
        return self.base.payload_to_json(p)

    def payload_from_json(self, obj):
        return self.base.payload_from_json(obj)

    def to_json(self):
        return {"kind": "transported", "base": self.base.to_json(), "iso": self.iso.to_json()}


MODULE_KINDS = {}
ISO_KINDS = {}


def sip_space_to_json(space):
    if isinstance(space, Hilbert):
        return {"kind": "hilbert", "d": int(space.d)}
    return {"kind": "lp", "d": int(space.d), "p": float(space.p)}


def sip_space_from_json(obj):
    kind = obj.get("kind")
    if kind == "hilbert":
        return Hilbert(int(obj["d"]))
    if kind == "lp":
        return LpGiles(int(obj["d"]), float(obj["p"]))
    raise StructuralError(f"unknown s.i.p. space kind: {kind!r}")


def module_descriptor_from_json(obj):
    try:
        kind = obj["kind"]
        if kind == "bundle":
            return Bundle(tuple(sip_space_from_json(f) for f in obj["fibers"]))
        if kind == "matrix_self":
            return MatrixSelf(int(obj["n"]))
        if kind == "direct_sum":
            return DirectSumModule(tuple(module_descriptor_from_json(p) for p in obj["parts"]))
        if kind == "transported":
            return Transported(module_descriptor_from_json(obj["base"]), iso_from_json(obj["iso"]))
        if kind in MODULE_KINDS:
            return MODULE_KINDS[kind](obj)
    except (KeyError, TypeError, AttributeError) as exc:
        raise StructuralError(f"malformed module descriptor: {obj!r}") from exc
    raise StructuralError(f"unknown module kind: {kind!r}")


def module_descriptor_to_json(desc):
    return desc.to_json()


# -- elements -------------------------------------------------------------------

class ModuleElement:
    """An element (or a stack of elements) of a C*-s.i.p. module.

    ``x + y``, ``x - y``, ``lam * x`` and ``x * a`` (right action of an
    algebra element ``a``) are supported.
    """

    __slots__ = ("descriptor", "payload")

    def __init__(self, descriptor, payload):
        self.descriptor = descriptor
        self.payload = payload

    @property
    def batch_shape(self):
        return self.descriptor.batch_shape(self.payload)

    def __getitem__(self, index):
        if not self.batch_shape:
            raise IndexError("element is not batched")
        return ModuleElement(self.descriptor, _tree_map(lambda v: v[index], self.payload))

    def __len__(self):
        shape = self.batch_shape
        if not shape:
            raise TypeError("element is not batched")
        return shape[0]

    def _same(self, other):
        if not isinstance(other, ModuleElement):
            raise StructuralError(f"not a module element: {other!r}")
        if other.descriptor is not self.descriptor and other.descriptor != self.descriptor:
            raise StructuralError(
                f"module mismatch: {self.descriptor.label()} vs {other.descriptor.label()}")

    def __add__(self, other):
        self._same(other)
        return ModuleElement(self.descriptor, _tree_map(np.add, self.payload, other.payload))

    def __sub__(self, other):
        self._same(other)
        return ModuleElement(self.descriptor, _tree_map(np.subtract, self.payload, other.payload))

    def __neg__(self):
        return ModuleElement(self.descriptor, _tree_map(np.negative, self.payload))

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return module_action(self.descriptor, self, other)
        return ModuleElement(self.descriptor, self.descriptor.scale(self.payload, other))

    def __rmul__(self, other):
        return ModuleElement(self.descriptor, self.descriptor.scale(self.payload, other))

    def __truediv__(self, other):
        return ModuleElement(self.descriptor, self.descriptor.scale(self.payload, 1.0 / np.asarray(other)))

    def coords(self):
        return self.descriptor.coords(self.payload)

    def sections(self):
        """Fiber vectors of a single bundle section."""
        if not isinstance(self.descriptor, Bundle) or self.batch_shape:
            raise StructuralError("sections() needs a single Bundle element")
        return [SipVector(f, v) for f, v in zip(self.descriptor.fibers, self.payload)]

    def __repr__(self):
        return f"ModuleElement({self.descriptor.label()}, batch={self.batch_shape})"


def module_element(desc, payload) -> ModuleElement:
    """Validated element from a payload.

    Bundle payloads are sequences of fiber vectors (``SipVector`` or array
    like), MatrixSelf payloads are matrices, direct sums take one payload per
    part and transported modules take a base payload.
    """
    p = _normalize_payload(desc, payload)
    desc.validate(p)
    for leaf in _tree_leaves(p):
        if not np.all(np.isfinite(leaf)):
            raise DomainError("module elements must have finite entries")
    return ModuleElement(desc, p)


def _normalize_payload(desc, payload):
    if isinstance(desc, Bundle):
        out = []
        for f, v in zip(desc.fibers, payload):
            if isinstance(v, SipVector):
                if v.space != f:
                    raise StructuralError(f"vector of {v.space.label()} placed in fiber {f.label()}")
                v = v.coords
            out.append(np.array(v, dtype=complex))
        if len(out) != len(desc.fibers):
            raise StructuralError(f"{desc.label()} needs {len(desc.fibers)} fiber vectors")
        return tuple(out)
    if isinstance(desc, MatrixSelf):
        return np.array(payload, dtype=complex)
    if isinstance(desc, DirectSumModule):
        if len(payload) != len(desc.parts):
            raise StructuralError(f"{desc.label()} needs {len(desc.parts)} parts")
        return tuple(_normalize_payload(d, q) for d, q in zip(desc.parts, payload))
    if isinstance(desc, Transported):
        return _normalize_payload(desc.base, payload)
    inner = getattr(desc, "inner", None)
    if inner is not None:
        return _normalize_payload(inner, payload)
    raise StructuralError(f"unknown module descriptor {desc!r}")


def zero_element(desc, batch_shape=()) -> ModuleElement:
    return ModuleElement(desc, desc.zero(batch_shape))


def from_coords(desc, z) -> ModuleElement:
    return ModuleElement(desc, desc.from_coords(np.asarray(z, dtype=complex)))


def random_module_element(desc, rng, size=()) -> ModuleElement:
    """I.i.d. standard complex Gaussian coordinates."""
    size = (size,) if isinstance(size, (int, np.integer)) else tuple(size)
    n = desc.coord_count
    z = (rng.standard_normal(size + (n,)) + 1j * rng.standard_normal(size + (n,))) / np.sqrt(2.0)
    return from_coords(desc, z)


def stack_elements(elements) -> ModuleElement:
    elements = list(elements)
    desc = elements[0].descriptor
    for e in elements[1:]:
        elements[0]._same(e)
    return ModuleElement(desc, _tree_map(lambda *vs: np.stack(vs), *(e.payload for e in elements)))


def element_to_json(x: ModuleElement) -> dict:
    if x.batch_shape:
        raise StructuralError("only single elements have a literal form")
    return {"descriptor": x.descriptor.to_json(), "payload": x.descriptor.payload_to_json(x.payload)}


def element_from_json(obj) -> ModuleElement:
    desc = module_descriptor_from_json(obj["descriptor"])
    return module_element(desc, desc.payload_from_json(obj["payload"]))


# -- operations ---------------------------------------------------------------

def _member(desc, x):
    if x.descriptor is not desc and x.descriptor != desc:
        raise StructuralError(f"element of {x.descriptor.label()} used with {desc.label()}")


def csip(desc, x, y) -> AlgebraElement:
    """The algebra-valued semi-inner product ``[x, y]``."""
    _member(desc, x)
    _member(desc, y)
    return desc.csip(x.payload, y.payload)


def module_action(desc, x, a) -> ModuleElement:
    """Right action ``x . a``."""
    _member(desc, x)
    if a.descriptor != desc.algebra:
        raise StructuralError(
            f"{alg.describe(a.descriptor)} does not act on {desc.label()} (algebra {alg.describe(desc.algebra)})")
    return ModuleElement(desc, desc.act(x.payload, a))


def triple_norm(desc, x):
    """``||[x, x]||^(1/2)``."""
    _member(desc, x)
    return np.sqrt(alg.cstar_norm(desc.csip(x.payload, x.payload)))


def rho(desc, x, policy=DEFAULT_POLICY) -> AlgebraElement:
    """``[x, x]^(1/2)``, the algebra-valued (Finsler / cone) norm."""
    return alg.sqrt_positive(csip(desc, x, x), policy)


def hermitian_defect(desc, x, y):
    """``||[x, y] - [y, x]*||``; zero exactly for Hilbert C*-modules."""
    return alg.cstar_norm(csip(desc, x, y) - alg.star(csip(desc, y, x)))


def _norm_payload(desc, p):
    return np.sqrt(alg.positive_norm(desc.csip(p, p)))


def _rho_payload(desc, p):
    # clipped spectral root; callers that need the domain check use rho()
    return alg.spectral_apply(desc.csip(p, p), lambda w: np.sqrt(np.maximum(w, 0.0)))


def _euclid(desc, p):
    return np.linalg.norm(desc.coords(p), axis=-1)


def _rel(diff, scale):
    return alg.cstar_norm(diff) / (1.0 + scale)


# -- fullness ---------------------------------------------------------------

def self_adjoint_coords(a: AlgebraElement) -> np.ndarray:
    """Real coordinates of the self-adjoint part, ``sa_dimension`` per element."""
    pieces = []
    batch = a.batch_shape
    for leaf, b in zip(alg.leaves(a.descriptor), a.blocks):
        if isinstance(leaf, Functions):
            pieces.append(b.real)
        else:
            h = (b + np.swapaxes(b, -1, -2).conj()) / 2
            iu = np.triu_indices(leaf.n, 1)
            pieces.append(np.diagonal(h, axis1=-2, axis2=-1).real)
            pieces.append(h[..., iu[0], iu[1]].real * np.sqrt(2))
            pieces.append(h[..., iu[0], iu[1]].imag * np.sqrt(2))
    return np.concatenate([p.reshape(batch + (-1,)) for p in pieces], axis=-1)


def span_rank(elements: AlgebraElement, policy=DEFAULT_POLICY) -> int:
    """Rank of the real span of a batch of self-adjoint algebra elements."""
    m = np.atleast_2d(self_adjoint_coords(elements))
    sv = np.linalg.svd(m, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > policy.tol_eq * sv[0]))


def fullness_of(desc, xs: ModuleElement, policy=DEFAULT_POLICY) -> bool:
    """Whether ``{[x, x] : x in xs}`` spans the algebra."""
    _member(desc, xs)
    if not xs.batch_shape:
        xs = ModuleElement(desc, _tree_map(lambda v: v[None], xs.payload))
    return span_rank(desc.csip(xs.payload, xs.payload), policy) == alg.sa_dimension(desc.algebra)


def fullness_check(desc, sample_count, seed, policy=DEFAULT_POLICY) -> bool:
    """Seeded fullness test: do sampled ``[x, x]`` span the algebra?"""
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    z = trial_normals(seed, ("fullness", desc.label()), sample_count, desc.coord_count)
    return fullness_of(desc, from_coords(desc, z), policy)


# -- verifiers ----------------------------------------------------------------

def _draw(desc, seed, labels, trials, layout):
    """Batched draws for a check; ``layout`` entries are 'module', 'algebra' or 'scalar'."""
    sizes = {"module": desc.coord_count, "algebra": alg.coord_count(desc.algebra), "scalar": 1}
    z = trial_normals(seed, labels, trials, sum(sizes[k] for k in layout))
    out = []
    for kind, cols in zip(layout, split_columns(z, [sizes[k] for k in layout])):
        if kind == "module":
            out.append(desc.from_coords(cols))
        elif kind == "algebra":
            out.append(alg.from_coords(desc.algebra, cols))
        else:
            out.append(cols[:, 0])
    return out


def _literal(desc, payload, i):
    return {"descriptor": desc.to_json(),
            "payload": desc.payload_to_json(_tree_map(lambda v: v[i], payload))}


def _alg_literal(a, i):
    return alg.element_to_json(a[i])


def _witness(desc, i, modules=(), algebras=(), scalars=()):
    out = {"construction": desc.to_json(), "trial": int(i)}
    for name, p in modules:
        out[name] = _literal(desc, p, i)
    for name, a in algebras:
        out[name] = _alg_literal(a, i)
    for name, s in scalars:
        out[name] = [float(np.real(s[i])), float(np.imag(s[i]))]
    return out


def verify_axioms(desc, sample_count, seed, policy=DEFAULT_POLICY):
    """Check the four C*-s.i.p. axioms on seeded random samples.

    Sub-checks: positivity and definiteness of ``[x, x]``, linearity in the
    second argument, both module-action identities, the operator
    Cauchy-Schwarz inequality ``|[y, x]|^2 <= ||[y, y]|| [x, x]``, its scalar
    consequence, and ``[lam x, y] = conj(lam) [x, y]``.
    """
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    X, Y, Y2, A, al, be = _draw(desc, seed, ("axioms", desc.label()), sample_count,
                                ["module", "module", "module", "algebra", "scalar", "scalar"])
    cs = desc.csip
    xx, yy, xy, xy2, yx = cs(X, X), cs(Y, Y), cs(X, Y), cs(X, Y2), cs(Y, X)
    nxx, nyy, nxy = alg.cstar_norm(xx), alg.cstar_norm(yy), alg.cstar_norm(xy)
    na = alg.cstar_norm(A)

    def wit(*names):
        table = {"x": X, "y": Y, "y2": Y2}
        return lambda i: _witness(desc, i, [(n, table[n]) for n in names], [("a", A)],
                                  [("alpha", al), ("beta", be)])

    checks = []
    checks.append(check("positivity", alg.positivity_margin(xx), policy.tol_pos, wit("x")))

    ratio = nxx / np.maximum(_euclid(desc, X) ** 2, 1e-300)
    zero_pairing = float(alg.cstar_norm(cs(desc.zero(), desc.zero())))
    checks.append(check("definiteness", ratio, policy.tol_eq, wit("x"), threshold=policy.tol_eq,
                        note="[x,x] != 0 for sampled x != 0"))
    checks.append(check("zero_pairing", [-zero_pairing], 0.0, note="[0,0] = 0"))

    lin_arg = _tree_map(np.add, desc.scale(Y, al), desc.scale(Y2, be))
    lhs = cs(X, lin_arg)
    rhs = alg.scalar_mul(al, xy) + alg.scalar_mul(be, xy2)
    scale = np.abs(al) * nxy + np.abs(be) * alg.cstar_norm(xy2)
    checks.append(check("linearity", -_rel(lhs - rhs, scale), policy.tol_eq, wit("x", "y", "y2")))

    lhs = cs(X, desc.act(Y, A))
    checks.append(check("module_action_right", -_rel(lhs - xy * A, nxy * na), policy.tol_eq, wit("x", "y")))
    lhs = cs(desc.act(X, A), Y)
    checks.append(check("module_action_left", -_rel(lhs - alg.star(A) * xy, nxy * na), policy.tol_eq,
                        wit("x", "y")))

    abs2 = alg.star(yx) * yx
    bound = alg.scalar_mul(nyy, xx)
    checks.append(check("cauchy_schwarz_operator", alg.order_margin(abs2, bound), policy.tol_pos,
                        wit("x", "y")))
    nyx = alg.cstar_norm(yx)
    checks.append(check("cauchy_schwarz_scalar", (nyy * nxx - nyx ** 2) / (1.0 + nyy * nxx),
                        policy.tol_eq, wit("x", "y")))

    lhs = cs(desc.scale(X, al), Y)
    checks.append(check("scalar_compatibility", -_rel(lhs - alg.scalar_mul(np.conj(al), xy), np.abs(al) * nxy),
                        policy.tol_eq, wit("x", "y")))
    return combine("axioms", checks)


def verify_norm_properties(desc, sample_count, seed, policy=DEFAULT_POLICY):
    """Norm axioms for ``||x|| = ||[x, x]||^(1/2)``, ``||xa|| <= ||x|| ||a||``
    and the cubic identity ``||x [x, x]|| = ||x||^3``."""
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    X, Y, A, lam = _draw(desc, seed, ("norms", desc.label()), sample_count,
                         ["module", "module", "algebra", "scalar"])
    nx, ny = _norm_payload(desc, X), _norm_payload(desc, Y)

    def wit(i):
        return _witness(desc, i, [("x", X), ("y", Y)], [("a", A)], [("lambda", lam)])

    checks = []
    nsum = _norm_payload(desc, _tree_map(np.add, X, Y))
    checks.append(check("triangle", (nx + ny - nsum) / (1.0 + nx + ny), policy.tol_eq, wit))

    nlam = _norm_payload(desc, desc.scale(X, lam))
    checks.append(check("homogeneity", -np.abs(nlam - np.abs(lam) * nx) / (1.0 + np.abs(lam) * nx),
                        policy.tol_eq, wit))

    ratio = nx / np.maximum(_euclid(desc, X), 1e-300)
    zero_norm = float(_norm_payload(desc, desc.zero()))
    checks.append(check("separation", ratio, policy.tol_eq, wit, threshold=policy.tol_eq))
    checks.append(check("zero_norm", [-zero_norm], 0.0, note="|||0||| = 0"))

    na = alg.cstar_norm(A)
    nxa = _norm_payload(desc, desc.act(X, A))
    checks.append(check("submultiplicativity", (nx * na - nxa) / (1.0 + nx * na), policy.tol_eq, wit))

    xx = desc.csip(X, X)
    ncube = _norm_payload(desc, desc.act(X, xx))
    checks.append(check("cubic_identity", -np.abs(ncube - nx ** 3) / (1.0 + nx ** 3), policy.tol_eq, wit))
    return combine("norms", checks)


def verify_finsler(desc, sample_count, seed, policy=DEFAULT_POLICY):
    """Pre-Finsler structure of ``rho(x) = [x, x]^(1/2)``.

    Always checked: ``rho(xa)^2 = a* rho(x)^2 a`` and ``||rho(x)|| = ||x||``.
    On commutative algebras additionally the operator triangle inequality
    ``rho(x + y) <= rho(x) + rho(y)`` and ``rho(lam x) = |lam| rho(x)``.
    """
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    X, Y, A, lam = _draw(desc, seed, ("finsler", desc.label()), sample_count,
                         ["module", "module", "algebra", "scalar"])

    def wit(i):
        return _witness(desc, i, [("x", X), ("y", Y)], [("a", A)], [("lambda", lam)])

    rx = _rho_payload(desc, X)
    rxa = _rho_payload(desc, desc.act(X, A))
    lhs = rxa * rxa
    rhs = alg.star(A) * (rx * rx) * A
    na, nrx = alg.cstar_norm(A), alg.cstar_norm(rx)
    checks = [check("finsler_identity", -_rel(lhs - rhs, na ** 2 * nrx ** 2), policy.tol_eq, wit)]

    nx = _norm_payload(desc, X)
    checks.append(check("rho_norm", -np.abs(nrx - nx) / (1.0 + nx), policy.tol_eq, wit))

    if alg.is_commutative(desc.algebra):
        ry = _rho_payload(desc, Y)
        rsum = _rho_payload(desc, _tree_map(np.add, X, Y))
        checks.append(check("operator_triangle", alg.order_margin(rsum, rx + ry), policy.tol_pos, wit))
        rlam = _rho_payload(desc, desc.scale(X, lam))
        checks.append(check("cone_homogeneity",
                            -_rel(rlam - alg.scalar_mul(np.abs(lam), rx), np.abs(lam) * nrx),
                            policy.tol_eq, wit))
    else:
        checks.append(skipped("operator_triangle", "non-commutative algebra"))
    return combine("finsler", checks)


def verify_transport(desc, sample_count, seed, policy=DEFAULT_POLICY, csip_tol=1e-12, norm_tol=1e-10):
    """Checks specific to ``Transported`` modules.

    ``psi`` must be a multiplicative, *-preserving, isometric bijection; the
    transported pairing must equal ``psi`` of the base pairing (``csip_tol``)
    and the module norm must be unchanged (``norm_tol``).
    """
    if not isinstance(desc, Transported):
        return skipped("transport", "not a transported module")
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    base, iso = desc.base, desc.iso
    X, Y, A, B = _draw(desc, seed, ("transport", desc.label()), sample_count,
                       ["module", "module", "algebra", "algebra"])

    def wit(i):
        return _witness(desc, i, [("x", X), ("y", Y)], [("a", A), ("b", B)])

    na, nb = alg.cstar_norm(A), alg.cstar_norm(B)
    pa, pb = iso.apply(A), iso.apply(B)
    checks = [
        check("iso_multiplicative", -_rel(iso.apply(A * B) - pa * pb, na * nb), policy.tol_eq, wit),
        check("iso_star", -_rel(iso.apply(alg.star(A)) - alg.star(pa), na), policy.tol_eq, wit),
        check("iso_isometric", -np.abs(alg.cstar_norm(pa) - na) / (1.0 + na), policy.tol_eq, wit),
        check("iso_inverse", -_rel(iso.apply(iso.inverse(B)) - B, nb), policy.tol_eq, wit),
    ]
    base_xy = base.csip(X, Y)
    checks.append(check("csip_identity",
                        -_rel(iso.apply(base_xy) - desc.csip(X, Y), alg.cstar_norm(base_xy)), csip_tol, wit))
    nb_x, nt_x = _norm_payload(base, X), _norm_payload(desc, X)
    checks.append(check("norm_preserved", -np.abs(nb_x - nt_x) / (1.0 + nb_x), norm_tol, wit))
    lhs = desc.act(X, pa)
    rhs = base.act(X, A)
    diff = np.linalg.norm(desc.coords(_tree_map(np.subtract, lhs, rhs)), axis=-1)
    checks.append(check("action_identity", -diff / (1.0 + _euclid(desc, X) * na), policy.tol_eq, wit))
    return combine("transport", checks)

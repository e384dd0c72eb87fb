"""Finite-dimensional C*-algebras.

Three building blocks are supported: ``Functions(m)``, the bounded functions
on an m-point set (pointwise operations, sup norm); ``Matrices(n)``, the full
n x n complex matrix algebra (operator norm); and ``DirectSum(parts)``, with
blockwise operations and the max of the block norms.

An :class:`AlgebraElement` stores one array per leaf block of its descriptor
(direct sums are flattened).  A ``Functions(m)`` block has trailing shape
``(m,)`` and a ``Matrices(n)`` block has trailing shape ``(n, n)``.  Any
leading axes are batch axes: a batched element is a stack of independent
elements and every operation below acts on the stack elementwise.  The
verifiers rely on this to run thousands of trials in a few vectorized calls.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from numbers import Number

import numpy as np

from .errors import DomainError, StructuralError


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerances used by the predicates and verifiers.

    ``tol_eq`` is a relative equality tolerance, ``tol_pos`` the allowed
    negative eigenvalue slack relative to ``1 + norm`` and ``tol_opt`` the
    step size at which the orthogonality optimizer stops.
    """

    tol_eq: float = 1e-9
    tol_pos: float = 1e-9
    tol_opt: float = 1e-8

    def __post_init__(self):
        for name in ("tol_eq", "tol_pos", "tol_opt"):
            value = getattr(self, name)
            if not (value >= 0 and np.isfinite(value)):
                raise ValueError(f"{name} must be a finite nonnegative number, got {value!r}")


DEFAULT_POLICY = NumericPolicy()


# -- descriptors ------------------------------------------------------------

@dataclass(frozen=True)
class Functions:
    """Complex functions on an ``m``-point set."""

    m: int

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise StructuralError(f"Functions needs m >= 1, got {self.m!r}")


@dataclass(frozen=True)
class Matrices:
    """The algebra of ``n`` x ``n`` complex matrices."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise StructuralError(f"Matrices needs n >= 1, got {self.n!r}")


@dataclass(frozen=True)
class DirectSum:
    """Blockwise direct sum of algebras."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise StructuralError("DirectSum needs at least one part")
        for p in parts:
            if not isinstance(p, (Functions, Matrices, DirectSum)):
                raise StructuralError(f"not an algebra descriptor: {p!r}")
        object.__setattr__(self, "parts", parts)


AlgebraDescriptor = Functions | Matrices | DirectSum


@lru_cache(maxsize=None)
def leaves(desc) -> tuple:
    """Flattened tuple of the ``Functions``/``Matrices`` blocks of ``desc``."""
    if isinstance(desc, DirectSum):
        return tuple(leaf for part in desc.parts for leaf in leaves(part))
    if isinstance(desc, (Functions, Matrices)):
        return (desc,)
    raise StructuralError(f"not an algebra descriptor: {desc!r}")


def _leaf_size(leaf):
    return leaf.m if isinstance(leaf, Functions) else leaf.n * leaf.n


def _core_ndim(leaf):
    return 1 if isinstance(leaf, Functions) else 2


def _core_shape(leaf):
    return (leaf.m,) if isinstance(leaf, Functions) else (leaf.n, leaf.n)


def coord_count(desc) -> int:
    """Complex dimension of the algebra."""
    return sum(_leaf_size(leaf) for leaf in leaves(desc))


def sa_dimension(desc) -> int:
    """Real dimension of the self-adjoint part (equals the complex dimension)."""
    return coord_count(desc)


def is_commutative(desc) -> bool:
    return all(isinstance(l, Functions) or l.n == 1 for l in leaves(desc))


def describe(desc) -> str:
    if isinstance(desc, Functions):
        return f"C({desc.m})"
    if isinstance(desc, Matrices):
        return f"M{desc.n}"
    return "(" + " + ".join(describe(p) for p in desc.parts) + ")"


# -- elements ---------------------------------------------------------------

class AlgebraElement:
    """An element (or a stack of elements) of a finite-dimensional C*-algebra.

    Arithmetic operators are overloaded: ``a + b``, ``a - b``, ``a * b`` for the
    algebra product, ``lam * a`` for complex scalars.
    """

    __slots__ = ("descriptor", "blocks")

    def __init__(self, descriptor, blocks):
        self.descriptor = descriptor
        self.blocks = tuple(blocks)

    @property
    def batch_shape(self):
        leaf = leaves(self.descriptor)[0]
        return self.blocks[0].shape[:self.blocks[0].ndim - _core_ndim(leaf)]

    @property
    def data(self):
        """Nested payload mirroring the descriptor (lists for direct sums)."""
        blocks = iter(self.blocks)

        def build(desc):
            if isinstance(desc, DirectSum):
                return [build(p) for p in desc.parts]
            return next(blocks)

        return build(self.descriptor)

    def __getitem__(self, index):
        if not self.batch_shape:
            raise IndexError("element is not batched")
        return AlgebraElement(self.descriptor, [b[index] for b in self.blocks])

    def __len__(self):
        shape = self.batch_shape
        if not shape:
            raise TypeError("element is not batched")
        return shape[0]

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return scalar_mul(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        return scalar_mul(other, self)

    def __rmul__(self, other):
        return scalar_mul(other, self)

    def __truediv__(self, other):
        return scalar_mul(1.0 / np.asarray(other), self)

    def star(self):
        return star(self)

    def __repr__(self):
        return f"AlgebraElement({describe(self.descriptor)}, {self.data!r})"


def _check_same(a, b):
    if a.descriptor is not b.descriptor and a.descriptor != b.descriptor:
        raise StructuralError(
            f"algebra mismatch: {describe(a.descriptor)} vs {describe(b.descriptor)}")


def _validate_blocks(desc, blocks):
    lv = leaves(desc)
    if len(blocks) != len(lv):
        raise StructuralError(f"expected {len(lv)} blocks for {describe(desc)}, got {len(blocks)}")
    batch = None
    for leaf, b in zip(lv, blocks):
        core = _core_shape(leaf)
        if b.ndim < len(core) or b.shape[b.ndim - len(core):] != core:
            raise StructuralError(f"block of shape {b.shape} does not match {describe(leaf)}")
        this_batch = b.shape[:b.ndim - len(core)]
        if batch is None:
            batch = this_batch
        elif this_batch != batch:
            raise StructuralError("blocks carry inconsistent batch shapes")
        if not np.all(np.isfinite(b)):
            raise DomainError("algebra elements must have finite entries")


def element(desc, data) -> AlgebraElement:
    """Build a validated element from nested data.

    ``Functions(m)`` takes a length-m sequence, ``Matrices(n)`` an n x n
    nested sequence, ``DirectSum`` a list with one entry per part.
    """
    blocks = []

    def walk(d, payload):
        if isinstance(d, DirectSum):
            if len(payload) != len(d.parts):
                raise StructuralError(f"{describe(d)} needs {len(d.parts)} parts")
            for p, sub in zip(d.parts, payload):
                walk(p, sub)
        else:
            blocks.append(np.array(payload, dtype=complex))

    walk(desc, data)
    _validate_blocks(desc, blocks)
    return AlgebraElement(desc, blocks)


def from_blocks(desc, blocks) -> AlgebraElement:
    """Validated construction from a flat list of leaf blocks."""
    blocks = [np.asarray(b, dtype=complex) for b in blocks]
    _validate_blocks(desc, blocks)
    return AlgebraElement(desc, blocks)


def zeros(desc, batch_shape=()) -> AlgebraElement:
    return AlgebraElement(desc, [np.zeros(tuple(batch_shape) + _core_shape(l), dtype=complex)
                                 for l in leaves(desc)])


def identity(desc, batch_shape=()) -> AlgebraElement:
    blocks = []
    for leaf in leaves(desc):
        if isinstance(leaf, Functions):
            unit = np.ones(leaf.m, dtype=complex)
        else:
            unit = np.eye(leaf.n, dtype=complex)
        blocks.append(np.broadcast_to(unit, tuple(batch_shape) + unit.shape).copy())
    return AlgebraElement(desc, blocks)


def from_coords(desc, z) -> AlgebraElement:
    """Element(s) whose flattened coordinates are the last axis of ``z``."""
    z = np.asarray(z, dtype=complex)
    batch = z.shape[:-1]
    blocks = []
    start = 0
    for leaf in leaves(desc):
        size = _leaf_size(leaf)
        blocks.append(z[..., start:start + size].reshape(batch + _core_shape(leaf)))
        start += size
    if start != z.shape[-1]:
        raise StructuralError(f"{describe(desc)} has {start} coordinates, got {z.shape[-1]}")
    return AlgebraElement(desc, blocks)


def coords(a: AlgebraElement) -> np.ndarray:
    batch = a.batch_shape
    return np.concatenate([b.reshape(batch + (-1,)) for b in a.blocks], axis=-1)


def random_element(desc, rng, size=()) -> AlgebraElement:
    """I.i.d. standard complex Gaussian coordinates."""
    size = (size,) if isinstance(size, (int, np.integer)) else tuple(size)
    n = coord_count(desc)
    z = (rng.standard_normal(size + (n,)) + 1j * rng.standard_normal(size + (n,))) / np.sqrt(2.0)
    return from_coords(desc, z)


def split(a: AlgebraElement) -> list:
    """Components of a direct-sum element, one per part."""
    if not isinstance(a.descriptor, DirectSum):
        raise StructuralError("split needs a DirectSum element")
    out = []
    start = 0
    for part in a.descriptor.parts:
        k = len(leaves(part))
        out.append(AlgebraElement(part, a.blocks[start:start + k]))
        start += k
    return out


def join(desc, parts) -> AlgebraElement:
    """Inverse of :func:`split`."""
    if len(parts) != len(desc.parts):
        raise StructuralError(f"{describe(desc)} needs {len(desc.parts)} parts")
    blocks = []
    for d, p in zip(desc.parts, parts):
        if p.descriptor != d:
            raise StructuralError("part descriptor mismatch in join")
        blocks.extend(p.blocks)
    return AlgebraElement(desc, blocks)


def stack(elements) -> AlgebraElement:
    elements = list(elements)
    desc = elements[0].descriptor
    for e in elements[1:]:
        _check_same(elements[0], e)
    return AlgebraElement(desc, [np.stack(bs) for bs in zip(*(e.blocks for e in elements))])


# -- arithmetic -------------------------------------------------------------

def _lift(lam, leaf):
    lam = np.asarray(lam)
    if lam.ndim == 0:
        return lam
    return lam.reshape(lam.shape + (1,) * _core_ndim(leaf))


def add(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    _check_same(a, b)
    return AlgebraElement(a.descriptor, [x + y for x, y in zip(a.blocks, b.blocks)])


def sub(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    _check_same(a, b)
    return AlgebraElement(a.descriptor, [x - y for x, y in zip(a.blocks, b.blocks)])


def scalar_mul(lam, a: AlgebraElement) -> AlgebraElement:
    """``lam * a``; ``lam`` may be an array matching the batch shape."""
    if not isinstance(lam, (Number, np.ndarray, np.generic)):
        raise StructuralError(f"not a scalar: {lam!r}")
    return AlgebraElement(a.descriptor,
                          [_lift(lam, leaf) * b for leaf, b in zip(leaves(a.descriptor), a.blocks)])


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    _check_same(a, b)
    out = []
    for leaf, x, y in zip(leaves(a.descriptor), a.blocks, b.blocks):
        out.append(x * y if isinstance(leaf, Functions) else x @ y)
    return AlgebraElement(a.descriptor, out)


def _adjoint(leaf, x):
    return x.conj() if isinstance(leaf, Functions) else np.swapaxes(x, -1, -2).conj()


def star(a: AlgebraElement) -> AlgebraElement:
    return AlgebraElement(a.descriptor,
                          [_adjoint(leaf, b) for leaf, b in zip(leaves(a.descriptor), a.blocks)])


def re(a: AlgebraElement) -> AlgebraElement:
    """Self-adjoint part ``(a + a*) / 2``."""
    return AlgebraElement(a.descriptor,
                          [(b + _adjoint(leaf, b)) / 2 for leaf, b in zip(leaves(a.descriptor), a.blocks)])


def _leaf_norm(leaf, b):
    if isinstance(leaf, Functions):
        return np.abs(b).max(axis=-1)
    if leaf.n == 1:
        return np.abs(b[..., 0, 0])
    return np.linalg.svd(b, compute_uv=False)[..., 0]


def cstar_norm(a: AlgebraElement):
    """C*-norm: sup norm, operator norm, or the max over direct-sum blocks."""
    norms = [_leaf_norm(leaf, b) for leaf, b in zip(leaves(a.descriptor), a.blocks)]
    return norms[0] if len(norms) == 1 else np.maximum.reduce(norms)


def _extreme_eigs(h):
    """Smallest and largest eigenvalue of Hermitian ``h``; closed forms for n <= 3."""
    n = h.shape[-1]
    if n == 2:
        mean = (h[..., 0, 0].real + h[..., 1, 1].real) / 2
        rad = np.hypot((h[..., 0, 0].real - h[..., 1, 1].real) / 2, np.abs(h[..., 0, 1]))
        return mean - rad, mean + rad
    if n == 3:
        q = np.trace(h, axis1=-2, axis2=-1).real / 3
        b = h - q[..., None, None] * np.eye(3)
        p = np.sqrt(np.sum(np.abs(b) ** 2, axis=(-2, -1)) / 6)
        safe = np.where(p > 0, p, 1.0)
        m = b / safe[..., None, None]
        det = (m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
               - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
               + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0]))
        r = np.clip(det.real / 2, -1.0, 1.0)
        phi = np.arccos(r) / 3
        return q + 2 * p * np.cos(phi + 2 * np.pi / 3), q + 2 * p * np.cos(phi)
    w = np.linalg.eigvalsh(h)
    return w[..., 0], w[..., -1]


def positive_norm(a: AlgebraElement):
    """Norm of an element known to be positive: its largest spectral value."""
    out = []
    for leaf, b in zip(leaves(a.descriptor), a.blocks):
        if isinstance(leaf, Functions):
            out.append(np.abs(b).max(axis=-1))
        elif leaf.n == 1:
            out.append(np.abs(b[..., 0, 0]))
        else:
            lo, hi = _extreme_eigs((b + _adjoint(leaf, b)) / 2)
            out.append(np.maximum(np.abs(lo), np.abs(hi)))
    return out[0] if len(out) == 1 else np.maximum.reduce(out)


def distance(a: AlgebraElement, b: AlgebraElement):
    return cstar_norm(sub(a, b))


# -- order and spectral calculus ---------------------------------------------

def _leaf_min_spectrum(leaf, b):
    if isinstance(leaf, Functions):
        return b.real.min(axis=-1)
    h = (b + _adjoint(leaf, b)) / 2
    return np.linalg.eigvalsh(h)[..., 0]


def min_spectrum(a: AlgebraElement):
    """Smallest spectral value of the self-adjoint part of ``a``."""
    vals = [_leaf_min_spectrum(leaf, b) for leaf, b in zip(leaves(a.descriptor), a.blocks)]
    return vals[0] if len(vals) == 1 else np.minimum.reduce(vals)


def positivity_margin(a: AlgebraElement):
    """``min_spectrum(a) / (1 + ||a||)``; ``a >= 0`` up to tolerance iff this is ``>= -tol_pos``."""
    return min_spectrum(a) / (1.0 + cstar_norm(a))


def order_margin(a: AlgebraElement, b: AlgebraElement):
    """Positivity margin of ``b - a``."""
    return positivity_margin(sub(b, a))


def self_adjoint_defect(a: AlgebraElement):
    """``||a - a*|| / (1 + ||a||)``."""
    return cstar_norm(sub(a, star(a))) / (1.0 + cstar_norm(a))


def is_self_adjoint(a: AlgebraElement, policy=DEFAULT_POLICY):
    return self_adjoint_defect(a) <= policy.tol_eq


def is_positive(a: AlgebraElement, policy=DEFAULT_POLICY):
    nrm = cstar_norm(a)
    sa = cstar_norm(sub(a, star(a))) <= policy.tol_eq * (1.0 + nrm)
    return sa & (min_spectrum(a) >= -policy.tol_pos * (1.0 + nrm))


def leq(a: AlgebraElement, b: AlgebraElement, policy=DEFAULT_POLICY):
    """``a <= b`` in the order of the algebra."""
    _check_same(a, b)
    return is_positive(sub(b, a), policy)


def spectral_apply(a: AlgebraElement, fn) -> AlgebraElement:
    """Apply a real function to the spectrum of the self-adjoint part of ``a``."""
    out = []
    for leaf, b in zip(leaves(a.descriptor), a.blocks):
        if isinstance(leaf, Functions):
            out.append(fn(b.real).astype(complex))
        else:
            w, v = np.linalg.eigh((b + _adjoint(leaf, b)) / 2)
            out.append((v * fn(w)[..., None, :]) @ np.swapaxes(v, -1, -2).conj())
    return AlgebraElement(a.descriptor, out)


def _require_positive(a, policy, what):
    if not np.all(is_positive(a, policy)):
        raise DomainError(f"{what} needs a positive element")


def sqrt_positive(a: AlgebraElement, policy=DEFAULT_POLICY) -> AlgebraElement:
    """Positive square root.  Slightly negative eigenvalues are clipped to zero."""
    _require_positive(a, policy, "sqrt_positive")
    return spectral_apply(a, lambda w: np.sqrt(np.maximum(w, 0.0)))


def abs_value(a: AlgebraElement, policy=DEFAULT_POLICY) -> AlgebraElement:
    """``|a| = (a* a)^(1/2)``."""
    return sqrt_positive(mul(star(a), a), policy)


def regularized_inv_sqrt(a: AlgebraElement, eps, policy=DEFAULT_POLICY) -> AlgebraElement:
    """``(a + eps 1)^(-1/2)`` for positive ``a`` and ``eps > 0``."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    _require_positive(a, policy, "regularized_inv_sqrt")
    return spectral_apply(a, lambda w: 1.0 / np.sqrt(np.maximum(w, 0.0) + eps))


def cube_norm_identity_check(a: AlgebraElement, policy=DEFAULT_POLICY):
    """Check ``||a^3|| = ||a||^3`` for self-adjoint ``a``."""
    if not np.all(is_self_adjoint(a, policy)):
        raise DomainError("the cube norm identity is stated for self-adjoint elements")
    nrm = cstar_norm(a)
    cube = cstar_norm(mul(mul(a, a), a))
    return np.abs(cube - nrm ** 3) <= policy.tol_eq * (1.0 + nrm ** 3)


# -- JSON literals ----------------------------------------------------------
# complex numbers are [re, im] pairs; matrices are row-major nested lists

def complex_to_json(arr):
    arr = np.asarray(arr, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def complex_from_json(obj):
    raw = np.asarray(obj, dtype=float)
    if raw.ndim == 0 or raw.shape[-1] != 2:
        raise StructuralError("complex numbers must be written as [re, im] pairs")
    return raw[..., 0] + 1j * raw[..., 1]


def descriptor_to_json(desc) -> dict:
    if isinstance(desc, Functions):
        return {"kind": "functions", "m": int(desc.m)}
    if isinstance(desc, Matrices):
        return {"kind": "matrices", "n": int(desc.n)}
    if isinstance(desc, DirectSum):
        return {"kind": "direct_sum", "parts": [descriptor_to_json(p) for p in desc.parts]}
    raise StructuralError(f"not an algebra descriptor: {desc!r}")


def descriptor_from_json(obj):
    try:
        kind = obj["kind"]
        if kind == "functions":
            return Functions(int(obj["m"]))
        if kind == "matrices":
            return Matrices(int(obj["n"]))
        if kind == "direct_sum":
            return DirectSum(tuple(descriptor_from_json(p) for p in obj["parts"]))
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"malformed algebra descriptor: {obj!r}") from exc
    raise StructuralError(f"unknown algebra kind: {kind!r}")


def element_to_json(a: AlgebraElement) -> dict:
    if a.batch_shape:
        raise StructuralError("only single elements have a literal form")
    blocks = iter(a.blocks)

    def build(desc):
        if isinstance(desc, DirectSum):
            return [build(p) for p in desc.parts]
        return complex_to_json(next(blocks))

    return {"descriptor": descriptor_to_json(a.descriptor), "data": build(a.descriptor)}


def element_from_json(obj) -> AlgebraElement:
    desc = descriptor_from_json(obj["descriptor"])

    def walk(d, payload):
        if isinstance(d, DirectSum):
            return [walk(p, sub) for p, sub in zip(d.parts, payload)]
        return complex_from_json(payload)

    return element(desc, walk(desc, obj["data"]))

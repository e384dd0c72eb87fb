"""A-linear operators between C*-s.i.p. modules and their bounds.

Operator families
-----------------
``Fibered``      per-point matrices ``T_t : X_t -> Y_t`` on a Bundle.
``LeftMult``     ``x -> c x`` on ``MatrixSelf(n)``.
``DualFunctional``  ``f_y(x) = [y, x]``, valued in the algebra.
``DirectSumOperator``  blockwise on a direct-sum module.
``TransportedOperator``  an operator on the base of a transported module.

The algebra is a module over itself with ``[u, v] = u* v``, which is how
dual functionals are paired with their values.

For a single ``x`` the least ``K`` with ``[Tx, Tx] <= K [x, x]`` splits over
the *components* of the algebra (points of a function algebra, matrix blocks):
on a function component it is ``Q/P`` and on a matrix block it is
``lambda_max(P^(-1/2) Q P^(-1/2))``, where ``P = [x, x]`` and
``Q = [Tx, Tx]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import algebra as alg
from . import module_sip as ms
from .algebra import DEFAULT_POLICY, AlgebraElement, Functions
from .errors import DomainError, StructuralError
from .report import VerificationReport, check, combine
from .sip_classical import Hilbert, LpGiles
from .rng import trial_generator, trial_normals

REGULARIZER_STEPS = (1, 10, 100, 1000)
DUAL_LB_RTOL = 1e-3
ROOT_K_RTOL = 1e-6
ASCENT_STARTS = 3


# -- operator families ------------------------------------------------------

def _is_hilbert_fiber(f):
    return isinstance(f, Hilbert) or (isinstance(f, LpGiles) and f.p == 2)


@dataclass(frozen=True, eq=False)
class Fibered:
    domain: ms.Bundle
    blocks: tuple
    codomain: ms.Bundle | None = None

    def __post_init__(self):
        cod = self.codomain if self.codomain is not None else self.domain
        object.__setattr__(self, "codomain", cod)
        if len(cod.fibers) != len(self.domain.fibers):
            raise StructuralError("domain and codomain need the same number of points")
        blocks = tuple(np.array(b, dtype=complex) for b in self.blocks)
        if len(blocks) != len(self.domain.fibers):
            raise StructuralError(f"need {len(self.domain.fibers)} blocks, got {len(blocks)}")
        for b, fi, fo in zip(blocks, self.domain.fibers, cod.fibers):
            if b.shape != (fo.d, fi.d):
                raise StructuralError(f"block shape {b.shape} does not map {fi.label()} to {fo.label()}")
            b.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    def apply_payload(self, p):
        return tuple(np.einsum("ij,...j->...i", b, v) for b, v in zip(self.blocks, p))

    def exact_norm(self):
        if all(_is_hilbert_fiber(f) for f in self.domain.fibers + self.codomain.fibers):
            return float(max(np.linalg.norm(b, 2) for b in self.blocks))
        return None

    def label(self):
        return "fibered"

    def to_json(self):
        out = {"kind": "fibered", "domain": self.domain.to_json(),
               "blocks": [alg.complex_to_json(b) for b in self.blocks]}
        if self.codomain != self.domain:
            out["codomain"] = self.codomain.to_json()
        return out


@dataclass(frozen=True, eq=False)
class LeftMult:
    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise StructuralError("LeftMult needs a square matrix")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def domain(self):
        return ms.MatrixSelf(self.c.shape[0])

    @property
    def codomain(self):
        return self.domain

    def apply_payload(self, p):
        return self.c @ p

    def exact_norm(self):
        return float(np.linalg.norm(self.c, 2))

    def label(self):
        return "leftmult"

    def to_json(self):
        return {"kind": "leftmult", "c": alg.complex_to_json(self.c)}


@dataclass(frozen=True, eq=False)
class DualFunctional:
    """``f_y(x) = [y, x]``; ``y`` is a single module element."""

    y: ms.ModuleElement

    def __post_init__(self):
        if self.y.batch_shape:
            raise StructuralError("DualFunctional needs a single element y")

    @property
    def domain(self):
        return self.y.descriptor

    @property
    def codomain(self):
        return self.y.descriptor.algebra

    def apply_payload(self, p):
        return self.domain.csip(self.y.payload, p)

    def exact_norm(self):
        return float(ms.triple_norm(self.domain, self.y))

    def label(self):
        return "dual"

    def to_json(self):
        return {"kind": "dual", "y": ms.element_to_json(self.y)}


@dataclass(frozen=True, eq=False)
class DirectSumOperator:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        for p in self.parts:
            if not isinstance(p.codomain, (ms.Bundle, ms.MatrixSelf, ms.DirectSumModule, ms.Transported)):
                raise StructuralError("direct-sum operators need module-valued parts")

    @property
    def domain(self):
        return ms.DirectSumModule(tuple(p.domain for p in self.parts))

    @property
    def codomain(self):
        return ms.DirectSumModule(tuple(p.codomain for p in self.parts))

    def apply_payload(self, p):
        return tuple(op.apply_payload(q) for op, q in zip(self.parts, p))

    def exact_norm(self):
        norms = [p.exact_norm() for p in self.parts]
        return None if any(n is None for n in norms) else float(max(norms))

    def label(self):
        return "direct_sum"

    def to_json(self):
        return {"kind": "direct_sum", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class TransportedOperator:
    """``base`` acting on the payloads of a transported module.

    A-linear because ``x . psi(a) = x . a``; the norm is unchanged since
    ``psi`` is isometric.
    """

    base: object
    domain: ms.Transported

    def __post_init__(self):
        if self.base.domain != self.domain.base:
            raise StructuralError("operator domain does not match the transported base")

    @property
    def codomain(self):
        if self.base.codomain == self.domain.base:
            return self.domain
        return ms.Transported(self.base.codomain, self.domain.iso)

    def apply_payload(self, p):
        return self.base.apply_payload(p)

    def exact_norm(self):
        return self.base.exact_norm()

    def label(self):
        return "transported_" + self.base.label()

    def to_json(self):
        return {"kind": "transported", "domain": self.domain.to_json(), "base": self.base.to_json()}


@dataclass(frozen=True, eq=False)
class Scaled:
    """``s * T``; used to normalize operators to norm one."""

    base: object
    factor: float

    @property
    def domain(self):
        return self.base.domain

    @property
    def codomain(self):
        return self.base.codomain

    def apply_payload(self, p):
        out = self.base.apply_payload(p)
        if isinstance(out, AlgebraElement):
            return alg.scalar_mul(self.factor, out)
        return self.codomain.scale(out, self.factor)

    def exact_norm(self):
        n = self.base.exact_norm()
        return None if n is None else abs(self.factor) * n

    def label(self):
        return self.base.label()

    def to_json(self):
        return {"kind": "scaled", "factor": float(self.factor), "base": self.base.to_json()}


OPERATOR_KINDS = {}


def operator_from_json(obj):
    try:
        kind = obj["kind"]
        if kind == "fibered":
            dom = ms.module_descriptor_from_json(obj["domain"])
            cod = ms.module_descriptor_from_json(obj["codomain"]) if "codomain" in obj else None
            return Fibered(dom, tuple(alg.complex_from_json(b) for b in obj["blocks"]), cod)
        if kind == "leftmult":
            return LeftMult(alg.complex_from_json(obj["c"]))
        if kind == "dual":
            return DualFunctional(ms.element_from_json(obj["y"]))
        if kind == "direct_sum":
            return DirectSumOperator(tuple(operator_from_json(p) for p in obj["parts"]))
        if kind == "transported":
            return TransportedOperator(operator_from_json(obj["base"]), ms.module_descriptor_from_json(obj["domain"]))
        if kind == "scaled":
            return Scaled(operator_from_json(obj["base"]), float(obj["factor"]))
        if kind in OPERATOR_KINDS:
            return OPERATOR_KINDS[kind](obj)
    except (KeyError, TypeError, AttributeError) as exc:
        raise StructuralError(f"malformed operator literal: {obj!r}") from exc
    raise StructuralError(f"unknown operator kind: {kind!r}")


def _algebra_valued(T):
    return not hasattr(T.codomain, "csip")


def _check_domain(T, x):
    if x.descriptor != T.domain:
        raise StructuralError(f"operator on {T.domain.label()} applied to an element of {x.descriptor.label()}")


def apply(T, x):
    """``T x``; an AlgebraElement for dual functionals, otherwise a ModuleElement."""
    _check_domain(T, x)
    out = T.apply_payload(x.payload)
    if isinstance(out, AlgebraElement):
        return out
    return ms.ModuleElement(T.codomain, out)


def _value_pairing(T, u, v):
    """Pairing in the codomain; ``u* v`` when the codomain is the algebra."""
    if isinstance(u, AlgebraElement):
        return alg.star(u) * v
    return T.codomain.csip(u, v)


def _value_act(T, u, a):
    if isinstance(u, AlgebraElement):
        return u * a
    return T.codomain.act(u, a)


def _value_norm(T, u):
    return np.sqrt(alg.positive_norm(_value_pairing(T, u, u)))


# -- natural random operators -------------------------------------------------

def random_operator(desc, rng):
    """A random A-linear operator native to the construction."""
    if isinstance(desc, ms.Bundle):
        blocks = [(rng.standard_normal((f.d, f.d)) + 1j * rng.standard_normal((f.d, f.d))) / np.sqrt(2)
                  for f in desc.fibers]
        return Fibered(desc, tuple(blocks))
    if isinstance(desc, ms.MatrixSelf):
        n = desc.n
        return LeftMult((rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2))
    if isinstance(desc, ms.DirectSumModule):
        return DirectSumOperator(tuple(random_operator(p, rng) for p in desc.parts))
    if isinstance(desc, ms.Transported):
        return TransportedOperator(random_operator(desc.base, rng), desc)
    raise StructuralError(f"no native operator family for {desc.label()}")


def random_dual(desc, rng):
    return DualFunctional(ms.random_module_element(desc, rng))


# -- per-component ratios ---------------------------------------------------------

def component_count(desc_alg):
    return sum(leaf.m if isinstance(leaf, Functions) else 1 for leaf in alg.leaves(desc_alg))


def central_projection(desc_alg, c):
    """The minimal central projection of component ``c``."""
    blocks = []
    k = 0
    for leaf in alg.leaves(desc_alg):
        if isinstance(leaf, Functions):
            v = np.zeros(leaf.m, dtype=complex)
            if k <= c < k + leaf.m:
                v[c - k] = 1
            k += leaf.m
        else:
            v = np.eye(leaf.n, dtype=complex) if c == k else np.zeros((leaf.n, leaf.n), dtype=complex)
            k += 1
        blocks.append(v)
    return AlgebraElement(desc_alg, blocks)


def component_ratios(Q: AlgebraElement, P: AlgebraElement, rel=1e-13):
    """Least ``K`` with ``Q <= K P`` on each component, shape ``batch + (C,)``.

    ``0/0`` counts as ``0``; mass of ``Q`` outside the support of ``P``
    gives ``inf``.
    """
    out = []
    for leaf, q, p in zip(alg.leaves(P.descriptor), Q.blocks, P.blocks):
        if isinstance(leaf, Functions):
            q, p = q.real, p.real
            thr = rel * np.maximum(np.abs(p).max(axis=-1, keepdims=True), 1e-300)
            live = p > thr
            r = np.where(live, q / np.where(live, p, 1.0), np.where(np.abs(q) > thr, np.inf, 0.0))
            out.append(r)
        else:
            w, v = np.linalg.eigh((p + np.swapaxes(p, -1, -2).conj()) / 2)
            thr = rel * np.maximum(np.abs(w).max(axis=-1, keepdims=True), 1e-300)
            live = w > thr
            inv = np.where(live, 1.0 / np.sqrt(np.where(live, w, 1.0)), 0.0)
            s = (v * inv[..., None, :]) @ np.swapaxes(v, -1, -2).conj()
            h = s @ q @ s
            r = np.linalg.eigvalsh((h + np.swapaxes(h, -1, -2).conj()) / 2)[..., -1]
            ker = v * (~live)[..., None, :]
            leak = np.abs(np.swapaxes(ker, -1, -2).conj() @ q @ ker).max(axis=(-2, -1))
            qn = np.abs(q).max(axis=(-2, -1))
            r = np.where(leak > 1e-9 * np.maximum(qn, 1e-300), np.inf, r)
            out.append(r[..., None])
    return np.concatenate(out, axis=-1)


def _k_components(T, X):
    TX = T.apply_payload(X)
    return component_ratios(_value_pairing(T, TX, TX), T.domain.csip(X, X))


def _component_norm_ratio(T, X, c):
    """``||T(x e_c)||^2 / ||x e_c||^2`` for a batch ``X``."""
    e = central_projection(T.domain.algebra, c)
    Xc = T.domain.act(X, e)
    den = alg.positive_norm(T.domain.csip(Xc, Xc))
    num = _value_norm(T, T.apply_payload(Xc)) ** 2
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


FD_STEP = 1e-6


def _ascend(fn, desc, z0, tol):
    """Maximize a scale-invariant batched ``fn`` with BFGS from ``z0``.

    The gradient is a central difference whose ``4n + 1`` evaluation points
    go through ``fn`` as one batch.
    """
    n = z0.size
    steps = np.concatenate([np.zeros((1, 2 * n)), FD_STEP * np.eye(2 * n), -FD_STEP * np.eye(2 * n)])

    def values(v):
        pts = v[None] + steps
        z = pts[:, :n] + 1j * pts[:, n:]
        z = z / np.maximum(np.linalg.norm(z, axis=1, keepdims=True), 1e-300)
        out = np.asarray(fn(desc.from_coords(z)), dtype=float)
        return np.where(np.isfinite(out), out, 0.0)

    def obj(v):
        f = values(v)
        grad = (f[1:2 * n + 1] - f[2 * n + 1:]) / (2 * FD_STEP)
        return -f[0], -grad

    v0 = np.concatenate([z0.real, z0.imag])
    v0 = v0 / max(np.linalg.norm(v0), 1e-300)
    res = minimize(obj, v0, jac=True, method="BFGS", options={"gtol": tol, "maxiter": 500})
    z = res.x[:n] + 1j * res.x[n:]
    z = z / max(np.linalg.norm(z), 1e-300)
    return -float(res.fun), z


def _samples(T, sample_count, seed, label):
    z = trial_normals(seed, ("operator", label, T.domain.label()), sample_count, T.domain.coord_count)
    return z, T.domain.from_coords(z)


# -- bounds -----------------------------------------------------------------

@dataclass
class BoundReport:
    op_norm_lb: float
    op_norm_exact: float | None
    k_min_est: float
    witness: dict | None
    k_min_exact: float | None = None
    validation: VerificationReport | None = None
    notes: list = field(default_factory=list)

    def to_json(self):
        out = {
            "op_norm_lb": float(self.op_norm_lb),
            "op_norm_exact": None if self.op_norm_exact is None else float(self.op_norm_exact),
            "k_min_est": float(self.k_min_est),
            "witness": self.witness,
        }
        if self.k_min_exact is not None:
            out["k_min_exact"] = float(self.k_min_exact)
        if self.validation is not None:
            out["k_validation"] = self.validation.to_json()
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _lower_bound(T, z, X, policy):
    """Largest ``||Tx|| / ||x||`` over samples, central projections of the best
    samples after BFGS ascent, and the analytic witness for dual functionals."""
    desc = T.domain
    nx = ms._norm_payload(desc, X)
    ratio = np.where(nx > 0, _value_norm(T, T.apply_payload(X)) / np.where(nx > 0, nx, 1.0), 0.0)
    i = int(np.argmax(ratio))
    best, best_z = float(ratio[i]), z[i]
    for c in range(component_count(desc.algebra)):
        r = _component_norm_ratio(T, X, c)
        for j in np.argsort(-r)[:ASCENT_STARTS]:
            val, zc = _ascend(lambda P: _component_norm_ratio(T, P, c), desc, z[j], policy.tol_opt)
            cand = desc.coords(desc.act(desc.from_coords(zc[None]), central_projection(desc.algebra, c)))[0]
            val = float(_component_norm_ratio(T, desc.from_coords(cand[None]), c)[0])
            if np.sqrt(max(val, 0.0)) > best:
                best, best_z = float(np.sqrt(val)), cand
    if isinstance(T, DualFunctional):
        ny = ms.triple_norm(desc, T.y)
        if ny > 0:
            wz = T.y.coords() / ny
            w = desc.from_coords(wz[None])
            val = float(_value_norm(T, T.apply_payload(w))[0] / ms._norm_payload(desc, w)[0])
            if val > best:
                best, best_z = val, wz
    return best, best_z


def op_norm(T, sample_count, seed, policy=DEFAULT_POLICY) -> BoundReport:
    """Operator norm: sampled lower bound with ascent, plus the closed form when known."""
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    z, X = _samples(T, sample_count, seed, "norm")
    lb, wz = _lower_bound(T, z, X, policy)
    desc = T.domain
    k_est, _ = _k_estimate(T, z, X, policy)
    exact = T.exact_norm()
    witness = ms.element_to_json(ms.ModuleElement(desc, desc.from_coords(wz)))
    notes = [] if exact is not None else ["no closed form; bracket [op_norm_lb, sqrt(k_min_est)]"]
    return BoundReport(lb, exact, k_est, witness, notes=notes)


def _k_estimate(T, z, X, policy):
    desc = T.domain
    ratios = _k_components(T, X)
    best = float(np.max(ratios)) if ratios.size else 0.0
    best_z = z[int(np.unravel_index(np.argmax(ratios), ratios.shape)[0])]
    for c in range(ratios.shape[-1]):
        for j in np.argsort(-ratios[:, c])[:ASCENT_STARTS]:
            if not np.isfinite(ratios[j, c]):
                continue
            val, zc = _ascend(lambda P: _k_components(T, P)[:, c], desc, z[j], policy.tol_opt)
            if val > best:
                best, best_z = val, zc
    if isinstance(T, DualFunctional):
        # equality case of Cauchy-Schwarz at x = y
        kz = float(np.max(_k_components(T, T.y.payload)))
        if kz > best:
            best, best_z = kz, T.y.coords()
    return best, best_z


def exact_k(T):
    """Closed-form least ``K`` where available (``||T||^2`` for the native families on Hilbert fibers)."""
    n = T.exact_norm()
    if n is None:
        return None
    if isinstance(T, Fibered) and not all(_is_hilbert_fiber(f) for f in T.domain.fibers):
        return None
    return n * n


def min_K(T, sample_count, seed, policy=DEFAULT_POLICY) -> BoundReport:
    """Least ``K`` with ``[Tx, Tx] <= K [x, x]``, estimated and then validated.

    The estimate maximizes each component ratio over seeded samples with BFGS
    ascent; ``[Tx, Tx] <= K (1 + tol_pos) [x, x]`` is then checked on fresh
    samples.
    """
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    z, X = _samples(T, sample_count, seed, "k_estimate")
    k_est, kz = _k_estimate(T, z, X, policy)
    validation = validate_k(T, k_est * (1.0 + policy.tol_pos), sample_count, seed, policy)
    lb, wz = _lower_bound(T, z, X, policy)
    desc = T.domain
    witness = ms.element_to_json(ms.ModuleElement(desc, desc.from_coords(kz)))
    notes = [] if exact_k(T) is not None else ["estimate; no closed form"]
    return BoundReport(lb, T.exact_norm(), k_est, witness, exact_k(T), validation, notes)


def validate_k(T, K, sample_count, seed, policy=DEFAULT_POLICY, prop="k_validation"):
    """``[Tx, Tx] <= K [x, x]`` on fresh seeded samples."""
    z, X = _samples(T, sample_count, seed, "k_validation")
    TX = T.apply_payload(X)
    Q = _value_pairing(T, TX, TX)
    P = T.domain.csip(X, X)
    margins = alg.order_margin(Q, alg.scalar_mul(K, P))
    desc = T.domain
    return check(prop, margins, policy.tol_pos,
                 lambda i: {"x": ms._literal(desc, X, i), "K": float(K)})


# -- checks -----------------------------------------------------------------

def check_A_linear(T, sample_count, seed, policy=DEFAULT_POLICY):
    """``T(x a) = (T x) a`` on seeded samples."""
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    desc = T.domain
    X, A = ms._draw(desc, seed, ("a_linear", T.label(), desc.label()), sample_count, ["module", "algebra"])
    lhs = T.apply_payload(desc.act(X, A))
    TX = T.apply_payload(X)
    rhs = _value_act(T, TX, A)
    if isinstance(lhs, AlgebraElement):
        diff = lhs - rhs
    else:
        diff = ms._tree_map(np.subtract, lhs, rhs)
    err = _value_norm(T, diff)
    scale = 1.0 + _value_norm(T, TX) * alg.cstar_norm(A)
    return check("a_linear", -err / scale, policy.tol_eq,
                 lambda i: ms._witness(desc, i, [("x", X)], [("a", A)]))


def regularized_normalize(desc, x, n, policy=DEFAULT_POLICY) -> ms.ModuleElement:
    """``x_n = x ([x, x] + 1/n)^(-1/2)``; always ``||x_n|| <= 1``."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise DomainError(f"n must be a positive integer, got {n!r}")
    a_n = alg.regularized_inv_sqrt(ms.csip(desc, x, x), 1.0 / n, policy)
    return ms.module_action(desc, x, a_n)


def _regularize_payload(desc, X, n):
    a_n = alg.spectral_apply(desc.csip(X, X), lambda w: 1.0 / np.sqrt(np.maximum(w, 0.0) + 1.0 / n))
    return desc.act(X, a_n)


def normalized(T, sample_count, seed, policy=DEFAULT_POLICY):
    """``T / ||T||`` using the closed form, or the sampled lower bound."""
    n = T.exact_norm()
    if n is None:
        n = op_norm(T, sample_count, seed, policy).op_norm_lb
    return (Scaled(T, 1.0 / n) if n > 0 else T), n


def thm44_check(T, sample_count, seed, policy=DEFAULT_POLICY):
    """Boundedness characterization, checked on ``T' = T / ||T||``.

    Bounded implies ordered: ``[T'x, T'x] <= [x, x]`` on samples.  Ordered
    implies bounded: the sampled norm of ``T'`` is at most one.  The
    regularized ``x_n = x a_n`` satisfies
    ``||x_n|| <= 1``, is monotone in ``n``, ``[x_n, x_n] <= 1`` and
    ``[T'x, T'x] <= [x, x] + 1/n``.
    """
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    Tn, scale = normalized(T, min(sample_count, 256), seed, policy)
    desc = T.domain
    X = ms._draw(desc, seed, ("boundedness", desc.label()), sample_count, ["module"])[0]
    checks = [validate_k(Tn, 1.0, sample_count, seed, policy, prop="bounded_implies_order")]

    z, Xs = _samples(Tn, sample_count, seed, "boundedness_norm")
    nx = ms._norm_payload(desc, Xs)
    ratio = np.where(nx > 0, _value_norm(Tn, Tn.apply_payload(Xs)) / np.where(nx > 0, nx, 1.0), 0.0)
    checks.append(check("order_implies_bounded", (1.0 - ratio) / 2.0, policy.tol_eq,
                        lambda i: {"x": ms._literal(desc, Xs, i)}))

    TX = Tn.apply_payload(X)
    Q = _value_pairing(Tn, TX, TX)
    P = desc.csip(X, X)
    one = alg.identity(desc.algebra, (sample_count,))
    norms, unit, reg = [], [], []
    for n in REGULARIZER_STEPS:
        Xn = _regularize_payload(desc, X, n)
        norms.append(ms._norm_payload(desc, Xn))
        unit.append(alg.order_margin(desc.csip(Xn, Xn), one))
        reg.append(alg.order_margin(Q, P + alg.scalar_mul(1.0 / n, one)))
    norms = np.stack(norms, axis=-1)
    wit = lambda i: {"x": ms._literal(desc, X, i)}
    checks.append(check("regularized_norm_bound", (1.0 - norms.max(axis=-1)), policy.tol_eq, wit))
    checks.append(check("regularized_monotone", np.diff(norms, axis=-1).min(axis=-1), policy.tol_eq, wit))
    checks.append(check("regularized_unit_bound", np.min(unit, axis=0), policy.tol_pos, wit))
    checks.append(check("regularized_order", np.min(reg, axis=0), policy.tol_pos, wit))
    return combine("boundedness", checks, note=f"normalized by {scale:.12g}")


def johnson_property_check(desc_X, desc_Y, T, y, sample_count, seed, policy=DEFAULT_POLICY):
    """``r(a) = [y, T(x a)]`` satisfies ``r(a) = r(1) a``, and
    ``r(a)* r(a) <= ||y||^2 K ||x||^2 a* a`` with ``K`` the squared norm bound of ``T``.

    ``y`` may be ``None``, in which case a fresh ``y`` is drawn per trial.
    """
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    if T.domain != desc_X:
        raise StructuralError("T does not act on desc_X")
    algebra_valued = _algebra_valued(T)
    if not algebra_valued and T.codomain != desc_Y:
        raise StructuralError("T does not map into desc_Y")
    X, A = ms._draw(desc_X, seed, ("johnson", desc_X.label()), sample_count, ["module", "algebra"])
    if y is not None:
        Y = y.payload if not isinstance(y, AlgebraElement) else y
        Y = ms._tree_map(lambda v: np.broadcast_to(v, (sample_count,) + v.shape), Y) if not isinstance(Y, AlgebraElement) \
            else AlgebraElement(Y.descriptor, [np.broadcast_to(b, (sample_count,) + b.shape) for b in Y.blocks])
    elif algebra_valued:
        Y = alg.from_coords(desc_Y, trial_normals(seed, ("johnson_y", desc_X.label()), sample_count,
                                                  alg.coord_count(desc_Y)))
    else:
        Y = desc_Y.from_coords(trial_normals(seed, ("johnson_y", desc_X.label()), sample_count, desc_Y.coord_count))

    def pair(u, v):
        return _value_pairing(T, u, v)

    r_a = pair(Y, T.apply_payload(desc_X.act(X, A)))
    r_1 = pair(Y, T.apply_payload(X))
    ny = _value_norm(T, Y)
    nx = ms._norm_payload(desc_X, X)
    na = alg.cstar_norm(A)
    exact = T.exact_norm()
    bound = exact if exact is not None else np.sqrt(_k_estimate(T, *_samples(T, 256, seed, "johnson_k"), policy)[0])
    wit = lambda i: ms._witness(desc_X, i, [("x", X)], [("a", A)])
    concl = check("r_equals_r1_a", -ms._rel(r_a - r_1 * A, ny * bound * nx * na), policy.tol_eq, wit)
    rhs = alg.scalar_mul((ny * nx * bound) ** 2 * (1.0 + policy.tol_pos), alg.star(A) * A)
    chain = check("cauchy_schwarz_chain", alg.order_margin(alg.star(r_a) * r_a, rhs), policy.tol_pos, wit)
    return combine("johnson", [concl, chain])


def dual_norm_check(desc, sample_count, seed, policy=DEFAULT_POLICY, ys=4):
    """``||f_y|| = ||y||`` via the analytic witness plus sampling, and
    ``||[y, x]|| <= ||y|| ||x||`` on every sample."""
    out = []
    for k in range(ys):
        y = ms.random_module_element(desc, trial_generator(seed, ("dual_y", desc.label()), k))
        T = DualFunctional(y)
        ny = ms.triple_norm(desc, y)
        rep = op_norm(T, min(sample_count, 256), seed + k, policy)
        out.append(check(f"dual_norm_{k}", [DUAL_LB_RTOL - abs(rep.op_norm_lb - ny) / max(ny, 1e-300)], 0.0,
                         lambda i: {"y": ms.element_to_json(y), "op_norm_lb": rep.op_norm_lb}))
        X = ms._draw(desc, seed + k, ("dual_cs", desc.label()), sample_count, ["module"])[0]
        lhs = alg.cstar_norm(desc.csip(y.payload, X))
        nx = ms._norm_payload(desc, X)
        out.append(check(f"dual_cauchy_schwarz_{k}", (ny * nx - lhs) / (1.0 + ny * nx), policy.tol_eq,
                         lambda i: {"y": ms.element_to_json(y), "x": ms._literal(desc, X, i)}))
    return combine("dual_norm", out)


def sup_formula_check(desc, sample_count, seed, policy=DEFAULT_POLICY, candidates=64):
    """``||x|| = sup{||[x, y]|| : ||y|| <= 1}``: seeded unit ``y`` plus ``x/||x||``."""
    X = ms._draw(desc, seed, ("sup_x", desc.label()), sample_count, ["module"])[0]
    nx = ms._norm_payload(desc, X)
    z = trial_normals(seed, ("sup_y", desc.label()), candidates, desc.coord_count)
    Yc = desc.from_coords(z)
    ny = ms._norm_payload(desc, Yc)
    Yc = desc.scale(Yc, 1.0 / ny)
    vals = alg.cstar_norm(desc.csip(ms._tree_map(lambda v: v[:, None], X), ms._tree_map(lambda v: v[None], Yc)))
    own = alg.cstar_norm(desc.csip(X, desc.scale(X, 1.0 / np.where(nx > 0, nx, 1.0))))
    sup = np.maximum(vals.max(axis=1), own)
    checks = [
        check("sup_attained", DUAL_LB_RTOL - np.abs(sup - nx) / np.maximum(nx, 1e-300), 0.0,
              lambda i: {"x": ms._literal(desc, X, i)}),
        check("sup_upper_bound", (nx - vals.max(axis=1)) / (1.0 + nx), policy.tol_eq,
              lambda i: {"x": ms._literal(desc, X, i)}),
    ]
    return combine("sup_formula", checks)


def least_k_check(T, sample_count, seed, policy=DEFAULT_POLICY):
    """``||T|| = inf K^(1/2)``: exact comparison for closed forms, a bracket otherwise."""
    rep = min_K(T, sample_count, seed, policy)
    root = np.sqrt(max(rep.k_min_est, 0.0))
    checks = [rep.validation]
    if rep.op_norm_exact is not None and rep.k_min_exact is not None:
        n = rep.op_norm_exact
        checks.append(check("k_matches_closed_form",
                            [ROOT_K_RTOL - abs(rep.k_min_est - rep.k_min_exact) / (1.0 + rep.k_min_exact)], 0.0))
        checks.append(check("norm_equals_root_k", [ROOT_K_RTOL - abs(n - root) / (1.0 + n)], 0.0))
    else:
        checks.append(check("bracket", [(root - rep.op_norm_lb) / (1.0 + root)], policy.tol_eq,
                            note="op_norm_lb <= sqrt(k_min_est)"))
    out = combine("least_k", checks)
    out.note = f"op_norm_lb={rep.op_norm_lb:.12g} k_min_est={rep.k_min_est:.12g}"
    return out, rep


def verify_operators(desc, sample_count, seed, policy=DEFAULT_POLICY, extra=()):
    """The operator suite for one construction.

    Native operator and a dual functional: A-linearity, the least-K bracket,
    boundedness checks and the Johnson property; plus the dual norm and sup
    formula checks on the module.  ``extra`` operators (negative controls)
    receive the A-linearity and Johnson checks.
    """
    gen = trial_generator(seed, ("operators", desc.label()), 0)
    ops = []
    try:
        ops.append(random_operator(desc, gen))
    except StructuralError:
        pass
    ops.append(random_dual(desc, gen))
    ops.extend(extra)
    checks = []
    for k, T in enumerate(ops):
        sub = [check_A_linear(T, sample_count, seed + k, policy)]
        cod = desc.algebra if _algebra_valued(T) else T.codomain
        sub.append(johnson_property_check(desc, cod, T, None, sample_count, seed + k, policy))
        if k < len(ops) - len(extra):
            lk, _ = least_k_check(T, sample_count, seed + k, policy)
            sub.append(lk)
            sub.append(thm44_check(T, sample_count, seed + k, policy))
        checks.append(combine(f"operator_{k}_{T.label()}", sub))
    checks.append(dual_norm_check(desc, sample_count, seed, policy))
    checks.append(sup_formula_check(desc, sample_count, seed, policy))
    return combine("operators", checks)

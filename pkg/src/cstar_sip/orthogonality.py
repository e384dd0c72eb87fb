"""Birkhoff-James orthogonality and the orthogonality theorems.

``x`` is Birkhoff-James orthogonal to ``y`` when ``||x + alpha y|| >= ||x||``
for every complex ``alpha``.  The map ``alpha -> ||x + alpha y||`` is convex,
so it is minimized numerically: a polar grid over the disk of radius
``R = 2||x||/||y|| + 1`` (outside it ``||x + alpha y|| > ||x||``), then
nested golden-section search on the two real coordinates of ``alpha``: the
imaginary part is minimized exactly for each trial real part, and the
resulting partial minimum is again convex.  Unlike a pattern search this
cannot stall along the kinks of max-type norms.

All solvers run in lockstep over a batch of pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algebra as alg
from . import module_sip as ms
from .algebra import DEFAULT_POLICY
from .errors import DomainError, PreconditionError
from .report import VerificationReport, check, combine, skipped
from .rng import trial_normals

GRID_ANGLES = 24
GRID_RADII = 16

ORTH_TOL = 1e-7
CONTINUITY_GRID = tuple(10.0 ** -k for k in range(1, 7))
CONTINUITY_TOL = 1e-4
HYPOTHESIS_GRID = tuple(sorted(set(np.concatenate([-np.logspace(-3, 1, 13), [0.0], np.logspace(-3, 1, 13)]))))
ZERO_PAIRING_TOL = 1e-3
CONVERSE_RATIO = 0.1
DEFECT_THRESHOLD = 0.1
CONVERSE_CHUNK = 64


@dataclass(frozen=True)
class BJResult:
    alpha_star: complex
    min_norm: float
    base_norm: float
    is_orthogonal: bool
    tolerance: float

    def to_json(self):
        return {
            "alpha_star": [float(self.alpha_star.real), float(self.alpha_star.imag)],
            "min_norm": float(self.min_norm),
            "base_norm": float(self.base_norm),
            "is_orthogonal": bool(self.is_orthogonal),
            "tolerance": float(self.tolerance),
        }


@dataclass
class BJBatch:
    """Batched solver output; arrays indexed by pair."""

    alpha_star: np.ndarray
    min_norm: np.ndarray
    base_norm: np.ndarray
    tolerance: np.ndarray
    iterations: int

    @property
    def is_orthogonal(self):
        return self.min_norm >= self.base_norm - self.tolerance

    def __getitem__(self, i):
        return BJResult(complex(self.alpha_star[i]), float(self.min_norm[i]), float(self.base_norm[i]),
                        bool(self.is_orthogonal[i]), float(self.tolerance[i]))


def orth_tolerance(base_norm):
    return ORTH_TOL * (1.0 + np.asarray(base_norm))


def _expand(p, axis=1):
    return ms._tree_map(lambda v: np.expand_dims(v, axis), p)


def _take(p, idx):
    return ms._tree_map(lambda v: v[idx], p)


def _line_norms(desc, X, Y, alpha):
    """``||x_i + alpha_ij y_i||`` for payload batches ``X, Y`` (N) and ``alpha`` (N, K)."""
    moved = desc.scale(_expand(Y), alpha)
    pts = ms._tree_map(np.add, _expand(X), moved)
    return ms._norm_payload(desc, pts)


INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def _golden_iterations(width, tol):
    return int(np.ceil(np.log(max(width, tol) / tol) / -np.log(INV_PHI))) + 1


def _golden(fn, lo, hi, iters):
    """Vectorized golden-section search of a convex ``fn`` on ``[lo, hi]``.

    Returns the best point seen and its value.
    """
    lo, hi = lo.astype(float).copy(), hi.astype(float).copy()
    a = hi - INV_PHI * (hi - lo)
    b = lo + INV_PHI * (hi - lo)
    fa, fb = fn(a), fn(b)
    for _ in range(iters):
        left = fa <= fb
        hi = np.where(left, b, hi)
        lo = np.where(left, lo, a)
        new = np.where(left, hi - INV_PHI * (hi - lo), lo + INV_PHI * (hi - lo))
        fn_new = fn(new)
        a, b, fa, fb = (np.where(left, new, b), np.where(left, a, new),
                        np.where(left, fn_new, fb), np.where(left, fa, fn_new))
    pick = fa <= fb
    return np.where(pick, a, b), np.where(pick, fa, fb)


def bj_minimize_batch(desc, X, Y, policy=DEFAULT_POLICY) -> BJBatch:
    """Minimize ``alpha -> ||x_i + alpha y_i||`` for a batch of payload pairs."""
    for leaf in ms._tree_leaves(X) + ms._tree_leaves(Y):
        if not np.all(np.isfinite(leaf)):
            raise DomainError("bj_minimize needs finite inputs")
    nx = np.atleast_1d(ms._norm_payload(desc, X))
    ny = np.atleast_1d(ms._norm_payload(desc, Y))
    n = nx.shape[0]
    live = ny > 0
    radius = np.where(live, 2.0 * nx / np.where(live, ny, 1.0) + 1.0, 1.0)

    ang = np.exp(2j * np.pi * np.arange(GRID_ANGLES) / GRID_ANGLES)
    rad = np.geomspace(1e-4, 1.0, GRID_RADII)
    unit_grid = np.concatenate([[0.0], (rad[:, None] * ang[None, :]).ravel()])
    grid = radius[:, None] * unit_grid[None, :]
    vals = _line_norms(desc, X, Y, grid)
    best = np.argmin(vals, axis=1)
    center = grid[np.arange(n), best]
    fc = vals[np.arange(n), best]
    center[~live] = 0.0
    fc[~live] = nx[~live]

    # box [-R, R]^2 contains the minimizer; Im alpha is minimized exactly for each Re alpha
    live_idx = np.flatnonzero(live)
    if live_idx.size:
        Xl, Yl, Rl = _take(X, live_idx), _take(Y, live_idx), radius[live_idx]
        iters = _golden_iterations(2.0 * Rl.max(), policy.tol_opt)

        def inner(re_part):
            def f(im_part):
                return _line_norms(desc, Xl, Yl, (re_part + 1j * im_part)[:, None])[:, 0]
            return _golden(f, -Rl, Rl, iters)

        def outer(re_part):
            return inner(re_part)[1]

        re_star, _ = _golden(outer, -Rl, Rl, iters)
        im_star, f_star = inner(re_star)
        a_star = re_star + 1j * im_star
        better = f_star < fc[live_idx]
        center[live_idx[better]] = a_star[better]
        fc[live_idx[better]] = f_star[better]
        it = 2 * iters

    min_norm = np.minimum(fc, nx)
    return BJBatch(center, min_norm, nx, orth_tolerance(nx), it if live_idx.size else 0)


def bj_minimize(desc, x, y, policy=DEFAULT_POLICY) -> BJResult:
    """Birkhoff-James minimization for a single pair ``(x, y)``."""
    ms._member(desc, x)
    ms._member(desc, y)
    out = bj_minimize_batch(desc, _expand(x.payload, 0), _expand(y.payload, 0), policy)
    return out[0]


def thm31_check(desc, x, y, policy=DEFAULT_POLICY) -> bool:
    """``[x, y] = 0`` implies ``x`` is Birkhoff-James orthogonal to ``y``."""
    gap = alg.cstar_norm(ms.csip(desc, x, y))
    scale = 1.0 + ms.triple_norm(desc, x) * ms.triple_norm(desc, y)
    if gap > policy.tol_eq * scale:
        raise PreconditionError(f"[x, y] is not zero (norm {gap:.3e}); the theorem does not apply")
    return bj_minimize(desc, x, y, policy).is_orthogonal


def _functional_matrix(desc, X):
    """Matrices of the complex-linear maps ``y -> coords([x_i, y])``, shape (N, alg, mod)."""
    n_mod = desc.coord_count
    basis = desc.from_coords(np.eye(n_mod, dtype=complex))
    vals = desc.csip(_expand(X), _expand(basis, 0))
    return np.swapaxes(alg.coords(vals), -1, -2)


def orthogonal_complement_batch(desc, X, Z, policy=DEFAULT_POLICY):
    """Project each ``z_i`` onto the kernel of ``y -> [x_i, y]``."""
    M = _functional_matrix(desc, X)
    z = desc.coords(Z)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    m = vh.shape[-1]
    sv = np.zeros(s.shape[:-1] + (m,))
    sv[..., :s.shape[-1]] = s
    # a trivial kernel must give y = 0 exactly, not round-off
    keep = sv <= 1e-12 * np.maximum(sv[..., :1], 1e-300)
    coef = np.einsum("nij,nj->ni", vh, z) * keep
    proj = np.einsum("nji,nj->ni", vh.conj(), coef)
    return desc.from_coords(proj)


def sip_orthogonal_complement_sample(desc, x, seed, policy=DEFAULT_POLICY) -> ms.ModuleElement:
    """A seeded ``y`` with ``[x, y] = 0``.

    A random vector is projected onto the kernel of the linear map
    ``y -> [x, y]``; on a Bundle this is one linear constraint per fiber.
    """
    ms._member(desc, x)
    if ms.triple_norm(desc, x) == 0:
        raise DomainError("the complement sampler needs x != 0")
    z = trial_normals(seed, ("complement", desc.label()), 1, desc.coord_count)
    Y = orthogonal_complement_batch(desc, _expand(x.payload, 0), desc.from_coords(z), policy)
    return ms.ModuleElement(desc, _take(Y, 0))


def continuity_profile(desc, x, y, t_grid=CONTINUITY_GRID):
    """``delta(t) = ||Re[x + t y, y] - Re[x, y]||`` along a real grid."""
    t = np.asarray(t_grid, dtype=float)
    base = alg.re(ms.csip(desc, x, y))
    pts = ms._tree_map(np.add, _expand(x.payload, 0), desc.scale(_expand(y.payload, 0), t))
    vals = alg.re(desc.csip(pts, _expand(y.payload, 0)))
    diff = alg.AlgebraElement(base.descriptor, [v - b for v, b in zip(vals.blocks, base.blocks)])
    return np.atleast_1d(alg.cstar_norm(diff))


def continuity_check(desc, x, y, policy=DEFAULT_POLICY, t_grid=CONTINUITY_GRID) -> bool:
    """Numerical form of ``lim_{t -> 0} Re[x + t y, y] = Re[x, y]``.

    Passes when the grid has at least two points, ``delta`` is non-increasing
    from some grid point on (up to ``tol_eq`` slack) and its last value is at
    most ``1e-4 (1 + ||x|| ||y||)``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size < 2:
        return False
    delta = continuity_profile(desc, x, y, t)
    scale = 1.0 + ms.triple_norm(desc, x) * ms.triple_norm(desc, y)
    slack = policy.tol_eq * scale
    rises = np.flatnonzero(np.diff(delta) > slack)
    tail = delta[rises[-1] + 1:] if rises.size else delta
    return bool(tail.size >= 2 and delta[-1] <= CONTINUITY_TOL * scale)


def _hypothesis_margins(desc, X, Y, t):
    """Order margins of ``||x + t y|| rho(x) <= [x + t y, x + t y]``, shape (N, T)."""
    rx = ms._rho_payload(desc, X)
    pts = ms._tree_map(np.add, _expand(X), desc.scale(_expand(Y), np.broadcast_to(t, (ms._norm_payload(desc, X).size, t.size))))
    full = desc.csip(pts, pts)
    nrm = np.sqrt(alg.cstar_norm(full))
    lhs = alg.AlgebraElement(rx.descriptor, [b[:, None] for b in rx.blocks])
    lhs = alg.scalar_mul(nrm, alg.AlgebraElement(rx.descriptor, [np.broadcast_to(b, f.shape) for b, f in zip(lhs.blocks, full.blocks)]))
    return alg.order_margin(lhs, full)


def _require_self_adjoint(desc, xy, policy):
    if not np.all(alg.is_self_adjoint(xy, policy)):
        raise PreconditionError("[x, y] must be self-adjoint")


def thm34_hypothesis(desc, x, y, t, policy=DEFAULT_POLICY) -> bool:
    """Literal reading: ``[x + t y, x + t y] >= ||x + t y|| [x, x]^(1/2)``."""
    _require_self_adjoint(desc, ms.csip(desc, x, y), policy)
    m = _hypothesis_margins(desc, _expand(x.payload, 0), _expand(y.payload, 0), np.atleast_1d(float(t)))
    return bool(m[0, 0] >= -policy.tol_pos)


def thm34_batch(desc, X, Y, t_grid=HYPOTHESIS_GRID, policy=DEFAULT_POLICY, prop="zero_pairing_conclusion"):
    t = np.asarray(t_grid, dtype=float)
    xy = desc.csip(X, Y)
    _require_self_adjoint(desc, xy, policy)
    hyp = np.all(_hypothesis_margins(desc, X, Y, t) >= -policy.tol_pos, axis=1)
    scale = 1.0 + ms._norm_payload(desc, X) * ms._norm_payload(desc, Y)
    margins = ZERO_PAIRING_TOL - alg.cstar_norm(xy) / scale

    def wit(i):
        return {"x": ms._literal(desc, X, i), "y": ms._literal(desc, Y, i),
                "csip_norm": float(alg.cstar_norm(xy[i]))}

    note = None if hyp.any() else "hypothesis not satisfied - vacuous"
    return check(prop, margins, 0.0, wit, valid=hyp, note=note)


def thm34_check(desc, x, y, t_grid=HYPOTHESIS_GRID, policy=DEFAULT_POLICY):
    """If the hypothesis holds at every grid ``t``, require ``||[x, y]|| <= 1e-3 (1 + ||x|| ||y||)``.

    A pair failing the hypothesis somewhere is counted as vacuous.
    """
    return thm34_batch(desc, _expand(x.payload, 0), _expand(y.payload, 0), t_grid, policy)


# -- suites ---------------------------------------------------------------------

def rank_drop_projection(desc_alg, batch_shape=()):
    """A projection that removes one point or one basis direction per leaf."""
    blocks = []
    for leaf in alg.leaves(desc_alg):
        if isinstance(leaf, alg.Functions):
            v = np.ones(leaf.m, dtype=complex)
            if leaf.m > 1:
                v[-1] = 0
        else:
            v = np.eye(leaf.n, dtype=complex)
            if leaf.n > 1:
                v[-1, -1] = 0
        blocks.append(np.broadcast_to(v, tuple(batch_shape) + v.shape))
    return alg.AlgebraElement(desc_alg, blocks)


def _orthogonal_pairs(desc, trials, seed, label, policy):
    z = trial_normals(seed, (label, desc.label()), trials, 2 * desc.coord_count)
    X = desc.from_coords(z[:, :desc.coord_count])
    Z = desc.from_coords(z[:, desc.coord_count:])
    # every other trial drops rank so that matrix modules have nonzero complements
    proj = rank_drop_projection(desc.algebra, (trials,))
    dropped = desc.act(X, proj)
    odd = (np.arange(trials) % 2 == 1)
    X = ms._tree_map(lambda a, b: np.where(odd.reshape((-1,) + (1,) * (a.ndim - 1)), b, a), X, dropped)
    Y = orthogonal_complement_batch(desc, X, Z, policy)
    return X, Y


def verify_thm31(desc, trials, seed, policy=DEFAULT_POLICY):
    """On constructed pairs: ``[x, y] = 0`` implies ``x`` BJ-orthogonal to ``y``."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    X, Y = _orthogonal_pairs(desc, trials, seed, "zero_pairing_orthogonal", policy)
    nx, ny = ms._norm_payload(desc, X), ms._norm_payload(desc, Y)
    gap = alg.cstar_norm(desc.csip(X, Y)) / (1.0 + nx * ny)
    res = bj_minimize_batch(desc, X, Y, policy)

    def wit(i):
        return {"x": ms._literal(desc, X, i), "y": ms._literal(desc, Y, i), "bj": res[i].to_json()}

    premise = check("complement_constraint", -gap, policy.tol_eq, wit)
    nontrivial = int(np.sum(ny > 0))
    margins = (res.min_norm - res.base_norm) / (1.0 + res.base_norm)
    concl = check("bj_orthogonal", margins, ORTH_TOL, wit, note=f"{nontrivial} pairs with y != 0")
    return combine("zero_pairing_orthogonal", [premise, concl])


def verify_continuity(desc, trials, seed, policy=DEFAULT_POLICY):
    if trials < 1:
        raise DomainError("trials must be >= 1")
    z = trial_normals(seed, ("continuity", desc.label()), trials, 2 * desc.coord_count)
    ok = np.empty(trials, dtype=bool)
    X = desc.from_coords(z[:, :desc.coord_count])
    Y = desc.from_coords(z[:, desc.coord_count:])
    for i in range(trials):
        ok[i] = continuity_check(desc, ms.ModuleElement(desc, _take(X, i)), ms.ModuleElement(desc, _take(Y, i)), policy)
    return check("continuity", np.where(ok, 0.0, -1.0), 0.0,
                 lambda i: {"x": ms._literal(desc, X, i), "y": ms._literal(desc, Y, i)})


def unit_normalize_batch(desc, X):
    """``x [x, x]^(-1/2)`` (pseudo-inverse root), so that ``[u, u]`` is a projection."""
    inv = alg.spectral_apply(desc.csip(X, X), lambda w: np.where(w > 1e-12, 1.0 / np.sqrt(np.maximum(w, 1e-300)), 0.0))
    return desc.act(X, inv)


def verify_thm34(desc, trials, seed, policy=DEFAULT_POLICY):
    """Seeded pairs with self-adjoint ``[x, y]``: the positivity hypothesis should force ``[x, y] = 0``.

    Even trials use ``x`` normalized so that ``[x, x]`` is a projection and
    ``y`` in the s.i.p. complement of ``x``; odd trials use ``y . [x, y]*``,
    for which the pairing is positive.  Pairs outside the hypothesis are
    counted as vacuous.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    z = trial_normals(seed, ("pairing_hypothesis", desc.label()), trials, 3 * desc.coord_count)
    c = desc.coord_count
    X = unit_normalize_batch(desc, desc.from_coords(z[:, :c]))
    Y0 = desc.from_coords(z[:, c:2 * c])
    Yc = orthogonal_complement_batch(desc, X, desc.from_coords(z[:, 2 * c:]), policy)
    Ys = desc.act(Y0, alg.star(desc.csip(X, Y0)))
    even = (np.arange(trials) % 2 == 0)
    Y = ms._tree_map(lambda a, b: np.where(even.reshape((-1,) + (1,) * (a.ndim - 1)), a, b), Yc, Ys)
    rep = thm34_batch(desc, X, Y, HYPOTHESIS_GRID, policy)
    live = rep.trials - rep.vacuous
    rep.note = f"{live} non-vacuous pairs, {rep.vacuous} vacuous (hypothesis not satisfied)"
    return combine("pairing_hypothesis", [rep])


def find_converse_witness(desc, trials, seed, policy=DEFAULT_POLICY):
    """Search for ``x`` BJ-orthogonal to ``y`` with ``||[x, y]|| > 0.1 ||x|| ||y||``.

    ``x = z + alpha* y`` where ``alpha*`` minimizes ``||z + alpha y||``, so
    ``x`` is BJ-orthogonal to ``y`` by construction; the solver re-checks it.
    The first qualifying trial is reported.  Hilbert C*-modules are skipped.
    """
    if desc.conjugate_symmetric:
        return skipped("converse_witness", "Hilbert C*-module: no counterexample expected")
    z = trial_normals(seed, ("converse", desc.label()), trials, 2 * desc.coord_count)
    Z = desc.from_coords(z[:, :desc.coord_count])
    Y = desc.from_coords(z[:, desc.coord_count:])
    budget = f"search budget {trials} trials"
    # chunked so the search stops at the first qualifying trial
    for start in range(0, trials, CONVERSE_CHUNK):
        idx = np.arange(start, min(start + CONVERSE_CHUNK, trials))
        Zc, Yc = _take(Z, idx), _take(Y, idx)
        first = bj_minimize_batch(desc, Zc, Yc, policy)
        Xc = ms._tree_map(np.add, Zc, desc.scale(Yc, first.alpha_star))
        again = bj_minimize_batch(desc, Xc, Yc, policy)
        ratio = alg.cstar_norm(desc.csip(Xc, Yc)) / np.maximum(again.base_norm * ms._norm_payload(desc, Yc), 1e-300)
        hits = np.flatnonzero(again.is_orthogonal & (ratio > CONVERSE_RATIO))
        if hits.size:
            j = int(hits[0])
            i = int(idx[j])
            witness = {"x": ms._literal(desc, Xc, j), "y": ms._literal(desc, Yc, j), "bj": again[j].to_json(),
                       "ratio": float(ratio[j]), "trial": i}
            return _found("converse_witness", trials, float(ratio[j] - CONVERSE_RATIO), witness,
                          f"found at trial {i}; {budget}")
    return _not_found("converse_witness", trials, budget)


def find_defect_witness(desc, trials, seed, policy=DEFAULT_POLICY):
    """Search for ``x, y`` with ``||[x, y] - [y, x]*|| > 0.1``."""
    if desc.conjugate_symmetric:
        return skipped("hermitian_defect_witness", "Hilbert C*-module: no counterexample expected")
    z = trial_normals(seed, ("defect", desc.label()), trials, 2 * desc.coord_count)
    X = desc.from_coords(z[:, :desc.coord_count])
    Y = desc.from_coords(z[:, desc.coord_count:])
    defect = alg.cstar_norm(desc.csip(X, Y) - alg.star(desc.csip(Y, X)))
    hits = np.flatnonzero(defect > DEFECT_THRESHOLD)
    budget = f"search budget {trials} trials"
    if hits.size == 0:
        return _not_found("hermitian_defect_witness", trials, budget)
    i = int(hits[0])
    witness = {"x": ms._literal(desc, X, i), "y": ms._literal(desc, Y, i), "defect": float(defect[i]), "trial": i}
    return _found("hermitian_defect_witness", trials, float(defect[i] - DEFECT_THRESHOLD), witness,
                  f"found at trial {i}; {budget}")


def _found(prop, trials, margin, witness, note):
    return VerificationReport(prop, trials, 0, margin, witness, tolerance=0.0, note=note)


def _not_found(prop, trials, budget):
    # inconclusive rather than a disproof; counts as one failure of a non-mandatory search
    return VerificationReport(prop, trials, 1, -1.0, None, tolerance=0.0, note=f"no witness found; {budget}")


def reverify_converse(witness, policy=DEFAULT_POLICY):
    """Recheck a converse witness from its serialized literals alone."""
    x = ms.element_from_json(witness["x"])
    y = ms.element_from_json(witness["y"])
    desc = x.descriptor
    res = bj_minimize(desc, x, y, policy)
    ratio = alg.cstar_norm(ms.csip(desc, x, y)) / (ms.triple_norm(desc, x) * ms.triple_norm(desc, y))
    return bool(res.is_orthogonal and ratio > CONVERSE_RATIO)


def reverify_defect(witness):
    x = ms.element_from_json(witness["x"])
    y = ms.element_from_json(witness["y"])
    return bool(ms.hermitian_defect(x.descriptor, x, y) > DEFECT_THRESHOLD)

"""Acceptance criteria 1-10, one pass/fail line each (see the terminal summary)."""

import io
import json
import time

import numpy as np

from cstar_sip import algebra as alg
from cstar_sip import cli, faults, harness
from cstar_sip import module_sip as ms
from cstar_sip import operators as ops
from cstar_sip import orthogonality as orth
from cstar_sip.rng import trial_generator
from cstar_sip.sip_classical import Hilbert, LpGiles

SEED = 20240601
BIG = 10_000
PAIRS = 1_000
CONSTRUCTIONS = harness.acceptance_constructions()
RESULTS = {}


def record(n, ok, detail):
    line = f"acceptance criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def test_criterion_01_axioms():
    t0 = time.perf_counter()
    reps = {d: ms.verify_axioms(d, BIG, SEED) for d in CONSTRUCTIONS}
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in reps.values())
    # the positivity margin is already normalized by 1 + ||[x, x]||
    worst = min(r.find("positivity").worst_margin for r in reps.values())
    both_cs = all(r.find("cauchy_schwarz_operator").passed and r.find("cauchy_schwarz_scalar").passed
                  for r in reps.values())
    trials = min(r.find("positivity").trials for r in reps.values())
    ok = ok and worst >= -1e-8 and both_cs and trials >= BIG and elapsed <= 60
    record(1, ok, f"{len(reps)} constructions x {trials} trials, worst positivity margin {worst:.2e}, "
                  f"{elapsed:.1f}s (limit 60s)")


def test_criterion_02_norm_properties():
    worst, ok = np.inf, True
    for d in CONSTRUCTIONS:
        rep = ms.verify_norm_properties(d, BIG, SEED)
        ok &= rep.passed and rep.find("cubic_identity").tolerance <= 1e-9
        worst = min(worst, rep.worst_margin)
    record(2, ok, f"triangle, homogeneity, separation, submultiplicativity, cubic identity; worst margin {worst:.2e} "
                  f"(tolerance 1e-9) over {BIG} trials each")


def test_criterion_03_finsler():
    ok, worst_f, worst_t, comm = True, np.inf, np.inf, 0
    for d in CONSTRUCTIONS:
        rep = ms.verify_finsler(d, BIG, SEED)
        f = rep.find("finsler_identity")
        ok &= rep.passed and f.tolerance <= 1e-9
        worst_f = min(worst_f, f.worst_margin)
        tri = rep.find("operator_triangle")
        if alg.is_commutative(d.algebra):
            comm += 1
            ok &= not tri.skipped and tri.passed and tri.tolerance <= 1e-9
            worst_t = min(worst_t, tri.worst_margin)
    record(3, ok, f"Finsler identity worst {worst_f:.2e}; operator triangle on {comm} commutative "
                  f"constructions worst {worst_t:.2e}")


def test_criterion_04_transport():
    transported = [d for d in CONSTRUCTIONS if isinstance(d, ms.Transported)]
    kinds = set()
    ok = True
    worst_csip = worst_norm = np.inf
    for d in transported:
        for verify in (ms.verify_axioms, ms.verify_norm_properties, ms.verify_finsler):
            ok &= verify(d, BIG, SEED).passed
        rep = ms.verify_transport(d, BIG, SEED, csip_tol=1e-12, norm_tol=1e-10)
        ok &= rep.passed
        worst_csip = min(worst_csip, rep.find("csip_identity").worst_margin)
        worst_norm = min(worst_norm, rep.find("norm_preserved").worst_margin)
        kinds.add(type(d.iso).__name__)
    ok &= {"PermuteOmega", "UnitaryConj"} <= kinds
    record(4, ok, f"{len(transported)} transported modules ({', '.join(sorted(kinds))}); csip identity worst "
                  f"{worst_csip:.1e} (<= 1e-12), norm worst {worst_norm:.1e} (<= 1e-10)")


def test_criterion_05_zero_pairing_orthogonal():
    violations, total = 0, 0
    for d in CONSTRUCTIONS:
        rep = orth.verify_thm31(d, PAIRS, SEED)
        bj = rep.find("bj_orthogonal")
        violations += rep.failures
        total += bj.trials
    record(5, violations == 0, f"{total} s.i.p.-orthogonal pairs over {len(CONSTRUCTIONS)} constructions, "
                               f"{violations} violations of min ||x + a y|| >= ||x|| - 1e-7 (1 + ||x||)")


def test_criterion_06_converse_witness():
    desc = ms.Bundle((LpGiles(2, 3), LpGiles(2, 3)))
    conv = orth.find_converse_witness(desc, PAIRS, SEED)
    defect = orth.find_defect_witness(desc, PAIRS, SEED)
    ok = conv.passed and defect.passed
    if ok:
        # re-verify from the serialized report alone
        c = json.loads(json.dumps(conv.to_json()))["witness"]
        dw = json.loads(json.dumps(defect.to_json()))["witness"]
        ok = orth.reverify_converse(c) and orth.reverify_defect(dw)
        detail = f"converse ratio {c['ratio']:.3f} at trial {c['trial']}, defect {dw['defect']:.3f} at trial {dw['trial']}"
    else:
        detail = f"{conv.note}; {defect.note}"
    record(6, ok, detail + " (both re-verified from JSON)")


def test_criterion_07_dual_norm():
    ok, worst_rel, worst_cs = True, 0.0, np.inf
    for d in CONSTRUCTIONS:
        rep = ops.dual_norm_check(d, BIG, SEED)
        ok &= rep.passed
        for c in rep.checks:
            if c.property.startswith("dual_norm"):
                worst_rel = max(worst_rel, 1e-3 - c.worst_margin)
            else:
                worst_cs = min(worst_cs, c.worst_margin)
    record(7, ok, f"max |op_norm_lb - ||y||| / ||y|| = {worst_rel:.1e} (<= 1e-3); Cauchy-Schwarz worst margin "
                  f"{worst_cs:.1e} over {BIG} samples")


def _hilbert_bundles():
    h1, h2, h3 = Hilbert(1), Hilbert(2), Hilbert(3)
    return [ms.Bundle((h2, h2)), ms.Bundle((h1, h2, h3)),
            ms.Transported(ms.Bundle((h2, h3)), ms.PermuteOmega((1, 0)))]


def test_criterion_08_min_k():
    bundles = _hilbert_bundles()
    err_k = err_n = 0.0
    ok = True
    for k in range(100):
        desc = bundles[k % len(bundles)]
        T = ops.random_operator(desc, trial_generator(SEED, ("criterion8",), k))
        base = T.base if isinstance(T, ops.TransportedOperator) else T
        exact_k = max(np.linalg.norm(b, 2) for b in base.blocks) ** 2
        rep = ops.min_K(T, 200, SEED + k)
        err_k = max(err_k, abs(rep.k_min_est - exact_k) / (1 + exact_k))
        err_n = max(err_n, abs(rep.op_norm_exact - np.sqrt(rep.k_min_est)) / (1 + rep.op_norm_exact))
        fresh = ops.validate_k(T, rep.k_min_est * (1 + 1e-9), BIG, SEED + 1000 + k)
        ok &= fresh.passed
    reg_ok, reg_worst = True, 0.0
    for d in CONSTRUCTIONS:
        X = ms._draw(d, SEED, ("criterion8_reg", d.label()), BIG, ["module"])[0]
        for n in ops.REGULARIZER_STEPS:
            nrm = ms._norm_payload(d, ops._regularize_payload(d, X, n))
            reg_worst = max(reg_worst, float(nrm.max()))
            reg_ok &= bool(np.all(nrm <= 1 + 1e-9))
    ok = ok and err_k <= 1e-6 and err_n <= 1e-6 and reg_ok
    record(8, ok, f"100 Hilbert-fiber operators: K error {err_k:.1e}, norm error {err_n:.1e} (<= 1e-6), "
                  f"order validated at K(1+1e-9); max ||x_n|| = {reg_worst:.12f}")


def test_criterion_09_johnson():
    ok, worst, draws = True, np.inf, 0
    for d in CONSTRUCTIONS:
        gen = trial_generator(SEED, ("criterion9", d.label()), 0)
        for T in (ops.random_operator(d, gen), ops.random_dual(d, gen)):
            cod = d.algebra if isinstance(T, ops.DualFunctional) else T.codomain
            rep = ops.johnson_property_check(d, cod, T, None, PAIRS, SEED)
            concl = rep.find("r_equals_r1_a")
            ok &= rep.passed and concl.tolerance <= 1e-9
            worst = min(worst, concl.worst_margin)
            draws += concl.trials
    record(9, ok, f"r(a) = r(1) a over {draws} (y, x, a, T) draws, worst relative error {-worst:.1e} (<= 1e-9)")


def _cli_verify(args):
    out = io.StringIO()
    code = cli.main(["verify"] + args, out=out)
    payload = json.loads(out.getvalue())
    payload.pop("timing")
    return code, json.dumps(payload, sort_keys=True)


def test_criterion_10_determinism_and_negative_controls():
    args = ["--seed", "42", "--trials", "100"]
    code_a, a = _cli_verify(args)
    code_b, b = _cli_verify(args)
    deterministic = code_a == code_b == 0 and a == b
    modes = {}
    for mode in faults.FAULT_MODES:
        code, text = _cli_verify(args + ["--fault-inject", mode,
                                         "--suite", "axioms", "--suite", "norms", "--suite", "finsler",
                                         "--suite", "fullness", "--suite", "transport", "--suite", "operators"])
        failed = {e["suite"] for e in json.loads(text)["suites"] if e["status"] == "fail"}
        modes[mode] = code == 1 and failed == {faults.TARGET_SUITE[mode]}
    ok = deterministic and all(modes.values()) and len(modes) >= 4
    record(10, ok, f"byte-identical payloads: {deterministic}; fault modes tripping only their target: "
                   + ", ".join(f"{m}={'yes' if v else 'no'}" for m, v in modes.items()))

"""Command line entry point.

Exit status: 0 when every mandatory check passes, 1 on a property violation,
2 on a usage error (bad flags, malformed JSON, unknown kinds).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import faults  # noqa: F401  registers the fault kinds for JSON loading
from . import harness
from . import module_sip as ms
from . import operators as ops
from . import orthogonality as orth
from .errors import DomainError, PreconditionError, StructuralError, UsageError
from .report import schemas

EXIT_PASS, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _dump(obj, out):
    out.write(json.dumps(obj, sort_keys=True, indent=2, allow_nan=False))
    out.write("\n")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _suite_flags(p):
    p.add_argument("config", nargs="?", help="SuiteConfig JSON file (defaults apply when omitted)")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--policy-file", help="JSON object with tol_eq, tol_pos, tol_opt")
    p.add_argument("--suite", action="append", choices=harness.SUITES,
                   help="restrict to this suite (repeatable)")
    p.add_argument("--fault-inject", choices=faults.FAULT_MODES, help="run a negative control")


def build_parser():
    parser = _Parser(prog="cstar-sip", description="Numerical checks for C*-semi-inner-product modules.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _suite_flags(sub.add_parser("verify", help="run property suites; RunReport JSON on stdout"))
    _suite_flags(sub.add_parser("counterexample", help="search for converse and Hermitian-defect witnesses"))

    p = sub.add_parser("orthogonality", help="Birkhoff-James minimization for an element pair")
    p.add_argument("file", help='JSON {"x": element, "y": element}')
    p.add_argument("--policy-file")
    p.add_argument("--plot", metavar="PNG", help="write the real-line profile of ||x + a y||")

    p = sub.add_parser("opnorm", help="operator norm bounds and least K")
    p.add_argument("file", help='JSON operator literal, or {"operator": ..., "samples": N, "seed": S}')
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--policy-file")

    p = sub.add_parser("report", help="print the JSON schemas or render a run report")
    p.add_argument("run", nargs="?", help="RunReport JSON file")
    p.add_argument("--schema", action="store_true")
    p.add_argument("--out-dir", help="directory for summary.csv and margins.png")
    return parser


def _config_from_args(args):
    obj = _load_json(args.config) if args.config else {}
    if not isinstance(obj, dict):
        raise UsageError("config must be a JSON object")
    obj = dict(obj)
    if args.seed is not None:
        obj["seed"] = args.seed
    if args.trials is not None:
        obj["trials"] = args.trials
    if args.suite:
        obj["suites"] = list(dict.fromkeys(args.suite))
    if args.fault_inject:
        obj["fault_inject"] = args.fault_inject
    if args.policy_file:
        obj["policy"] = _load_json(args.policy_file)
    return harness.SuiteConfig.from_json(obj)


def _policy(args):
    if getattr(args, "policy_file", None):
        return harness.policy_from_json(_load_json(args.policy_file))
    return harness.DEFAULT_POLICY


def cmd_verify(args, out):
    run = harness.run_suites(_config_from_args(args))
    out.write(run.dumps())
    out.write("\n")
    return EXIT_PASS if run.passed else EXIT_VIOLATION


def cmd_counterexample(args, out):
    config = _config_from_args(args)
    run = harness.find_counterexamples(config)
    out.write(run.dumps())
    out.write("\n")
    return EXIT_PASS if run.passed else EXIT_VIOLATION


def cmd_orthogonality(args, out):
    obj = _load_json(args.file)
    try:
        x = ms.element_from_json(obj["x"])
        y = ms.element_from_json(obj["y"])
    except (KeyError, TypeError) as exc:
        raise UsageError('expected {"x": element, "y": element}') from exc
    res = orth.bj_minimize(x.descriptor, x, y, _policy(args))
    _dump(res.to_json(), out)
    if args.plot:
        from .plotting import plot_line_profile

        desc = x.descriptor
        reach = 2.0 * max(abs(res.alpha_star), 1.0)
        alphas = np.linspace(-reach, reach, 401)
        line = ms._tree_map(lambda a, b: a[None] + alphas.reshape((-1,) + (1,) * b.ndim) * b[None],
                            x.payload, y.payload)
        plot_line_profile(alphas, ms._norm_payload(desc, line), res, args.plot)
    return EXIT_PASS


def cmd_opnorm(args, out):
    obj = _load_json(args.file)
    if isinstance(obj, dict) and "operator" in obj:
        op_obj, samples, seed = obj["operator"], obj.get("samples", 1000), obj.get("seed", harness.DEFAULT_SEED)
    else:
        op_obj, samples, seed = obj, 1000, harness.DEFAULT_SEED
    samples = args.samples if args.samples is not None else samples
    seed = args.seed if args.seed is not None else seed
    if not isinstance(samples, int) or samples < 1:
        raise UsageError("samples must be a positive integer")
    T = ops.operator_from_json(op_obj)
    rep = ops.min_K(T, samples, seed, _policy(args))
    _dump(rep.to_json(), out)
    return EXIT_PASS if rep.validation.passed else EXIT_VIOLATION


def cmd_report(args, out):
    if args.schema:
        _dump(schemas(), out)
        return EXIT_PASS
    if not args.run or not args.out_dir:
        raise UsageError("report needs --schema, or a run report file and --out-dir")
    run_json = _load_json(args.run)
    try:
        import jsonschema

        jsonschema.validate(run_json, schemas()["run_report"])
    except jsonschema.ValidationError as exc:
        raise UsageError(f"{args.run} is not a run report: {exc.message}") from exc
    from .plotting import render_report

    csv_path, png_path = render_report(run_json, Path(args.out_dir))
    out.write(f"{csv_path}\n{png_path}\n")
    return EXIT_PASS if run_json["overall"] == "pass" else EXIT_VIOLATION


COMMANDS = {
    "verify": cmd_verify,
    "counterexample": cmd_counterexample,
    "orthogonality": cmd_orthogonality,
    "opnorm": cmd_opnorm,
    "report": cmd_report,
}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except (UsageError, StructuralError, DomainError, PreconditionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

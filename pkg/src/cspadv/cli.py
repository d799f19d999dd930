"""
``cspadv`` command line: ``gen``, ``solve``, ``check`` and ``bench``.

Exit codes: 0 ok, 2 bad arguments or input, 3 algorithm precondition not
met, 4 benchmark threshold violated.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bench
from .csp import check_triangle_free, validate
from .gen import GenSpec, InfeasibleSpec, generate
from .oracle import TooLarge, brute_force_opt, value_distribution
from .report import SolveReport
from .textformat import FormatError, format_instance, read_instance

EXIT_OK, EXIT_SPEC, EXIT_PRECONDITION, EXIT_ASSERT = 0, 2, 3, 4

KINDS = {
    "kxor": "kxor",
    "triangle-free": "triangle_free",
    "complete-cut": "complete_cut",
    "grid-2sat": "grid_2sat",
    "nae-ae": "nae_ae",
    "random-sign-graph": "random_sign_graph",
}


class Precondition(Exception):
    pass


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def cmd_gen(args) -> int:
    spec = GenSpec(KINDS[args.kind], n=args.n, k=args.k, D=args.d, seed=args.seed)
    inst = generate(spec)
    text = format_instance(inst, [f"gen kind={args.kind} n={args.n} k={args.k} D={args.d} seed={args.seed}"])
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _load(path):
    inst = read_instance(path)
    rep = validate(inst)
    if not rep.ok:
        raise FormatError(str(rep))
    return inst


def cmd_solve(args) -> int:
    inst = _load(args.inp)
    if args.alg == "xor3":
        if inst.kxor_arity != 3:
            raise Precondition("xor3 needs a 3XOR instance")
        from .xor3 import Xor3Params, solve_3xor, solve_3xor_derandomized
        if args.derand:
            _, report = solve_3xor_derandomized(inst)
        else:
            _, report = solve_3xor(inst, args.seed, Xor3Params(trials=args.trials))
    elif args.alg == "advrand":
        if not inst.is_kxor:
            raise Precondition("advrand needs a kXOR instance")
        from .advrand import KxorParams, solve_kxor
        _, report = solve_kxor(inst, args.seed, KxorParams(t_scale=args.t_scale, reps=args.reps))
    elif args.alg == "trifree":
        from .trifree import NotTriangleFree, solve_triangle_free
        try:
            _, report = solve_triangle_free(inst, args.seed, reps=args.reps)
        except NotTriangleFree as exc:
            raise Precondition(f"not triangle-free: {exc}") from exc
    else:
        t0 = time.perf_counter()
        try:
            best, x = brute_force_opt(inst)
        except TooLarge as exc:
            raise Precondition(str(exc)) from exc
        report = SolveReport.build("brute", inst, x, best.numerator * inst.m // best.denominator,
                                   seed=args.seed, millis=(time.perf_counter() - t0) * 1000)
    if args.json:
        print(report.to_json(timing=not args.no_timing))
    else:
        print(f"{report.alg}: value {report.value:.6f} (mu {report.mu:.6f}, advantage {report.advantage:+.6f}) "
              f"n={report.n} m={report.m} D={report.D}")
    return EXIT_OK


def cmd_check(args) -> int:
    inst = read_instance(args.inp)
    out: dict = {"n": inst.n, "m": inst.m}
    rep = validate(inst)
    out["valid"] = rep.ok
    out["violations"] = rep.violations
    status = EXIT_OK if rep.ok else EXIT_PRECONDITION
    if args.triangle_free:
        tf = check_triangle_free(inst)
        out["triangle_free"] = {"ok": tf.ok, "kind": tf.kind, "witness": list(tf.witness), "message": tf.describe()}
        if not tf.ok:
            status = EXIT_PRECONDITION
    if args.distribution:
        try:
            hist = value_distribution(inst)
        except TooLarge as exc:
            raise Precondition(str(exc)) from exc
        present = np.flatnonzero(hist)
        out["distribution"] = {str(c): int(hist[c]) for c in present}
        out["max_deviation"] = float(max(abs(c / inst.m - 0.5) for c in present))
    _emit(out)
    return status


def cmd_bench(args) -> int:
    Ds = [int(d) for d in args.d.split(",")]
    rows = bench.run_bench(args.alg, args.n, Ds, args.seeds, k=args.k, master_seed=args.seed, jobs=args.jobs)
    summary = bench.summarize(rows)
    if args.out:
        with open(args.out, "w", newline="") as fp:
            bench.write_csv(rows, summary, fp)
    else:
        bench.write_csv(rows, summary, sys.stdout)
    if args.assert_:
        fails = bench.threshold_failures(args.alg, summary)
        for f in fails:
            print(f"threshold violated: {f}", file=sys.stderr)
        if fails:
            return EXIT_ASSERT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cspadv", description=__doc__.strip().splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--kind", required=True, choices=sorted(KINDS))
    g.add_argument("--n", type=int, default=0)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--d", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run a solver and print a report")
    s.add_argument("--alg", required=True, choices=["xor3", "advrand", "trifree", "brute"])
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--derand", action="store_true", help="deterministic xor3 variant")
    s.add_argument("--trials", type=int, help="xor3 z-trial budget")
    s.add_argument("--t-scale", type=float, help="advrand target constant c_k")
    s.add_argument("--reps", type=int, help="advrand / trifree repetition budget")
    s.add_argument("--json", action="store_true")
    s.add_argument("--no-timing", action="store_true", help="omit millis from JSON")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="validate an instance and report properties")
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--triangle-free", action="store_true")
    c.add_argument("--distribution", action="store_true")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="advantage sweep over D, CSV output")
    b.add_argument("--alg", required=True, choices=list(bench.ALGS))
    b.add_argument("--n", type=int, default=2000)
    b.add_argument("--d", default="4,16,64", help="comma-separated degree bounds")
    b.add_argument("--k", type=int, default=3)
    b.add_argument("--seeds", type=int, default=20)
    b.add_argument("--seed", type=int, default=0, help="master seed")
    b.add_argument("--jobs", type=int, default=bench.default_jobs())
    b.add_argument("--out")
    b.add_argument("--assert", dest="assert_", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Precondition as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (FormatError, InfeasibleSpec, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())

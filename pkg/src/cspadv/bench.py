"""Advantage sweeps over instance families, threshold checks and constant calibration."""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .csp import max_degree
from .gen import random_kxor, triangle_free_random

ALGS = ("xor3", "xor3-derand", "advrand", "trifree")

# acceptance thresholds
KXOR_MIN_SCALED_ADV = 0.01  # mean advantage >= this / sqrt(D)
RATIO_SLACK = 2.0  # ratio within [1/slack, slack] * sqrt(Dmax / Dmin)
TRIFREE_MIN_YARDSTICK_FRACTION = 0.02


def derive_seed(master: int, *path: int) -> int:
    return int(np.random.SeedSequence([master, *path]).generate_state(1)[0])


@dataclass
class BenchRow:
    alg: str
    D: int
    seed: int
    n: int
    m: int
    D_actual: int
    value: float
    advantage: float
    inv_sqrt_D: float
    yardstick: float
    millis: float


def make_instance(alg: str, n: int, k: int, D: int, seed: int):
    if alg == "trifree":
        return triangle_free_random(n, k, D, seed)
    return random_kxor(n, k, D, seed)


def solve(alg: str, inst, seed: int):
    if alg == "xor3":
        from .xor3 import solve_3xor
        return solve_3xor(inst, seed)
    if alg == "xor3-derand":
        from .xor3 import solve_3xor_derandomized
        return solve_3xor_derandomized(inst)
    if alg == "advrand":
        from .advrand import solve_kxor
        return solve_kxor(inst, seed)
    if alg == "trifree":
        from .trifree import solve_triangle_free
        return solve_triangle_free(inst, seed)
    raise ValueError(f"unknown algorithm {alg!r}")


def _run_one(task) -> BenchRow:
    alg, n, k, D, seed_index, master = task
    inst_seed = derive_seed(master, D, seed_index, 0)
    inst = make_instance(alg, n, k, D, inst_seed)
    _, rep = solve(alg, inst, derive_seed(master, D, seed_index, 1))
    return BenchRow(alg, D, seed_index, inst.n, inst.m, max_degree(inst), rep.value, rep.advantage,
                    1 / math.sqrt(D), rep.yardstick, rep.millis)


def default_jobs() -> int:
    return int(os.environ.get("CSPADV_JOBS", "1"))


def run_bench(alg: str, n: int, Ds, seeds: int, k: int = 3, master_seed: int = 0, jobs: int | None = None) -> list[BenchRow]:
    """One row per (D, seed index); rows are deterministic in ``master_seed`` whatever ``jobs`` is."""
    if alg not in ALGS:
        raise ValueError(f"unknown algorithm {alg!r}")
    tasks = [(alg, n, k, D, s, master_seed) for D in Ds for s in range(seeds)]
    jobs = default_jobs() if jobs is None else jobs
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_run_one, tasks))
    return [_run_one(t) for t in tasks]


@dataclass
class Summary:
    D: int
    runs: int
    mean_advantage: float
    mean_yardstick: float
    inv_sqrt_D: float


def summarize(rows: list[BenchRow]) -> list[Summary]:
    out = []
    for D in sorted({r.D for r in rows}):
        sel = [r for r in rows if r.D == D]
        out.append(Summary(D, len(sel), float(np.mean([r.advantage for r in sel])),
                           float(np.mean([r.yardstick for r in sel])), 1 / math.sqrt(D)))
    return out


def threshold_failures(alg: str, summary: list[Summary]) -> list[str]:
    """Human-readable list of violated thresholds (empty when all pass)."""
    fails = []
    if alg == "trifree":
        for s in summary:
            need = TRIFREE_MIN_YARDSTICK_FRACTION * s.mean_yardstick
            if not s.mean_advantage >= need:
                fails.append(f"D={s.D}: mean advantage {s.mean_advantage:.4g} < {need:.4g}")
        return fails
    for s in summary:
        need = KXOR_MIN_SCALED_ADV * s.inv_sqrt_D
        if not s.mean_advantage >= need:
            fails.append(f"D={s.D}: mean advantage {s.mean_advantage:.4g} < {need:.4g}")
    if len(summary) >= 2:
        lo, hi = summary[0], summary[-1]
        target = math.sqrt(hi.D / lo.D)
        ratio = lo.mean_advantage / hi.mean_advantage if hi.mean_advantage > 0 else math.inf
        if not target / RATIO_SLACK <= ratio <= target * RATIO_SLACK:
            fails.append(f"D={lo.D}:D={hi.D} advantage ratio {ratio:.3g} outside "
                         f"[{target / RATIO_SLACK:.3g}, {target * RATIO_SLACK:.3g}]")
    return fails


def write_csv(rows: list[BenchRow], summary: list[Summary], fp) -> None:
    w = csv.writer(fp)
    fields = list(BenchRow.__dataclass_fields__)
    w.writerow(["kind", *fields])
    for r in rows:
        w.writerow(["row", *(_fmt(v) for v in asdict(r).values())])
    for s in summary:
        d = {"alg": rows[0].alg if rows else "", "D": s.D, "seed": "", "n": "", "m": "", "D_actual": "",
             "value": "", "advantage": s.mean_advantage, "inv_sqrt_D": s.inv_sqrt_D,
             "yardstick": s.mean_yardstick, "millis": ""}
        w.writerow(["mean", *(_fmt(d[f]) for f in fields)])


def _fmt(v):
    return f"{v:.6g}" if isinstance(v, float) else v


# --------------------------------------------------------------------------
# calibration

def calibrate_advrand(ks=(2, 3, 4, 5, 6, 7, 8), n: int = 1000, D: int = 8, seeds: int = 5,
                      reps: int = 200, fraction: float = 0.5) -> dict:
    """``c_k = fraction * median_rep |g(x)| / sqrt(m / D)`` on random kXOR instances."""
    from .advrand import normalize, rep_values
    from .csp import associated_polynomial

    out = {}
    for k in ks:
        ratios = []
        for s in range(seeds):
            inst = random_kxor(n, k, D, derive_seed(7, k, s))
            g, _ = normalize(associated_polynomial(inst))
            vals = rep_values(g, k, reps, derive_seed(8, k, s))
            ratios.append(np.median(vals) / math.sqrt(inst.m / max_degree(inst)))
        out[str(k)] = round(fraction * float(np.median(ratios)), 4)
    return out


def calibrate_xor3(n: int = 2000, Ds=(4, 16, 64), seeds: int = 5, draws: int = 200) -> float:
    """
    ``c0`` such that ``sum_i sqrt(deg i) / (c0 m)`` sits at 90% of the lowest
    per-D median of ``sum_i |G_i(z)|`` over uniform z, in yardstick units.
    """
    from .csp import sqrt_degree_yardstick
    from .xor3 import decouple

    meds = []
    for D in Ds:
        per = []
        for s in range(seeds):
            inst = random_kxor(n, 3, D, derive_seed(9, D, s))
            df = decouple(inst)
            rng = np.random.default_rng(derive_seed(10, D, s))
            Z = rng.choice(np.array([-1, 1], dtype=np.int8), size=(draws, inst.n))
            vals = np.abs(df.G(Z)).sum(axis=1)
            per.append(np.median(vals) / sqrt_degree_yardstick(inst))
        meds.append(float(np.median(per)))
    return round(1 / (0.9 * min(meds)), 3)


def write_calibration(path: Path | None = None, **kwargs) -> dict:
    path = path or Path(__file__).with_name("calibration.json")
    table = calibrate_advrand(**kwargs)
    table["default"] = min(table.values())
    data = {
        "version": 2,
        "provenance": (f"cspadv.bench.write_calibration on {date.today().isoformat()}: "
                       "advrand_t_scale = 0.5 x median per-repetition |g(x)|/sqrt(m/D) on random kXOR "
                       "(n=1000, D=8, 5 instances x 200 repetitions); xor3_target_scale puts the z-target "
                       "at 90% of the median sum|G_i(z)| (n=2000, D in 4/16/64, 5 instances x 200 draws)"),
        "constants": {"xor3_target_scale": calibrate_xor3(), "advrand_t_scale": table},
    }
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return data

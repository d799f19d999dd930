import itertools

import numpy as np
import pytest

from cspadv.csp import Instance
from cspadv.fourier import MultilinearPoly


def random_poly(rng, n, degree, n_terms=None, homogeneous=False, with_constant=True):
    """Random multilinear polynomial on n variables of degree at most ``degree``."""
    n_terms = n_terms or int(rng.integers(1, 3 * n + 2))
    terms = {}
    if with_constant and not homogeneous:
        terms[()] = float(rng.normal())
    sizes = [degree] if homogeneous else list(range(1, degree + 1))
    for _ in range(n_terms):
        d = min(int(rng.choice(sizes)), n)
        key = tuple(sorted(rng.choice(n, size=d, replace=False).tolist()))
        terms[key] = float(rng.normal())
    return MultilinearPoly(n, terms)


def random_small_kxor(rng, n, k, m):
    """kXOR instance with m distinct scopes drawn uniformly (no degree cap)."""
    all_sets = list(itertools.combinations(range(n), k))
    m = min(m, len(all_sets))
    pick = rng.choice(len(all_sets), size=m, replace=False)
    scopes = [all_sets[i] for i in pick]
    signs = rng.choice([-1, 1], size=m)
    return Instance.kxor(n, scopes, signs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    lines = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" not in props or (rep.when != "call" and status == "passed"):
                continue
            num = props["criterion"]
            verdict = "PASS" if status == "passed" else "FAIL"
            if lines.get(num, ("PASS",))[0] == "FAIL":
                continue
            elapsed = props.get("elapsed_s", "?")
            lines[num] = (verdict, f"criterion {num:>2}: {verdict}  ({elapsed}s / limit {props['limit_s']}s)"
                                   + (f"  {props['detail']}" if "detail" in props else ""))
    if lines:
        terminalreporter.section("acceptance criteria")
        for num in sorted(lines):
            terminalreporter.write_line(lines[num][1])

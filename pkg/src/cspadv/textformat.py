"""
Plain-text instance format.

::

    # comment
    p csp <n> <m>
    c <r> <v1> ... <vr> <hex truth table>    generic constraint
    x <k> <v1> ... <vk> <+1|-1>              prod x_vi == b

Variables are 0-based. Hex tables put row 0 in the least significant bit,
rows indexed by the convention of :mod:`cspadv.fourier`.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable

from .csp import Instance, Predicate, xor


class FormatError(ValueError):
    pass


def parse_instance(text: str) -> Instance:
    header = None
    constraints = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        try:
            if tok[0] == "p":
                if tok[1] != "csp" or len(tok) != 4:
                    raise FormatError("header must be 'p csp <n> <m>'")
                header = (int(tok[2]), int(tok[3]))
            elif tok[0] in ("c", "x"):
                if header is None:
                    raise FormatError("constraint before header")
                r = int(tok[1])
                if len(tok) != r + 3:
                    raise FormatError(f"expected {r} variables and a table/sign")
                scope = tuple(int(v) for v in tok[2 : 2 + r])
                if tok[0] == "c":
                    pred = Predicate.from_hex(r, tok[-1])
                else:
                    b = int(tok[-1])
                    if b not in (1, -1):
                        raise FormatError("xor sign must be +1 or -1")
                    pred = xor(r, b)
                constraints.append((pred, scope))
            else:
                raise FormatError(f"unknown line type {tok[0]!r}")
        except (ValueError, IndexError) as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
    if header is None:
        raise FormatError("missing 'p csp' header")
    n, m = header
    if m != len(constraints):
        raise FormatError(f"header declares {m} constraints, found {len(constraints)}")
    return Instance(n, constraints)


def format_instance(inst: Instance, comments: Iterable[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"p csp {inst.n} {inst.m}")
    for pred, scope in inst:
        vs = " ".join(str(v) for v in scope)
        b = pred.parity_sign()
        if b is not None:
            lines.append(f"x {pred.arity} {vs} {b:+d}")
        else:
            lines.append(f"c {pred.arity} {vs} {pred.to_hex()}")
    return "\n".join(lines) + "\n"


def read_instance(path) -> Instance:
    return parse_instance(Path(path).read_text())


def write_instance(inst: Instance, path, comments: Iterable[str] = ()) -> None:
    Path(path).write_text(format_instance(inst, comments))

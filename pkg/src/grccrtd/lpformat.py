"""CPLEX LP text export of a :class:`~grccrtd.rlt.LiftedLp`.

Columns are named ``x<i>`` for the dispatch entries and ``X<i>_<j>`` for the
lifted products.  The constant objective term is not part of the format and
is written as a comment.
"""

from __future__ import annotations

import io
import math

from .rlt import LiftedLp, triu_pairs

TERMS_PER_LINE = 6


def column_names(lp: LiftedLp) -> list[str]:
    iu, ju = triu_pairs(lp.n)
    return [f"x{i}" for i in range(lp.n)] + [f"X{i}_{j}" for i, j in zip(iu, ju)]


def _num(v: float) -> str:
    return repr(float(v) + 0.0)


def _linear(coefs, names, idx) -> list[str]:
    parts = []
    for j, v in zip(idx, coefs):
        if v == 0.0:
            continue
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {_num(abs(v))} {names[j]}")
    if not parts:
        parts.append(f"+ 0 {names[0]}")
    lines = [" ".join(parts[i:i + TERMS_PER_LINE]) for i in range(0, len(parts), TERMS_PER_LINE)]
    return lines


def _rows(f, A, b, op: str, kinds, prefix: str, names) -> None:
    A = A.tocsr()
    for r in range(A.shape[0]):
        lo, hi = A.indptr[r], A.indptr[r + 1]
        body = _linear(A.data[lo:hi], names, A.indices[lo:hi])
        f.write(f" {prefix}{r}_{kinds[r]}: " + "\n   ".join(body) + f" {op} {_num(b[r])}\n")


def write_lp(lp: LiftedLp, stream=None) -> str:
    """Write ``lp`` in CPLEX LP format; returns the text when ``stream`` is None."""
    f = io.StringIO() if stream is None else stream
    names = column_names(lp)
    f.write(f"\\ lifted dispatch LP: {lp.n} dispatch columns, {lp.n_pairs} product columns\n")
    f.write(f"\\ objective offset: {_num(lp.c0)}\n")
    f.write("Minimize\n obj: " + "\n   ".join(_linear(lp.c, names, range(lp.n_cols))) + "\n")
    f.write("Subject To\n")
    _rows(f, lp.A_ub, lp.b_ub, "<=", lp.row_kinds, "u", names)
    _rows(f, lp.A_eq, lp.b_eq, "=", lp.eq_kinds, "e", names)
    f.write("Bounds\n")
    for name, lo, hi in zip(names, lp.lb, lp.ub):
        if math.isinf(lo) and math.isinf(hi):
            f.write(f" {name} free\n")
        else:
            lo_s = "-inf" if math.isinf(lo) else _num(lo)
            hi_s = "+inf" if math.isinf(hi) else _num(hi)
            f.write(f" {lo_s} <= {name} <= {hi_s}\n")
    f.write("End\n")
    if stream is None:
        return f.getvalue()
    return ""


def objective_offset(text: str) -> float:
    for line in text.splitlines():
        if line.startswith("\\ objective offset:"):
            return float(line.split(":", 1)[1])
    return 0.0


__all__ = ["write_lp", "column_names", "objective_offset"]

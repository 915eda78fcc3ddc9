"""Free-format MPS export and import.

The export states ``OBJSENSE MAX`` and explicit bounds for every column, so
integer columns are never read with a default 0/1 range. For solvers that
ignore ``OBJSENSE``, ``negate=True`` writes the equivalent minimisation of the
negated objective; :func:`parse_mps` undoes the negation.

Objective coefficients with a finite decimal expansion are written exactly.
Others (for instance probabilities of 1/3) are written as the nearest double.
"""

from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .lp import LpProblem
from .mip import MipProblem

__all__ = ["export_mps", "parse_mps", "mps_text", "MpsError"]

_SENSE_CODE = {"<=": "L", ">=": "G", "=": "E"}
_CODE_SENSE = {v: k for k, v in _SENSE_CODE.items()}
_SUPPORTED = ("NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA")


class MpsError(ValueError):
    pass


def _num(x) -> str:
    """Shortest exact decimal for finite expansions, else the double's repr."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d == 1:
        places = 0
        while (x * 10**places).denominator != 1:
            places += 1
        q = x * 10**places
        s = str(abs(q.numerator)).rjust(places + 1, "0")
        return ("-" if x < 0 else "") + s[:-places] + "." + s[-places:]
    return repr(float(x))


def _names(problem: LpProblem):
    cols = problem.var_names or tuple(f"x{k + 1}" for k in range(problem.n_vars))
    rows = problem.row_names or tuple(f"r{k + 1}" for k in range(problem.n_rows))
    for kind, names in (("column", cols), ("row", rows)):
        bad = [nm for nm in names if not nm or any(ch.isspace() for ch in nm)]
        if bad or len(set(names)) != len(names):
            raise MpsError(f"{kind} names must be unique and free of whitespace")
    return cols, rows


def mps_text(problem: MipProblem, name: str = "TSS3DKP", negate: bool = False) -> str:
    lp = problem.lp
    cols, rows = _names(lp)
    obj_row = "obj"
    while obj_row in rows:
        obj_row += "_"
    out = [f"NAME {name}"]
    if negate:
        out.append("* objective negated: minimise -f to maximise f")
    else:
        out += ["OBJSENSE", "    MAX"]
    out += ["ROWS", f" N {obj_row}"]
    out += [f" {_SENSE_CODE[s]} {r}" for s, r in zip(lp.senses, rows)]

    out.append("COLUMNS")
    A = sp.csc_matrix(lp.matrix)
    in_int = False
    for j in range(lp.n_vars):
        if problem.integer[j] != in_int:
            out.append(f"    MARKER 'MARKER' {'INTORG' if problem.integer[j] else 'INTEND'}")
            in_int = problem.integer[j]
        c = -lp.objective[j] if negate else lp.objective[j]
        entries = [(obj_row, c)] if c else []
        lo, hi = A.indptr[j], A.indptr[j + 1]
        entries += [(rows[i], Fraction(repr(float(v)))) for i, v in zip(A.indices[lo:hi], A.data[lo:hi]) if v]
        if not entries:
            entries = [(obj_row, 0)]  # keep the column declared
        out += [f"    {cols[j]} {r} {_num(v)}" for r, v in entries]
    if in_int:
        out.append("    MARKER 'MARKER' INTEND")

    out.append("RHS")
    out += [f"    RHS {r} {_num(Fraction(repr(float(b))))}" for r, b in zip(rows, lp.rhs) if b]

    out.append("BOUNDS")
    for j in range(lp.n_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        c = cols[j]
        if np.isfinite(lo) and lo == hi:
            out.append(f" FX BND {c} {_num(Fraction(repr(float(lo))))}")
            continue
        if not np.isfinite(lo) and not np.isfinite(hi):
            out.append(f" FR BND {c}")
            continue
        if not np.isfinite(lo):
            out.append(f" MI BND {c}")
        else:
            out.append(f" LO BND {c} {_num(Fraction(repr(float(lo))))}")
        if np.isfinite(hi):
            out.append(f" UP BND {c} {_num(Fraction(repr(float(hi))))}")
        else:
            out.append(f" PL BND {c}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def export_mps(problem: MipProblem, vmap=None, path=None, negate: bool = False) -> None:
    """Write ``problem`` to ``path``; names come from the model (``vmap`` is accepted for symmetry with the build step)."""
    if path is None:
        raise ValueError("export_mps needs a path")
    if vmap is not None and tuple(vmap.names) != tuple(problem.lp.var_names or ()):
        raise ValueError("variable map does not belong to this problem")
    Path(path).write_text(mps_text(problem, negate=negate), encoding="utf-8")


def parse_mps(path) -> MipProblem:
    """Read a free-format MPS file written by :func:`export_mps` (or hand-written in the same subset)."""
    text = Path(path).read_text(encoding="utf-8")
    section: Optional[str] = None
    sense = "MIN"
    obj_row = None
    row_names: list[str] = []
    row_sense: dict[str, str] = {}
    row_index: dict[str, int] = {}
    col_index: dict[str, int] = {}
    col_names: list[str] = []
    integer: list[bool] = []
    objective: list[Fraction] = []
    entries: list[tuple[int, int, float]] = []
    rhs: dict[str, float] = {}
    lower: dict[int, float] = {}
    upper: dict[int, float] = {}
    in_int = False

    def column(name: str) -> int:
        if name not in col_index:
            col_index[name] = len(col_names)
            col_names.append(name)
            integer.append(in_int)
            objective.append(Fraction(0))
        return col_index[name]

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("*"):
            continue
        if not raw[0].isspace():
            head = line.split()
            section = head[0].upper()
            if section not in _SUPPORTED:
                raise MpsError(f"line {lineno}: unsupported section {section}")
            if section == "OBJSENSE" and len(head) > 1:
                sense = head[1].upper()
            if section == "ENDATA":
                break
            continue
        tok = line.split()
        if section == "OBJSENSE":
            sense = tok[0].upper()
        elif section == "ROWS":
            code, name = tok[0].upper(), tok[1]
            if code == "N":
                if obj_row is None:
                    obj_row = name
            elif code in _CODE_SENSE:
                row_sense[name] = _CODE_SENSE[code]
                row_index[name] = len(row_names)
                row_names.append(name)
            else:
                raise MpsError(f"line {lineno}: unknown row type {code}")
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1].strip("'\"").upper() == "MARKER":
                in_int = tok[2].strip("'\"").upper() == "INTORG"
                continue
            j = column(tok[0])
            for r, v in zip(tok[1::2], tok[2::2]):
                if r == obj_row:
                    objective[j] += Fraction(v)
                elif r in row_sense:
                    entries.append((row_index[r], j, float(v)))
                else:
                    raise MpsError(f"line {lineno}: unknown row {r}")
        elif section == "RHS":
            for r, v in zip(tok[1::2], tok[2::2]):
                if r != obj_row:
                    rhs[r] = float(v)
        elif section == "BOUNDS":
            kind, name = tok[0].upper(), tok[2]
            j = column(name)
            val = float(tok[3]) if len(tok) > 3 else None
            if kind == "UP":
                upper[j] = val
            elif kind == "LO":
                lower[j] = val
            elif kind == "FX":
                lower[j] = upper[j] = val
            elif kind == "FR":
                lower[j], upper[j] = -math.inf, math.inf
            elif kind == "MI":
                lower[j] = -math.inf
            elif kind == "PL":
                upper[j] = math.inf
            elif kind == "BV":
                lower[j], upper[j] = 0.0, 1.0
                integer[j] = True
            else:
                raise MpsError(f"line {lineno}: unsupported bound type {kind}")
    if sense not in ("MAX", "MIN", "MAXIMIZE", "MINIMIZE"):
        raise MpsError(f"unknown objective sense {sense}")
    n, m = len(col_names), len(row_names)
    obj = objective if sense.startswith("MAX") else [-c for c in objective]
    r, c, v = zip(*entries) if entries else ((), (), ())
    A = sp.csr_matrix((v, (r, c)), shape=(m, n))
    lo = [lower.get(j, 0.0) for j in range(n)]
    hi = [upper.get(j, math.inf) for j in range(n)]
    lp = LpProblem(obj, A, [row_sense[nm] for nm in row_names], [rhs.get(nm, 0.0) for nm in row_names],
                   lo, hi, col_names, row_names)
    return MipProblem(lp, integer)

"""Sparse linear programs, a pluggable solve interface, and LP-format text I/O.

Programs are always minimizations. Rows carry a sense (``"<="``, ``">="`` or
``"="``) and a right-hand side; columns carry bounds and an objective
coefficient. Coefficients are staged as (row, column, value) triplets and
compressed on :meth:`LinearProgram.finalize`; a repeated cell keeps the value
written last.

The bundled solver wraps HiGHS through :func:`scipy.optimize.linprog`. Other
backends register in :data:`SOLVERS`; the default is taken from the
``COPLAN_SOLVER`` environment variable when set.
"""

from __future__ import annotations

import logging
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

LOGGER = logging.getLogger(__name__)

INF = math.inf

LE, GE, EQ = "<=", ">=", "="
_SENSE_ALIASES = {"<=": LE, "=<": LE, "<": LE, "L": LE, ">=": GE, "=>": GE, ">": GE, "G": GE,
                  "=": EQ, "==": EQ, "E": EQ}
_SENSE_CODE = {LE: 0, GE: 1, EQ: 2}
_CODE_SENSE = {v: k for k, v in _SENSE_CODE.items()}

# feasibility and optimality tolerances, relative to (1 + |rhs|)
PRIMAL_TOL = 1e-6
OBJECTIVE_RTOL = 1e-6


class LpError(ValueError):
    """Invalid program construction or I/O."""


class _Buffer:
    """Append-only numpy buffer with amortized growth."""

    def __init__(self, dtype):
        self._data = np.empty(16, dtype=dtype)
        self.size = 0

    def extend(self, values) -> None:
        values = np.asarray(values, dtype=self._data.dtype).ravel()
        need = self.size + len(values)
        if need > len(self._data):
            cap = max(need, 2 * len(self._data))
            grown = np.empty(cap, dtype=self._data.dtype)
            grown[: self.size] = self._data[: self.size]
            self._data = grown
        self._data[self.size: need] = values
        self.size = need

    @property
    def view(self) -> np.ndarray:
        return self._data[: self.size]


def _sense(value: str) -> str:
    try:
        return _SENSE_ALIASES[value]
    except KeyError:
        raise LpError(f"unknown row sense {value!r}") from None


class LinearProgram:
    """A minimization LP assembled column by column and row by row."""

    def __init__(self, name: str = "coplan"):
        self.name = name
        self.col_names: list[str] = []
        self.row_names: list[str] = []
        self._lb = _Buffer(np.float64)
        self._ub = _Buffer(np.float64)
        self._obj = _Buffer(np.float64)
        self._sense = _Buffer(np.int8)
        self._rhs = _Buffer(np.float64)
        self._ti = _Buffer(np.int64)
        self._tj = _Buffer(np.int64)
        self._tv = _Buffer(np.float64)
        self._finalized = False
        self.A: sp.csr_matrix | None = None

    # -- sizes ---------------------------------------------------------------
    @property
    def n_cols(self) -> int:
        return len(self.col_names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)

    @property
    def nnz(self) -> int:
        return self.A.nnz if self._finalized else self._tv.size

    @property
    def finalized(self) -> bool:
        return self._finalized

    @property
    def lb(self) -> np.ndarray:
        return self._lb.view

    @property
    def ub(self) -> np.ndarray:
        return self._ub.view

    @property
    def c(self) -> np.ndarray:
        return self._obj.view

    @property
    def rhs(self) -> np.ndarray:
        return self._rhs.view

    @property
    def sense_codes(self) -> np.ndarray:
        """Row senses as int codes: 0 for <=, 1 for >=, 2 for =."""
        return self._sense.view

    def sense(self, row: int) -> str:
        return _CODE_SENSE[int(self._sense.view[row])]

    # -- construction --------------------------------------------------------
    def _check_open(self):
        if self._finalized:
            raise LpError("program is finalized")

    def add_column(self, name: str, lb: float = 0.0, ub: float = INF, obj: float = 0.0) -> int:
        return int(self.add_columns([name], lb, ub, obj)[0])

    def add_columns(self, names: Sequence[str], lb=0.0, ub=INF, obj=0.0) -> np.ndarray:
        """Append ``len(names)`` columns; bounds and costs broadcast. Returns ids."""
        self._check_open()
        n = len(names)
        lb = np.broadcast_to(np.asarray(lb, dtype=float), (n,))
        ub = np.broadcast_to(np.asarray(ub, dtype=float), (n,))
        if np.isnan(lb).any() or np.isnan(ub).any() or (lb > ub).any():
            bad = int(np.argmax(np.isnan(lb) | np.isnan(ub) | (lb > ub)))
            raise LpError(f"column {names[bad]!r}: lower bound {lb[bad]} > upper bound {ub[bad]}")
        start = self.n_cols
        self.col_names.extend(names)
        self._lb.extend(lb)
        self._ub.extend(ub)
        self._obj.extend(np.broadcast_to(np.asarray(obj, dtype=float), (n,)))
        return np.arange(start, start + n)

    def add_row(self, name: str, sense: str, rhs: float) -> int:
        return int(self.add_rows([name], sense, rhs)[0])

    def add_rows(self, names: Sequence[str], sense, rhs=0.0) -> np.ndarray:
        """Append rows. ``sense`` is one string or one per row."""
        self._check_open()
        n = len(names)
        if isinstance(sense, str):
            codes = np.full(n, _SENSE_CODE[_sense(sense)], dtype=np.int8)
        else:
            codes = np.array([_SENSE_CODE[_sense(s)] for s in sense], dtype=np.int8)
        rhs = np.broadcast_to(np.asarray(rhs, dtype=float), (n,))
        if not np.isfinite(rhs).all():
            raise LpError("row right-hand sides must be finite")
        start = self.n_rows
        self.row_names.extend(names)
        self._sense.extend(codes)
        self._rhs.extend(rhs)
        return np.arange(start, start + n)

    def set_coeff(self, row: int, col: int, value: float) -> None:
        self.add_coeffs([row], [col], [value])

    def add_coeffs(self, rows, cols, values) -> None:
        """Stage coefficient triplets; arrays broadcast against each other."""
        self._check_open()
        rows, cols, values = np.broadcast_arrays(
            np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64), np.asarray(values, dtype=float)
        )
        if rows.size == 0:
            return
        if rows.min() < 0 or rows.max() >= self.n_rows:
            raise LpError(f"unknown row id in {rows[(rows < 0) | (rows >= self.n_rows)][:3].tolist()}")
        if cols.min() < 0 or cols.max() >= self.n_cols:
            raise LpError(f"unknown column id in {cols[(cols < 0) | (cols >= self.n_cols)][:3].tolist()}")
        if not np.isfinite(values).all():
            raise LpError("coefficients must be finite")
        self._ti.extend(rows)
        self._tj.extend(cols)
        self._tv.extend(values)

    def set_bounds(self, cols, lb, ub) -> None:
        self._check_open()
        cols = np.atleast_1d(np.asarray(cols, dtype=np.int64))
        lb, ub = np.broadcast_arrays(np.asarray(lb, dtype=float), np.asarray(ub, dtype=float))
        lb = np.broadcast_to(lb, cols.shape)
        ub = np.broadcast_to(ub, cols.shape)
        if (lb > ub).any():
            raise LpError("lower bound exceeds upper bound")
        self._lb.view[cols] = lb
        self._ub.view[cols] = ub

    def set_objective(self, cols, values) -> None:
        self._check_open()
        self._obj.view[np.asarray(cols, dtype=np.int64)] = values

    def finalize(self) -> "LinearProgram":
        """Compress triplets (last write wins) and freeze the program."""
        if self._finalized:
            return self
        i, j, v = self._ti.view, self._tj.view, self._tv.view
        if len(i):
            key = i * max(self.n_cols, 1) + j
            # stable sort keeps insertion order within a cell; take the last one
            order = np.argsort(key, kind="stable")
            k_sorted = key[order]
            last = np.ones(len(order), dtype=bool)
            last[:-1] = k_sorted[1:] != k_sorted[:-1]
            keep = order[last]
            i, j, v = i[keep], j[keep], v[keep]
        self.A = sp.csr_matrix((v, (i, j)), shape=(self.n_rows, self.n_cols))
        self.A.eliminate_zeros()
        self.A.sort_indices()
        for buf in (self._lb, self._ub, self._obj, self._sense, self._rhs):
            buf.view.setflags(write=False)
        self._ti = self._tj = self._tv = None
        self._finalized = True
        return self

    def coefficient(self, row: int, col: int) -> float:
        self._require_final()
        return float(self.A[row, col])

    def _require_final(self):
        if not self._finalized:
            raise LpError("program must be finalized first")

    # -- checks --------------------------------------------------------------
    def row_activity(self, x: np.ndarray) -> np.ndarray:
        self._require_final()
        return self.A @ x

    def violations(self, x: np.ndarray, tol: float = PRIMAL_TOL) -> list[tuple[str, float]]:
        """Rows and bounds violated by ``x`` beyond ``tol * (1 + |rhs|)``."""
        act = self.row_activity(x)
        rhs = self.rhs
        scale = tol * (1.0 + np.abs(rhs))
        codes = self.sense_codes
        gap = np.where(codes == 0, act - rhs, np.where(codes == 1, rhs - act, np.abs(act - rhs)))
        out = [(self.row_names[r], float(gap[r])) for r in np.nonzero(gap > scale)[0]]
        lb_gap = self.lb - x
        ub_gap = x - self.ub
        for arr, what in ((lb_gap, "lb"), (ub_gap, "ub")):
            bound = self.lb if what == "lb" else self.ub
            with np.errstate(invalid="ignore"):
                bad = np.nonzero(arr > tol * (1.0 + np.abs(np.where(np.isfinite(bound), bound, 0.0))))[0]
            out.extend((f"{self.col_names[j]}.{what}", float(arr[j])) for j in bad)
        return out


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"
NUMERICAL_ERROR = "numerical_error"


@dataclass
class LpSolution:
    status: str
    objective: float = math.nan
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    message: str = ""
    solver: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class Solver(Protocol):
    name: str

    def solve(self, lp: LinearProgram) -> LpSolution: ...


@dataclass
class HighsSolver:
    """HiGHS via scipy. ``method`` is one of ``highs``, ``highs-ds``, ``highs-ipm``."""

    method: str = "highs"
    options: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.method

    def solve(self, lp: LinearProgram) -> LpSolution:
        lp._require_final()
        if lp.n_cols == 0:
            raise LpError("cannot solve an empty program")
        codes = lp.sense_codes
        A = lp.A
        le, ge, eq = (np.nonzero(codes == k)[0] for k in (0, 1, 2))
        ub_rows = np.concatenate([le, ge])
        A_ub = sp.vstack([A[le], -A[ge]]).tocsr() if len(ub_rows) else None
        b_ub = np.concatenate([lp.rhs[le], -lp.rhs[ge]]) if len(ub_rows) else None
        A_eq = A[eq] if len(eq) else None
        b_eq = lp.rhs[eq] if len(eq) else None
        bounds = np.column_stack([lp.lb, lp.ub])
        opts = {"presolve": True, **self.options}
        res = linprog(lp.c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                      method=self.method, options=opts)
        if res.status == 2:
            return LpSolution(INFEASIBLE, message=res.message, solver=self.name)
        if res.status == 3:
            return LpSolution(UNBOUNDED, message=res.message, solver=self.name)
        if res.status == 1:
            return LpSolution(ITERATION_LIMIT, message=res.message, solver=self.name)
        if res.status != 0 or res.x is None:
            return LpSolution(NUMERICAL_ERROR, message=res.message, solver=self.name)

        x = np.asarray(res.x, dtype=float)
        objective = float(lp.c @ x)
        if abs(objective - res.fun) > OBJECTIVE_RTOL * max(1.0, abs(objective)):
            return LpSolution(NUMERICAL_ERROR, message=f"objective mismatch {objective} vs {res.fun}",
                              solver=self.name)
        bad = lp.violations(x)
        if bad:
            name, gap = max(bad, key=lambda t: t[1])
            return LpSolution(NUMERICAL_ERROR, x=x,
                              message=f"{len(bad)} rows violate feasibility tolerance (worst {name}: {gap:.3g})",
                              solver=self.name)
        duals = np.zeros(lp.n_rows)
        ineq = getattr(res, "ineqlin", None)
        if ineq is not None and len(ub_rows):
            m = np.asarray(ineq.marginals)
            duals[le] = m[: len(le)]
            duals[ge] = -m[len(le):]
        eqlin = getattr(res, "eqlin", None)
        if eqlin is not None and len(eq):
            duals[eq] = np.asarray(eqlin.marginals)
        return LpSolution(OPTIMAL, objective, x, duals, res.message, self.name)


SOLVERS: dict = {
    "highs": HighsSolver("highs"),
    "highs-ds": HighsSolver("highs-ds"),
    "highs-ipm": HighsSolver("highs-ipm"),
}

SOLVER_ENV = "COPLAN_SOLVER"


def get_solver(name: str | None = None) -> Solver:
    name = name or os.environ.get(SOLVER_ENV) or "highs"
    try:
        return SOLVERS[name]
    except KeyError:
        raise LpError(f"unknown solver {name!r}; available: {', '.join(sorted(SOLVERS))}") from None


def solve(lp: LinearProgram, solver: str | Solver | None = None) -> LpSolution:
    if not isinstance(solver, (str, type(None))):
        return solver.solve(lp.finalize())
    return get_solver(solver).solve(lp.finalize())


# ---------------------------------------------------------------------------
# LP text format
# ---------------------------------------------------------------------------

_NAME_OK = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")
_NAME_BAD_CHARS = re.compile(r"[^A-Za-z0-9_.]")
_TERMS_PER_LINE = 8


def _lp_names(names: Sequence[str], fallback: str) -> list[str]:
    out, seen = [], set()
    for k, n in enumerate(names):
        m = n if _NAME_OK.match(n) and n[0] not in "eE" else _NAME_BAD_CHARS.sub("_", n)
        if not m or not (m[0].isalpha() or m[0] == "_") or m[0] in "eE":
            m = fallback + "_" + m
        if m in seen:
            m = f"{m}__{fallback}{k}"
        seen.add(m)
        out.append(m)
    return out


def _num(v: float) -> str:
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return repr(float(v))


def _terms(cols: np.ndarray, vals: np.ndarray, names: list[str]) -> Iterable[str]:
    parts = []
    for j, v in zip(cols, vals):
        parts.append(f"{'-' if v < 0 else '+'} {_num(abs(v))} {names[j]}")
    for k in range(0, len(parts), _TERMS_PER_LINE):
        yield " ".join(parts[k: k + _TERMS_PER_LINE])


def export_lp(lp: LinearProgram, path) -> Path:
    """Write ``lp`` in CPLEX LP text format.

    Every column appears in the objective (zero coefficients included) so a
    reader recovers the original column order.
    """
    lp.finalize()
    if lp.n_cols == 0:
        raise LpError("refusing to export an empty program")
    path = Path(path)
    cols = _lp_names(lp.col_names, "x")
    rows = _lp_names(lp.row_names, "r")
    A = lp.A
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"\\ {lp.name}: {lp.n_cols} columns, {lp.n_rows} rows, {lp.nnz} nonzeros\n")
        fh.write("Minimize\n obj:")
        for line in _terms(np.arange(lp.n_cols), lp.c, cols):
            fh.write(f" {line}\n")
        fh.write("Subject To\n")
        sym = {0: "<=", 1: ">=", 2: "="}
        for r in range(lp.n_rows):
            lo, hi = A.indptr[r], A.indptr[r + 1]
            fh.write(f" {rows[r]}:")
            if hi == lo:
                fh.write(f" + 0.0 {cols[0]}\n")
            else:
                for line in _terms(A.indices[lo:hi], A.data[lo:hi], cols):
                    fh.write(f" {line}\n")
            fh.write(f"   {sym[int(lp.sense_codes[r])]} {_num(lp.rhs[r])}\n")
        fh.write("Bounds\n")
        for j in range(lp.n_cols):
            lb, ub = lp.lb[j], lp.ub[j]
            if lb == 0.0 and ub == INF:
                continue
            if lb == -INF and ub == INF:
                fh.write(f" {cols[j]} free\n")
            elif lb == ub:
                fh.write(f" {cols[j]} = {_num(lb)}\n")
            elif ub == INF:
                fh.write(f" {cols[j]} >= {_num(lb)}\n")
            else:
                fh.write(f" {_num(lb)} <= {cols[j]} <= {_num(ub)}\n")
        fh.write("End\n")
    return path


_TOKEN = re.compile(
    r"\s*(?:(?P<sense><=|>=|=<|=>|<|>|=)"
    r"|(?P<num>[+-]?(?:inf(?:inity)?|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?))(?![A-Za-z0-9_.])"
    r"|(?P<sign>[+-])"
    r"|(?P<label>[A-Za-z_][A-Za-z0-9_.]*)\s*:"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_.()\[\],]*))",
    re.IGNORECASE,
)
_SECTIONS = {
    "minimize": "obj", "minimum": "obj", "min": "obj",
    "maximize": "max", "maximum": "max", "max": "max",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "bound": "bounds", "end": "end",
    "general": "int", "generals": "int", "gen": "int", "binary": "int", "binaries": "int", "bin": "int",
}


def _tokens(text: str, where: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise LpError(f"{where}: cannot parse near {text[pos:pos + 30]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def _parse_num(tok: str) -> float:
    t = tok.lower().lstrip("+")
    if t.lstrip("-") in ("inf", "infinity"):
        return -INF if t.startswith("-") else INF
    return float(t)


def read_lp(path) -> LinearProgram:
    """Read the subset of CPLEX LP format written by :func:`export_lp`
    (and by most tools for continuous programs)."""
    path = Path(path)
    sections: dict[str, list[str]] = {"obj": [], "st": [], "bounds": []}
    current = None
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            current = _SECTIONS[key]
            if current == "max":
                raise LpError("maximization programs are not supported")
            if current == "int":
                raise LpError("integer sections are not supported")
            if current == "end":
                break
            continue
        if current is None:
            raise LpError(f"content before objective section: {line!r}")
        sections[current].append(line)

    lp = LinearProgram(path.stem)
    col_of: dict[str, int] = {}
    objective: dict[int, float] = {}

    def col(name: str) -> int:
        j = col_of.get(name)
        if j is None:
            j = lp.add_column(name)
            col_of[name] = j
        return j

    def linear(tokens, where):
        terms, sign, coef = [], 1.0, None
        for kind, val in tokens:
            if kind == "sign":
                sign = -sign if val == "-" else sign
            elif kind == "num":
                coef = _parse_num(val) if coef is None else coef * _parse_num(val)
            elif kind == "name":
                terms.append((val, sign * (1.0 if coef is None else coef)))
                sign, coef = 1.0, None
            else:
                raise LpError(f"{where}: unexpected {val!r}")
        return terms

    toks = _tokens(" ".join(sections["obj"]), "objective")
    if toks and toks[0][0] == "label":
        toks = toks[1:]
    for name, v in linear(toks, "objective"):
        j = col(name)
        objective[j] = objective.get(j, 0.0) + v

    toks = _tokens(" ".join(sections["st"]), "constraints")
    rows_spec = []
    k, n_unnamed = 0, 0
    while k < len(toks):
        label = None
        if toks[k][0] == "label":
            label = toks[k][1]
            k += 1
        start = k
        while k < len(toks) and toks[k][0] != "sense":
            k += 1
        if k + 1 >= len(toks):
            raise LpError(f"constraint {label or start}: missing sense or right-hand side")
        expr, sense = toks[start:k], toks[k][1]
        k += 1
        rsign = 1.0
        while toks[k][0] == "sign":
            rsign = -rsign if toks[k][1] == "-" else rsign
            k += 1
        if toks[k][0] != "num":
            raise LpError(f"constraint {label}: right-hand side must be a constant")
        rhs = rsign * _parse_num(toks[k][1])
        k += 1
        if label is None:
            n_unnamed += 1
            label = f"R{n_unnamed}"
        terms = linear(expr, f"constraint {label}")
        rows_spec.append((label, _sense(sense), rhs, [(col(n), v) for n, v in terms]))

    lb: dict[int, float] = {}
    ub: dict[int, float] = {}
    for line in sections["bounds"]:
        toks = _tokens(line, "bounds")
        kinds = [t[0] for t in toks]
        vals = [t[1] for t in toks]
        if kinds == ["name", "name"] and vals[1].lower() == "free":
            j = col(vals[0])
            lb[j], ub[j] = -INF, INF
        elif kinds == ["name", "sense", "num"]:
            j, v = col(vals[0]), _parse_num(vals[2])
            s = _sense(vals[1])
            if s == EQ:
                lb[j] = ub[j] = v
            elif s == LE:
                ub[j] = v
            else:
                lb[j] = v
        elif kinds == ["num", "sense", "name"]:
            j, v = col(vals[2]), _parse_num(vals[0])
            s = _sense(vals[1])
            if s == EQ:
                lb[j] = ub[j] = v
            elif s == LE:
                lb[j] = v
            else:
                ub[j] = v
        elif kinds == ["num", "sense", "name", "sense", "num"]:
            j = col(vals[2])
            lb[j], ub[j] = _parse_num(vals[0]), _parse_num(vals[4])
        else:
            raise LpError(f"cannot parse bound {line!r}")

    if objective:
        lp.set_objective(list(objective), list(objective.values()))
    if lb or ub:
        cols = sorted(set(lb) | set(ub))
        lp.set_bounds(cols, [lb.get(j, lp.lb[j]) for j in cols], [ub.get(j, lp.ub[j]) for j in cols])
    if rows_spec:
        ids = lp.add_rows([r[0] for r in rows_spec], [r[1] for r in rows_spec], [r[2] for r in rows_spec])
        ri, cj, vv = [], [], []
        for rid, (_, _, _, terms) in zip(ids, rows_spec):
            for j, v in terms:
                ri.append(rid)
                cj.append(j)
                vv.append(v)
        # repeated names within a row accumulate, as LP format prescribes
        A = sp.coo_matrix((vv, (ri, cj)), shape=(lp.n_rows, lp.n_cols)).tocsr()
        A.sum_duplicates()
        coo = A.tocoo()
        lp.add_coeffs(coo.row, coo.col, coo.data)
    return lp.finalize()

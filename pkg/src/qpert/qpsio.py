"""QPS file ingestion, standard-form conversion, and report CSV emission.

The accepted QPS subset is free-format (whitespace-delimited, case
sensitive) with the sections NAME, ROWS, COLUMNS, RHS, BOUNDS, QUADOBJ
and ENDATA in that order; RANGES, OBJSENSE and anything else are rejected
loudly.  QUADOBJ entries are the lower triangle of H for the objective
0.5 x'Hx + c'x and are mirrored to the upper triangle.

Conversion to the equality form adds slack/surplus columns for L/G rows,
shifts finite lower bounds to zero (tracking the constant objective
offset) and turns finite upper bounds into extra slacked rows.  Free
variables are outside the subset and raise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import StandardQP, validate_problem

SECTIONS = ("NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "QUADOBJ", "ENDATA")

TABLE_C_HEADER = (
    "Probs", "m", "n", "mu_lambda_K", "mu_K", "IPM_Itr",
    "actvItr_Per", "actvItr_Unp", "feaErr_Per", "feaErr_Unp",
    "relObjErr_Per", "relObjErr_Unp",
)
_INT_COLUMNS = {"m", "n", "IPM_Itr", "actvItr_Per", "actvItr_Unp"}
_SCI_COLUMNS = {"mu_lambda_K", "mu_K", "feaErr_Per", "feaErr_Unp",
                "relObjErr_Per", "relObjErr_Unp"}


class QpsParseError(ValueError):
    pass


@dataclass
class RawQP:
    name: str = ""
    objective_row: str = ""
    row_names: list = field(default_factory=list)       # constraint rows, file order
    row_sense: dict = field(default_factory=dict)       # row -> 'E' | 'L' | 'G'
    col_names: list = field(default_factory=list)       # first-seen order
    entries: dict = field(default_factory=dict)         # (col, row) -> value
    quad: dict = field(default_factory=dict)            # (col, col) -> value, symmetric
    rhs: dict = field(default_factory=dict)             # row -> value
    bounds: dict = field(default_factory=dict)          # col -> [lo, up]


@dataclass(frozen=True)
class ColumnOrigin:
    name: str
    kind: str          # 'variable' | 'slack' | 'bound_slack'
    source: str        # original column or originating row
    shift: float = 0.0


@dataclass(frozen=True)
class StandardFormMap:
    columns: tuple
    row_names: tuple
    objective_offset: float

    @property
    def original_columns(self) -> tuple:
        return tuple(i for i, col in enumerate(self.columns) if col.kind == "variable")


def parse_qps(text: str) -> RawQP:
    raw = RawQP()
    section = None
    seen = []
    ended = False

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        tokens = line.split()
        head = tokens[0]

        if head in SECTIONS or head in ("RANGES", "OBJSENSE", "SOS") or \
                (head.isupper() and head.isalpha() and section is None):
            if head not in SECTIONS:
                raise QpsParseError(f"line {lineno}: unsupported section {head}")
            if seen and SECTIONS.index(head) <= SECTIONS.index(seen[-1]):
                raise QpsParseError(f"line {lineno}: section {head} out of order")
            seen.append(head)
            section = head
            if head == "NAME":
                raw.name = tokens[1] if len(tokens) > 1 else ""
            if head == "ENDATA":
                ended = True
                break
            continue

        if section == "ROWS":
            _parse_row(raw, tokens, lineno)
        elif section == "COLUMNS":
            _parse_column(raw, tokens, lineno)
        elif section == "RHS":
            _parse_rhs(raw, tokens, lineno)
        elif section == "BOUNDS":
            _parse_bound(raw, tokens, lineno)
        elif section == "QUADOBJ":
            _parse_quad(raw, tokens, lineno)
        else:
            raise QpsParseError(f"line {lineno}: data before any section: {line.strip()}")

    if not ended:
        raise QpsParseError("missing ENDATA")
    if not raw.objective_row:
        raise QpsParseError("no objective (N) row declared")
    return raw


def _parse_row(raw, tokens, lineno):
    if len(tokens) != 2 or tokens[0] not in ("N", "E", "L", "G"):
        raise QpsParseError(f"line {lineno}: malformed ROWS entry")
    sense, name = tokens
    if sense == "N":
        if raw.objective_row:
            raise QpsParseError(f"line {lineno}: second objective row {name}")
        raw.objective_row = name
    else:
        if name in raw.row_sense:
            raise QpsParseError(f"line {lineno}: duplicate row {name}")
        raw.row_names.append(name)
        raw.row_sense[name] = sense


def _known_row(raw, row, lineno, token):
    if row != raw.objective_row and row not in raw.row_sense:
        raise QpsParseError(f"line {lineno}: undefined row {token!r}")


def _parse_column(raw, tokens, lineno):
    if len(tokens) not in (3, 5):
        raise QpsParseError(f"line {lineno}: malformed COLUMNS entry")
    col = tokens[0]
    if col not in raw.bounds:
        raw.col_names.append(col)
        raw.bounds[col] = [0.0, math.inf]
    for row, val in zip(tokens[1::2], tokens[2::2]):
        _known_row(raw, row, lineno, row)
        raw.entries[(col, row)] = raw.entries.get((col, row), 0.0) + _number(val, lineno)


def _parse_rhs(raw, tokens, lineno):
    if len(tokens) not in (3, 5):
        raise QpsParseError(f"line {lineno}: malformed RHS entry")
    for row, val in zip(tokens[1::2], tokens[2::2]):
        if row == raw.objective_row:
            raise QpsParseError(f"line {lineno}: RHS entry for the objective row is unsupported")
        _known_row(raw, row, lineno, row)
        raw.rhs[row] = _number(val, lineno)


def _parse_bound(raw, tokens, lineno):
    if len(tokens) < 3:
        raise QpsParseError(f"line {lineno}: malformed BOUNDS entry")
    btype, _set, col = tokens[0], tokens[1], tokens[2]
    if col not in raw.bounds:
        raise QpsParseError(f"line {lineno}: undefined column {col!r}")
    if btype in ("UP", "LO", "FX"):
        if len(tokens) != 4:
            raise QpsParseError(f"line {lineno}: bound type {btype} needs a value")
        val = _number(tokens[3], lineno)
        if btype == "UP":
            raw.bounds[col][1] = val
        elif btype == "LO":
            raw.bounds[col][0] = val
        else:
            raw.bounds[col] = [val, val]
    elif btype == "FR":
        raw.bounds[col][0] = -math.inf
    elif btype == "MI":
        raw.bounds[col][0] = -math.inf
    elif btype == "PL":
        raw.bounds[col][1] = math.inf
    else:
        raise QpsParseError(f"line {lineno}: unsupported bound type {btype}")


def _parse_quad(raw, tokens, lineno):
    if len(tokens) != 3:
        raise QpsParseError(f"line {lineno}: malformed QUADOBJ entry")
    c1, c2, val = tokens[0], tokens[1], tokens[2]
    for col in (c1, c2):
        if col not in raw.bounds:
            raise QpsParseError(f"line {lineno}: undefined column {col!r}")
    key = tuple(sorted((c1, c2)))
    if key in raw.quad:
        raise QpsParseError(f"line {lineno}: duplicate quadratic entry {c1!r} {c2!r}")
    raw.quad[key] = _number(val, lineno)


def _number(token, lineno):
    try:
        return float(token)
    except ValueError:
        raise QpsParseError(f"line {lineno}: expected a number, got {token!r}") from None


def to_standard_form(raw: RawQP) -> tuple[StandardQP, StandardFormMap]:
    """Convert a parsed problem to the equality form with x >= 0."""
    n0 = len(raw.col_names)
    if n0 == 0:
        raise QpsParseError("problem has no columns")
    col_index = {name: j for j, name in enumerate(raw.col_names)}

    c0 = np.zeros(n0)
    H0 = np.zeros((n0, n0))
    for (col, row), val in raw.entries.items():
        if row == raw.objective_row:
            c0[col_index[col]] = val
    for (c1, c2), val in raw.quad.items():
        i, j = col_index[c1], col_index[c2]
        H0[i, j] = val
        H0[j, i] = val

    m0 = len(raw.row_names)
    A0 = np.zeros((m0, n0))
    row_index = {name: i for i, name in enumerate(raw.row_names)}
    for (col, row), val in raw.entries.items():
        if row != raw.objective_row:
            A0[row_index[row], col_index[col]] = val
    b0 = np.array([raw.rhs.get(name, 0.0) for name in raw.row_names])

    # shift finite lower bounds to zero
    lo = np.zeros(n0)
    ub = np.full(n0, math.inf)
    for name, (l, u) in raw.bounds.items():
        j = col_index[name]
        if not math.isfinite(l):
            raise QpsParseError(f"free variable {name!r} is unsupported in this subset")
        if l > u:
            raise QpsParseError(f"infeasible bounds on {name!r}: [{l}, {u}]")
        lo[j] = l
        ub[j] = u - l
    offset = float(c0 @ lo + 0.5 * lo @ (H0 @ lo))
    c_shift = c0 + H0 @ lo
    b_shift = b0 - A0 @ lo

    columns = [ColumnOrigin(name=nm, kind="variable", source=nm, shift=float(lo[j]))
               for j, nm in enumerate(raw.col_names)]
    rows = list(raw.row_names)

    slack_cols = []      # (row position, sign)
    for i, name in enumerate(raw.row_names):
        sense = raw.row_sense[name]
        if sense == "L":
            slack_cols.append((i, 1.0))
            columns.append(ColumnOrigin(name=f"slack_{name}", kind="slack", source=name))
        elif sense == "G":
            slack_cols.append((i, -1.0))
            columns.append(ColumnOrigin(name=f"surplus_{name}", kind="slack", source=name))

    bound_rows = []      # (column position, shifted upper bound)
    for j, name in enumerate(raw.col_names):
        if math.isfinite(ub[j]):
            bound_rows.append((j, float(ub[j])))
            rows.append(f"ub_{name}")
            columns.append(ColumnOrigin(name=f"ubslack_{name}", kind="bound_slack", source=name))

    m = m0 + len(bound_rows)
    n = n0 + len(slack_cols) + len(bound_rows)
    A = np.zeros((m, n))
    A[:m0, :n0] = A0
    b = np.zeros(m)
    b[:m0] = b_shift
    c = np.zeros(n)
    c[:n0] = c_shift
    H = np.zeros((n, n))
    H[:n0, :n0] = H0

    for k, (i, sign) in enumerate(slack_cols):
        A[i, n0 + k] = sign
    base = n0 + len(slack_cols)
    for k, (j, u) in enumerate(bound_rows):
        A[m0 + k, j] = 1.0
        A[m0 + k, base + k] = 1.0
        b[m0 + k] = u

    qp = StandardQP(H=H, A=A, b=b, c=c, name=raw.name or "qps")
    validate_problem(qp)
    mapping = StandardFormMap(
        columns=tuple(columns),
        row_names=tuple(rows),
        objective_offset=offset,
    )
    return qp, mapping


def qps_text(qp: StandardQP) -> str:
    """Serialize an equality-form problem as a QPS fixture (exact float text)."""
    n, m = qp.n, qp.m
    cols = [f"X{j + 1:07d}" for j in range(n)]
    rows = [f"R{i + 1:07d}" for i in range(m)]
    out = [f"NAME {qp.name}", "ROWS", " N  OBJ"]
    out += [f" E  {name}" for name in rows]
    out.append("COLUMNS")
    for j, col in enumerate(cols):
        if qp.c[j] != 0.0:
            out.append(f" {col} OBJ {qp.c[j]:.17g}")
        for i, row in enumerate(rows):
            if qp.A[i, j] != 0.0:
                out.append(f" {col} {row} {qp.A[i, j]:.17g}")
    out.append("RHS")
    for i, row in enumerate(rows):
        if qp.b[i] != 0.0:
            out.append(f" RHS1 {row} {qp.b[i]:.17g}")
    quad_lines = []
    for i in range(n):
        for j in range(i + 1):
            if qp.H[i, j] != 0.0:
                quad_lines.append(f" {cols[j]} {cols[i]} {qp.H[i, j]:.17g}")
    if quad_lines:
        out.append("QUADOBJ")
        out.extend(quad_lines)
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def write_qps(qp: StandardQP, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(qps_text(qp))


def _format_cell(column: str, value) -> str:
    if value is None:
        return ""
    if column in _SCI_COLUMNS:
        return f"{float(value):.1e}"
    if column in _INT_COLUMNS:
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        return f"{float(value):.1f}"
    return str(value)


def write_report_csv(rows, path) -> None:
    """Write crossover records with the fixed 12-column report schema.

    Error and gap columns use one-decimal scientific notation; count
    columns are integers (aggregate rows may carry fractional means).
    """
    lines = [",".join(TABLE_C_HEADER)]
    for row in rows:
        missing = [k for k in TABLE_C_HEADER if k not in row]
        if missing:
            raise ValueError(f"record is missing columns {missing}")
        lines.append(",".join(_format_cell(col, row[col]) for col in TABLE_C_HEADER))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc

"""MPS reading and writing for inequality-form instances.

The reader tokenizes on whitespace (this also digests classic fixed-format
files, whose fields never contain spaces), converts every constraint to
<= form (G rows are negated, E rows split into opposing pairs, RANGES
become row intervals) and normalizes the objective to maximization.

The 0 <= x <= u variable model is enforced structurally: LO/FX bounds are
removed by shifting or folding the column (the accumulated objective
offset lands in ``instance.meta``); FR/MI bounds cannot be represented and
raise a parse error.
"""

from __future__ import annotations

import numpy as np

from .model import LpInstance

__all__ = ["parse_mps", "write_mps", "MpsParseError"]

_SECTIONS = {"NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"}
_BOUND_TYPES = {"UP", "LO", "FX", "FR", "MI", "PL", "BV"}


class MpsParseError(ValueError):
    """Malformed MPS input; carries the 1-based source line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


def _tokenize(source):
    """Yield (line_no, tokens, is_header) skipping comments and blanks."""
    for line_no, raw in enumerate(source, start=1):
        line = raw.rstrip("\n\r")
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        is_header = not line[0].isspace() and line.split()[0].upper() in _SECTIONS
        yield line_no, line.split(), is_header


def _number(token: str, line_no: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise MpsParseError(f"expected a number, got {token!r}", line_no) from None


def parse_mps(source) -> LpInstance:
    """Parse an MPS file (path or text file object) into an LpInstance.

    The instance is the maximization <=-form equivalent of the file's LP::

        max <c, x>  s.t.  A x <= b,  0 <= x <= u

    ``instance.meta`` records the original objective sense, the additive
    objective offset introduced by sign flips / bound shifts, and the
    row / column name tables for diagnostics.
    """
    if hasattr(source, "read"):
        return _parse(source)
    try:
        with open(source, "r") as fh:
            return _parse(fh)
    except OSError as exc:
        raise OSError(f"cannot read MPS from {source!r}: {exc}") from exc


def _parse(fh) -> LpInstance:
    section = None
    name = ""
    objsense = "MIN"
    obj_row = None
    free_rows: set[str] = set()
    row_order: list[str] = []                     # constraint rows, file order
    row_type: dict[str, str] = {}
    rhs: dict[str, float] = {}
    ranges: dict[str, float] = {}
    obj_rhs = 0.0
    col_order: list[str] = []
    col_entries: dict[str, dict[str, float]] = {}  # col -> {row: value}
    col_obj: dict[str, float] = {}
    bounds: dict[str, dict[str, float | None]] = {}
    saw_endata = False
    pending_objsense = False

    for line_no, tok, is_header in _tokenize(fh):
        if is_header:
            section = tok[0].upper()
            pending_objsense = False
            if section == "NAME":
                name = tok[1] if len(tok) > 1 else ""
            elif section == "OBJSENSE":
                if len(tok) > 1:
                    objsense = tok[1].upper()
                else:
                    pending_objsense = True
            elif section == "ENDATA":
                saw_endata = True
                break
            continue

        if section == "OBJSENSE" and pending_objsense:
            objsense = tok[0].upper()
            pending_objsense = False
            continue
        if section == "ROWS":
            if len(tok) != 2:
                raise MpsParseError("ROWS entries need a type and a name", line_no)
            rtype, rname = tok[0].upper(), tok[1]
            if rtype == "N":
                if obj_row is None:
                    obj_row = rname
                else:
                    free_rows.add(rname)
            elif rtype in ("L", "G", "E"):
                if rname in row_type:
                    raise MpsParseError(f"duplicate row {rname!r}", line_no)
                row_type[rname] = rtype
                row_order.append(rname)
            else:
                raise MpsParseError(f"unknown row type {rtype!r}", line_no)
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1].upper() == "'MARKER'":
                continue  # integrality markers: treated as continuous
            if len(tok) < 3 or len(tok) % 2 == 0:
                raise MpsParseError("COLUMNS entries need name + row/value pairs", line_no)
            cname = tok[0]
            if cname not in col_entries:
                col_entries[cname] = {}
                col_obj[cname] = 0.0
                col_order.append(cname)
            for i in range(1, len(tok), 2):
                rname, val = tok[i], _number(tok[i + 1], line_no)
                if rname == obj_row:
                    col_obj[cname] += val
                elif rname in free_rows:
                    pass  # non-objective free rows carry no constraint
                elif rname in row_type:
                    if rname in col_entries[cname]:
                        raise MpsParseError(
                            f"duplicate entry for column {cname!r}, row {rname!r}", line_no)
                    col_entries[cname][rname] = val
                else:
                    raise MpsParseError(f"unknown row {rname!r}", line_no)
        elif section in ("RHS", "RANGES"):
            pairs = tok[1:] if len(tok) % 2 == 1 else tok
            if len(pairs) % 2 != 0 or not pairs:
                raise MpsParseError(f"{section} entries need row/value pairs", line_no)
            for i in range(0, len(pairs), 2):
                rname, val = pairs[i], _number(pairs[i + 1], line_no)
                if section == "RHS":
                    if rname == obj_row:
                        obj_rhs = val
                    elif rname in row_type:
                        rhs[rname] = val
                    elif rname in free_rows:
                        pass
                    else:
                        raise MpsParseError(f"unknown row {rname!r}", line_no)
                else:
                    if rname not in row_type:
                        raise MpsParseError(f"RANGES on unknown row {rname!r}", line_no)
                    ranges[rname] = val
        elif section == "BOUNDS":
            btype = tok[0].upper()
            if btype not in _BOUND_TYPES:
                raise MpsParseError(f"unknown bound type {btype!r}", line_no)
            needs_value = btype in ("UP", "LO", "FX")
            if len(tok) < (4 if needs_value else 3):
                raise MpsParseError("short BOUNDS entry", line_no)
            cname = tok[2]
            if cname not in col_entries:
                raise MpsParseError(f"bound on unknown column {cname!r}", line_no)
            val = _number(tok[3], line_no) if needs_value else None
            bounds.setdefault(cname, {"lo": 0.0, "up": np.inf})
            bnd = bounds[cname]
            if btype == "UP":
                if val < 0 and bnd["lo"] == 0.0:
                    raise MpsParseError(
                        "UP with a negative value implies a free lower bound, "
                        "which the 0 <= x <= u model cannot represent", line_no)
                bnd["up"] = val
            elif btype == "LO":
                bnd["lo"] = val
            elif btype == "FX":
                bnd["lo"] = bnd["up"] = val
            elif btype == "BV":
                bnd["lo"], bnd["up"] = 0.0, 1.0
            elif btype == "PL":
                bnd["up"] = np.inf
            else:  # FR / MI
                raise MpsParseError(
                    f"{btype} bounds (free below) are unsupported by the "
                    "0 <= x <= u model", line_no)
        elif section in ("NAME", "OBJSENSE"):
            raise MpsParseError(f"unexpected data in section {section}", line_no)
        else:
            raise MpsParseError("data before any section header", line_no)

    if not saw_endata:
        raise MpsParseError("missing ENDATA")
    if obj_row is None:
        raise MpsParseError("no objective (N) row found")
    if not row_order:
        raise MpsParseError("no constraint rows found")
    if not col_order:
        raise MpsParseError("no columns found")

    return _assemble(name, objsense, obj_row, row_order, row_type, rhs, ranges,
                     obj_rhs, col_order, col_entries, col_obj, bounds)


def _row_interval(rtype: str, b: float, rng: float | None) -> tuple[float, float]:
    if rng is None:
        if rtype == "L":
            return -np.inf, b
        if rtype == "G":
            return b, np.inf
        return b, b
    if rtype == "L":
        return b - abs(rng), b
    if rtype == "G":
        return b, b + abs(rng)
    return (b, b + rng) if rng >= 0 else (b + rng, b)


def _assemble(name, objsense, obj_row, row_order, row_type, rhs, ranges,
              obj_rhs, col_order, col_entries, col_obj, bounds) -> LpInstance:
    flip = objsense != "MAX"
    offset = -obj_rhs if not flip else obj_rhs  # constant term, max convention
    c_by_col = {j: (-v if flip else v) for j, v in col_obj.items()}

    # bound normalization: fold fixed columns into the rhs, shift nonzero lowers
    b_by_row = {r: rhs.get(r, 0.0) for r in row_order}
    kept_cols: list[str] = []
    upper: list[float] = []
    shifts: dict[str, float] = {}
    fixed: dict[str, float] = {}
    for jname in col_order:
        bnd = bounds.get(jname, {"lo": 0.0, "up": np.inf})
        lo, up = bnd["lo"], bnd["up"]
        if up < lo:
            raise MpsParseError(f"column {jname!r} has empty bound interval [{lo}, {up}]")
        if up == lo:
            fixed[jname] = lo
            offset += c_by_col[jname] * lo
            for rname, a in col_entries[jname].items():
                b_by_row[rname] -= a * lo
            continue
        if lo != 0.0:
            shifts[jname] = lo
            offset += c_by_col[jname] * lo
            for rname, a in col_entries[jname].items():
                b_by_row[rname] -= a * lo
            up = up - lo
        kept_cols.append(jname)
        upper.append(up)

    if not kept_cols:
        raise MpsParseError("every column is fixed; nothing to optimize")

    # expand rows to <= form
    out_rows: list[tuple[str, float, float]] = []  # (source row, sign, rhs)
    out_names: list[str] = []
    for rname in row_order:
        lo, hi = _row_interval(row_type[rname], b_by_row[rname], ranges.get(rname))
        if np.isfinite(hi):
            out_rows.append((rname, 1.0, hi))
            out_names.append(rname if not np.isfinite(lo) else f"{rname}:hi")
        if np.isfinite(lo):
            out_rows.append((rname, -1.0, -lo))
            out_names.append(rname if not np.isfinite(hi) else f"{rname}:lo")

    row_pos: dict[str, list[tuple[int, float]]] = {r: [] for r in row_order}
    for i, (rname, sign, _) in enumerate(out_rows):
        row_pos[rname].append((i, sign))

    m, n = len(out_rows), len(kept_cols)
    col_ptr = np.zeros(n + 1, dtype=np.int64)
    idx_parts, val_parts = [], []
    for k, jname in enumerate(kept_cols):
        entries = []
        for rname, a in col_entries[jname].items():
            for i, sign in row_pos[rname]:
                entries.append((i, sign * a))
        entries.sort()
        rows = np.array([e[0] for e in entries], dtype=np.int64)
        vals = np.array([e[1] for e in entries])
        nz = vals != 0.0
        idx_parts.append(rows[nz])
        val_parts.append(vals[nz])
        col_ptr[k + 1] = col_ptr[k] + int(nz.sum())

    row_idx = np.concatenate(idx_parts) if idx_parts else np.empty(0, dtype=np.int64)
    values = np.concatenate(val_parts) if val_parts else np.empty(0)
    b = np.array([r[2] for r in out_rows])
    c = np.array([c_by_col[j] for j in kept_cols])

    meta = {
        "name": name,
        "objective_sense": "min" if flip else "max",
        "objective_offset": offset,
        "row_names": tuple(out_names),
        "col_names": tuple(kept_cols),
        "column_shifts": shifts,
        "fixed_columns": fixed,
    }
    return LpInstance(m, n, col_ptr, row_idx, values, b, c,
                      np.array(upper), meta=meta)


def write_mps(instance: LpInstance, destination, name: str = "ONLINELP") -> None:
    """Write the instance as free-format MPS (OBJSENSE MAX, all-L rows).

    parse_mps(write_mps(inst)) reproduces the instance structurally, which
    is what the round-trip tests rely on.
    """
    def _write(fh):
        w = fh.write
        w(f"NAME          {name}\n")
        w("OBJSENSE\n    MAX\n")
        w("ROWS\n")
        w(" N  OBJ\n")
        for i in range(instance.num_rows):
            w(f" L  R{i}\n")
        w("COLUMNS\n")
        for j in range(instance.num_cols):
            cname = f"X{j}"
            if instance.obj[j] != 0.0:
                w(f"    {cname}  OBJ  {instance.obj[j]:.17g}\n")
            rows, vals = instance.column(j)
            for i, v in zip(rows, vals):
                w(f"    {cname}  R{i}  {v:.17g}\n")
        w("RHS\n")
        for i in range(instance.num_rows):
            if instance.rhs[i] != 0.0:
                w(f"    RHS  R{i}  {instance.rhs[i]:.17g}\n")
        w("BOUNDS\n")
        for j in range(instance.num_cols):
            if np.isfinite(instance.upper[j]):
                w(f" UP BND  X{j}  {instance.upper[j]:.17g}\n")
        w("ENDATA\n")

    if hasattr(destination, "write"):
        _write(destination)
        return
    try:
        with open(destination, "w") as fh:
            _write(fh)
    except OSError as exc:
        raise OSError(f"cannot write MPS to {destination!r}: {exc}") from exc

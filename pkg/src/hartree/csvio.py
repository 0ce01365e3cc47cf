"""CSV files for radial fields, pairs and plain tables.

Fields are written as ``r,value`` (pairs as ``r,u,v``) with every number
at 17 significant digits, so the decimal text round-trips bit-exactly.
Two comment lines carry the grid parameters and the tail exponent; the
grid line lets a reader rebuild the identical grid.
"""

import csv
import math

import numpy as np

from .errors import ConfigurationError
from .model import PairField
from .radial import RadialField, make_grid


def _fmt(x):
    return "%.17g" % x


def _header_lines(grid, tail):
    g = grid.to_dict()
    yield f"# grid N={g['N']} R_max={_fmt(g['R_max'])} M={g['M']} q={_fmt(g['q'])}"
    yield f"# tail_exponent={_fmt(tail)}"


def write_table(path, header, rows, comments=()):
    """Write ``rows`` under ``header``; floats use 17 significant digits."""
    with open(path, "w", newline="") as fh:
        for c in comments:
            fh.write(c + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def write_field(path, field):
    rows = zip(field.grid.nodes.tolist(), field.values.tolist())
    write_table(path, ["r", "value"], rows, _header_lines(field.grid, field.tail_exponent))


def write_pair(path, pair):
    if pair.u.tail_exponent != pair.v.tail_exponent:
        raise ConfigurationError("pair components must share one tail exponent to be written together")
    g = pair.grid
    rows = zip(g.nodes.tolist(), pair.u.values.tolist(), pair.v.values.tolist())
    write_table(path, ["r", "u", "v"], rows, _header_lines(g, pair.u.tail_exponent))


def _parse_comments(lines):
    meta = {}
    for line in lines:
        for tok in line.lstrip("#").split():
            if "=" in tok:
                k, v = tok.split("=", 1)
                meta[k] = v
    return meta


def read_table(path):
    """Return (comment lines, header, float array of rows)."""
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body:
        raise ConfigurationError(f"{path}: no header row")
    rows = list(csv.reader(body))
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ConfigurationError(f"{path}: non-numeric entry ({exc})") from None
    if data.size and data.shape[1] != len(header):
        raise ConfigurationError(f"{path}: rows do not match the header {header}")
    return comments, header, data


def _grid_for(path, meta, r, grid):
    if grid is None:
        try:
            grid = make_grid(int(meta["N"]), float(meta["R_max"]), int(meta["M"]), float(meta["q"]))
        except KeyError:
            raise ConfigurationError(f"{path}: no '# grid' line and no grid supplied") from None
    if r.shape != grid.nodes.shape or not np.array_equal(r, grid.nodes):
        raise ConfigurationError(f"{path}: radii do not match the grid {grid.to_dict()}")
    return grid


def _read(path, columns, grid):
    comments, header, data = read_table(path)
    if header != columns:
        raise ConfigurationError(f"{path}: expected header {','.join(columns)}, got {','.join(header)}")
    meta = _parse_comments(comments)
    tail = float(meta.get("tail_exponent", math.inf))
    g = _grid_for(path, meta, data[:, 0], grid)
    return g, data, tail


def read_field(path, grid=None):
    """Read a ``r,value`` CSV onto its grid."""
    g, data, tail = _read(path, ["r", "value"], grid)
    return RadialField(g, data[:, 1], tail)


def read_pair(path, grid=None):
    """Read a ``r,u,v`` CSV onto its grid."""
    g, data, tail = _read(path, ["r", "u", "v"], grid)
    return PairField(RadialField(g, data[:, 1], tail), RadialField(g, data[:, 2], tail))

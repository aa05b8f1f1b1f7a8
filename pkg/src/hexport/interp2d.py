"""Two-dimensional extension of reticulated data on row-like grids.

The 2D operator is a cross combination of the 1D machinery: for a query
(x, y) it finds the y-interval containing y, evaluates the 1D extension of
each knot row in that interval's six-row neighborhood at x, and then runs
the 1D extension once more across those per-row values in y.  Rows may have
different knot sets and counts; a row whose knot range does not reach x
extrapolates with its own outermost cubic.

Evaluation is batched along horizontal lines: hexagon-row centers and
quadrature sample rows share a y, so the per-row 1D evaluations and the
cross-row combination all vectorize over x.

Also here: the Catmull-Rom spline baseline (regular grids only) and the
piecewise-constant cell lookup, both with the same line-batched interface.
"""

from __future__ import annotations

import itertools
import warnings
from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IrregularGridError,
    OutOfBoundsError,
    SparseDataWarning,
    TooSparseError,
)
from .grid_io import RectRaster
from .interp1d import (
    ENO,
    OF,
    Extension1D,
    Knots1D,
    _eno_candidates,
    _eno_score_parts,
    _extrap_idx,
    _newton_coeffs,
    _newton_eval,
)


@dataclass(frozen=True)
class RowLikeGrid:
    """Knot rows at strictly increasing heights, each with its own knots.

    ``rows[j]`` holds the knots on the horizontal line ``y = ys[j]``.
    ``dropped_rows`` counts source rows discarded for having fewer than two
    usable knots.
    """

    ys: np.ndarray
    rows: tuple
    dropped_rows: int = 0

    def __post_init__(self):
        ys = np.asarray(self.ys, dtype=np.float64)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "rows", tuple(self.rows))
        if ys.ndim != 1 or ys.size != len(self.rows):
            raise ValueError("ys and rows must have matching lengths")
        if ys.size < 2:
            raise TooSparseError("need at least 2 usable rows")
        if not np.all(np.isfinite(ys)) or not np.all(np.diff(ys) > 0.0):
            raise ValueError("row heights must be finite and strictly increasing")
        for row in self.rows:
            if not isinstance(row, Knots1D):
                raise TypeError("rows must be Knots1D instances")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def short_rows(self) -> int:
        """Rows evaluated with a degraded (quadratic/linear) interpolant."""
        return sum(1 for row in self.rows if len(row) < 4)


def build_row_like_grid(raster: RectRaster) -> RowLikeGrid:
    """Knots at the centers of non-NODATA cells, rows ordered bottom-up.

    Fully-NODATA rows are simply absent (that is the row-like structure);
    a row left with a single knot is dropped with a warning since its datum
    cannot be used.  Fewer than two usable rows raises
    :class:`TooSparseError`.
    """
    xs_all = raster.x_centers()
    ys = []
    rows = []
    dropped = 0
    for row in range(raster.nrows - 1, -1, -1):
        mask = raster.values[row] != raster.nodata
        count = int(mask.sum())
        if count < 2:
            if count == 1:
                dropped += 1
            continue
        ys.append(raster.y_center(row))
        rows.append(Knots1D(xs=xs_all[mask], fs=raster.values[row][mask]))
    if dropped:
        warnings.warn(
            f"dropped {dropped} raster rows with a single usable cell",
            SparseDataWarning,
            stacklevel=2,
        )
    if len(rows) < 2:
        raise TooSparseError("fewer than 2 usable rows after NODATA removal")
    return RowLikeGrid(ys=np.array(ys), rows=tuple(rows), dropped_rows=dropped)


def _newton_eval_rows(ysw, frows, y):
    """Newton interpolation across row values; frows entries are arrays."""
    coeffs = _newton_coeffs(list(ysw), list(frows))
    return _newton_eval(coeffs, list(ysw), y)


def _eno_combine(ysw, F, k, y):
    """Vectorized ENO selection and evaluation across rows for interval k."""
    w = len(ysw)
    cands = _eno_candidates(k, w)
    scores = []
    values = []
    for p, q in cands:
        scores.append(
            _eno_score_parts(
                ysw[k], ysw[k + 1], ysw[p], ysw[q], F[k], F[k + 1], F[p], F[q]
            )
        )
        idx = (k, k + 1, p, q)
        values.append(
            _newton_eval_rows([ysw[i] for i in idx], [F[i] for i in idx], y)
        )
    if len(cands) == 1:
        return values[0]
    scores = np.stack(scores)
    values = np.stack(values)
    sel = np.argmin(scores, axis=0)
    return np.take_along_axis(values, sel[None, :], axis=0)[0]


def _of_combine(ysw, F, k, y):
    """Vectorized outlier-filtering selection across rows for interval k."""
    w = len(ysw)
    span = range(max(0, k - 2), min(w - 1, k + 3) + 1)
    u, v = ysw[k], ysw[k + 1]
    energies = []
    values = []
    for idx in itertools.combinations(span, 4):
        yi = [ysw[i] for i in idx]
        fi = [F[i] for i in idx]
        c = _newton_coeffs(yi, fi)
        a = 6.0 * c[3]
        b = 2.0 * c[2] - 2.0 * c[3] * (yi[0] + yi[1] + yi[2])
        energies.append(
            a * a * (v * v * v - u * u * u) / 3.0
            + a * b * (v * v - u * u)
            + b * b * (v - u)
        )
        values.append(_newton_eval(c, yi, y))
    if len(energies) == 1:
        return values[0]
    energies = np.stack(energies)
    values = np.stack(values)
    sel = np.argmin(energies, axis=0)
    return np.take_along_axis(values, sel[None, :], axis=0)[0]


def _combine_line(ysw, F, y, method):
    """Extend the per-row values F (w, n) across rows and evaluate at y.

    Mirrors the 1D extension semantics: knot rows are exact for ENO and
    lateral-limit averages for OF, out-of-range y extrapolates with the four
    outermost rows, and fewer than four rows degrade to the quadratic or
    linear interpolant.
    """
    w = len(ysw)
    pos = bisect_left(ysw, y)
    at_knot = pos < w and ysw[pos] == y
    if w < 4:
        if at_knot:
            return F[pos].copy()
        return np.asarray(_newton_eval_rows(ysw, list(F), y), dtype=np.float64)
    if at_knot:
        if method == ENO:
            return F[pos].copy()
        combine = _of_combine
        left = max(pos - 1, 0)
        right = min(pos, w - 2)
        vl = combine(ysw, F, left, y)
        vr = combine(ysw, F, right, y) if right != left else vl
        return 0.5 * (vl + vr)
    if y < ysw[0] or y > ysw[-1]:
        idx = _extrap_idx(w, y < ysw[0])
        return np.asarray(
            _newton_eval_rows([ysw[i] for i in idx], [F[i] for i in idx], y),
            dtype=np.float64,
        )
    k = pos - 1
    if method == ENO:
        return _eno_combine(ysw, F, k, y)
    return _of_combine(ysw, F, k, y)


class Extension2D:
    """Everywhere-defined extension of a row-like grid, ENO or OF flavored.

    Per-row 1D extensions are built once; evaluation batches over points
    sharing a y (a line), which is how rasters and hexagon rows are swept.
    """

    def __init__(self, grid: RowLikeGrid, method: str = ENO):
        if method not in (ENO, OF):
            raise ValueError(f"unknown method {method!r}")
        self.grid = grid
        self.method = method
        self._rows = [Extension1D(row, method) for row in grid.rows]
        self._ys = list(grid.ys)

    def eval_line(self, xs, y: float) -> np.ndarray:
        """Evaluate the extension at points (xs[i], y)."""
        xs = np.asarray(xs, dtype=np.float64)
        ys = self._ys
        m = len(ys)
        y = float(y)
        pos = bisect_left(ys, y)
        at_knot = pos < m and ys[pos] == y
        if at_knot and self.method == ENO:
            return self._rows[pos].eval_many(xs)
        if at_knot:
            lo, hi = max(0, pos - 3), min(m - 1, pos + 3)
        elif y < ys[0]:
            lo, hi = 0, min(3, m - 1)
        elif y > ys[-1]:
            lo, hi = max(0, m - 4), m - 1
        else:
            k = pos - 1
            lo, hi = max(0, k - 2), min(m - 1, k + 3)
        F = np.stack([self._rows[j].eval_many(xs) for j in range(lo, hi + 1)])
        return _combine_line(ys[lo : hi + 1], F, y, self.method)

    def __call__(self, x: float, y: float) -> float:
        return float(self.eval_line(np.array([x], dtype=np.float64), y)[0])


def extend_2d(grid: RowLikeGrid, x: float, y: float, method: str = ENO) -> float:
    """Evaluate the 2D extension at one point.

    Builds the per-row machinery on every call; reuse an
    :class:`Extension2D` for repeated evaluation.
    """
    return Extension2D(grid, method)(x, y)


class CrsExtension:
    """Separable Catmull-Rom spline on a uniform rectangular grid.

    Tangents are central differences of neighboring values, one-sided at the
    boundary.  Queries beyond the knot hull extrapolate the end segment.
    Irregular grids are rejected.
    """

    def __init__(self, grid: RowLikeGrid):
        xs0 = grid.rows[0].xs
        for row in grid.rows[1:]:
            if row.xs.size != xs0.size or not np.array_equal(row.xs, xs0):
                raise IrregularGridError("rows have differing knot sets")
        if xs0.size < 2 or grid.ys.size < 2:
            raise IrregularGridError("need at least 2 x 2 knots")
        for name, arr in (("x", xs0), ("y", grid.ys)):
            steps = np.diff(arr)
            if np.max(steps) - np.min(steps) > 1e-9 * max(np.max(np.abs(arr)), 1.0):
                raise IrregularGridError(f"{name} knots are not uniformly spaced")
        self.xs = xs0
        self.ys = grid.ys
        self.V = np.stack([row.fs for row in grid.rows])
        self._tx = self._tangents(self.V, axis=1)

    @staticmethod
    def _tangents(V, axis):
        """Index-space tangents: central differences, one-sided at the ends."""
        t = np.empty_like(V)
        sl = [slice(None)] * V.ndim

        def seg(a, b):
            s = sl.copy()
            s[axis] = slice(a, b)
            return tuple(s)

        t[seg(1, -1)] = 0.5 * (V[seg(2, None)] - V[seg(None, -2)])
        t[seg(0, 1)] = V[seg(1, 2)] - V[seg(0, 1)]
        t[seg(-1, None)] = V[seg(-1, None)] - V[seg(-2, -1)]
        return t

    @staticmethod
    def _hermite(f0, f1, m0, m1, t):
        t2 = t * t
        t3 = t2 * t
        return (
            (2.0 * t3 - 3.0 * t2 + 1.0) * f0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * f1
            + (t3 - t2) * m1
        )

    def _row_eval(self, row_idx, xs):
        """Evaluate one knot row at query xs (vectorized)."""
        knots = self.xs
        n = knots.size
        k = np.clip(np.searchsorted(knots, xs) - 1, 0, n - 2)
        h = knots[k + 1] - knots[k]
        t = (xs - knots[k]) / h
        f = self.V[row_idx]
        m = self._tx[row_idx]
        return self._hermite(f[k], f[k + 1], m[k], m[k + 1], t)

    def eval_line(self, xs, y: float) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        ys = self.ys
        m = ys.size
        l = int(np.clip(np.searchsorted(ys, y) - 1, 0, m - 2))
        rows = {}
        for j in range(max(0, l - 1), min(m - 1, l + 2) + 1):
            rows[j] = self._row_eval(j, xs)
        g0 = rows[l]
        g1 = rows[l + 1]
        if l - 1 >= 0:
            m0 = 0.5 * (g1 - rows[l - 1])
        else:
            m0 = g1 - g0
        if l + 2 <= m - 1:
            m1 = 0.5 * (rows[l + 2] - g0)
        else:
            m1 = g1 - g0
        t = (y - ys[l]) / (ys[l + 1] - ys[l])
        return self._hermite(g0, g1, m0, m1, t)

    def __call__(self, x: float, y: float) -> float:
        return float(self.eval_line(np.array([x], dtype=np.float64), y)[0])


def extend_crs(grid: RowLikeGrid, x: float, y: float) -> float:
    """Catmull-Rom value at one point; see :class:`CrsExtension`."""
    return CrsExtension(grid)(x, y)


class IdExtension:
    """Piecewise-constant extension: the value of the cell containing (x, y)."""

    def __init__(self, raster: RectRaster):
        self.raster = raster

    def eval_line(self, xs, y: float, fill: float | None = None) -> np.ndarray:
        r = self.raster
        xs = np.asarray(xs, dtype=np.float64)
        xmin, ymin, xmax, ymax = r.bounds
        col = np.floor((xs - r.xll) / r.cellsize).astype(np.int64)
        col[xs == xmax] = r.ncols - 1
        if y == ymax:
            row_up = r.nrows - 1
        else:
            row_up = int(np.floor((y - r.yll) / r.cellsize))
        row = r.nrows - 1 - row_up
        outside = (col < 0) | (col >= r.ncols) | (row < 0) | (row >= r.nrows)
        if outside.any() and fill is None:
            x_bad = xs[outside][0]
            raise OutOfBoundsError(f"point ({x_bad}, {y}) outside raster bounds")
        row_c = min(max(row, 0), r.nrows - 1)
        out = r.values[row_c, np.clip(col, 0, r.ncols - 1)].astype(np.float64)
        if outside.any():
            out[outside] = float(fill)
        return out

    def __call__(self, x: float, y: float) -> float:
        return float(self.eval_line(np.array([x], dtype=np.float64), y)[0])


def extend_id(raster: RectRaster, x: float, y: float) -> float:
    """Value of the raster cell containing (x, y); OutOfBounds outside."""
    return IdExtension(raster)(x, y)

"""Inhomogeneous weight grids, last-passage times and the stationary boundary model.

Indexing follows the lattice: ``G[i, j]`` is the last-passage time to site
(i, j), with row 0 and column 0 holding the boundary values.  A weight
"row" is the set of sites with a fixed second coordinate j; the weight at
(i, j) is draw i-1 of the stream keyed by ``(seed, j)``, so cells can be
regenerated individually and the interiors of the plain and boundary
models are coupled exactly.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels
from .distributions import DomainError
from .rng import seed_derive, uniforms
from .sequences import ParameterPair

__all__ = [
    "EXPONENTIAL",
    "GEOMETRIC",
    "MAX_FULL_CELLS",
    "MAX_STREAM_CELLS",
    "GridSizeError",
    "InvalidParameterError",
    "WeightGrid",
    "LastPassageField",
    "StationaryBoundary",
    "IncrementField",
    "weight_row",
    "cell_weight",
    "iter_weight_rows",
    "sample_weights",
    "last_passage",
    "last_passage_row",
    "sample_boundary",
    "last_passage_with_boundary",
    "boundary_increment_rows",
    "boundary_last_passage_row",
    "apply_F",
    "write_field_csv",
    "write_field_binary",
    "read_field_binary",
]

EXPONENTIAL = "exponential"
GEOMETRIC = "geometric"
MODELS = (EXPONENTIAL, GEOMETRIC)
MAX_FULL_CELLS = 400_000_000
MAX_STREAM_CELLS = 100_000_000_000


class GridSizeError(ValueError):
    pass


class InvalidParameterError(ValueError):
    pass


def _check_model(model):
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")


def _exp_from_uniform(u, rate):
    return -np.log(u) / rate


def _geom_from_uniform(u, q):
    # P(W >= k) = q**k on {0, 1, 2, ...}
    return np.floor(np.log(u) / np.log(q))


def _row_key(seed, j):
    return seed_derive(seed, f"weights/row/{j}")


def _col0_key(seed):
    return seed_derive(seed, "weights/column/0")


def _transform(u, model, a, bj):
    if model == EXPONENTIAL:
        return _exp_from_uniform(u, a + bj)
    q = a * bj
    if np.any(q >= 1) or np.any(q <= 0):
        raise InvalidParameterError("geometric weights need 0 < a_i * b_j < 1")
    return _geom_from_uniform(u, q)


def weight_row(params: ParameterPair, model: str, seed: int, j: int) -> np.ndarray:
    """Weights W(1, j), ..., W(m, j) of interior row ``j >= 1``."""
    _check_model(model)
    u = uniforms(_row_key(seed, j), params.m)
    return _transform(u, model, params.a, params.b[j - 1])


def cell_weight(params: ParameterPair, model: str, seed: int, i: int, j: int) -> float:
    """Regenerate the single weight W(i, j) from its key."""
    _check_model(model)
    u = uniforms(_row_key(seed, j), 1, start=i - 1)
    return float(_transform(u, model, params.a[i - 1], params.b[j - 1])[0])


def iter_weight_rows(params: ParameterPair, model: str, seed: int, rows=None) -> Iterator[np.ndarray]:
    """Stream the rows j = 1, ..., ``rows`` (default n) one at a time."""
    last = params.n if rows is None else rows
    for j in range(1, last + 1):
        yield weight_row(params, model, seed, j)


@dataclass(frozen=True, eq=False)
class WeightGrid:
    """Sampled weights; ``values[i-1, j-1]`` is W(i, j)."""

    model: str
    params: ParameterPair
    seed: int
    values: np.ndarray

    def rows(self) -> Iterator[np.ndarray]:
        for j in range(self.values.shape[1]):
            yield self.values[:, j]


def _check_size(m, n):
    if m * n > MAX_FULL_CELLS:
        raise GridSizeError(
            f"{m}x{n} grid exceeds the full-field cap of {MAX_FULL_CELLS} cells; use the row-streaming mode"
        )


def _check_stream_size(m, n):
    if m * n > MAX_STREAM_CELLS:
        raise GridSizeError(f"{m}x{n} grid exceeds the streaming cap of {MAX_STREAM_CELLS} cells")


def sample_weights(params: ParameterPair, model: str, seed: int) -> WeightGrid:
    _check_model(model)
    _check_size(params.m, params.n)
    values = np.empty((params.m, params.n), order="F")
    for j in range(1, params.n + 1):
        values[:, j - 1] = weight_row(params, model, seed, j)
    return WeightGrid(model=model, params=params, seed=int(seed), values=values)


@dataclass(frozen=True, eq=False)
class StationaryBoundary:
    """Boundary weights W(i, 0), i = 1..m and W(0, j), j = 1..n."""

    z: float
    model: str
    boundary_row: np.ndarray
    boundary_col: np.ndarray


@dataclass(frozen=True, eq=False)
class LastPassageField:
    """Last-passage times with ``G[i, j]`` = G(i, j), shape (m+1, n+1)."""

    G: np.ndarray
    boundary: StationaryBoundary | None = None

    @property
    def shape(self):
        return self.G.shape[0] - 1, self.G.shape[1] - 1

    def at(self, i: int, j: int) -> float:
        return float(self.G[i, j])


@dataclass(frozen=True, eq=False)
class IncrementField:
    """``I[i-1, j]`` = I(i, j) for i >= 1, j >= 0 and ``J[i, j-1]`` = J(i, j) for i >= 0, j >= 1."""

    I: np.ndarray
    J: np.ndarray

    def I_at(self, i: int, j: int) -> float:
        return float(self.I[i - 1, j])

    def J_at(self, i: int, j: int) -> float:
        return float(self.J[i, j - 1])


def last_passage(grid) -> LastPassageField:
    """Last-passage times of a :class:`WeightGrid` or an (m, n) weight array."""
    W = grid.values if isinstance(grid, WeightGrid) else np.asarray(grid, dtype=float)
    if W.ndim != 2:
        raise ValueError("weights must form a 2-D array")
    m, n = W.shape
    _check_size(m, n)
    G = np.zeros((m + 1, n + 1))
    _kernels.fill_last_passage(np.ascontiguousarray(W), G)
    return LastPassageField(G=G)


def last_passage_row(params: ParameterPair, model: str, seed: int, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Memory-lean recursion returning G(0..cols, rows) only.

    Weights are generated and consumed one row at a time, so memory is
    O(cols) whatever the number of rows.  Defaults are the full m and n of
    ``params``.
    """
    _check_model(model)
    m = params.m if cols is None else cols
    last = params.n if rows is None else rows
    if m > params.m or last > params.n:
        raise ValueError("requested corner lies outside the parameter sequences")
    _check_stream_size(m, last)
    prev = np.zeros(m + 1)
    cur = np.zeros(m + 1)
    for j in range(1, last + 1):
        u = uniforms(_row_key(seed, j), m)
        w = _transform(u, model, params.a[:m], params.b[j - 1])
        cur[0] = 0.0
        _kernels.advance_row(prev, w, cur)
        prev, cur = cur, prev
    return prev.copy()


def _check_z(params: ParameterPair, z: float, model: str):
    if model == EXPONENTIAL:
        ok = np.all(params.a + z > 0) and np.all(params.b - z > 0)
        if not ok:
            raise DomainError(
                f"z={z} outside the admissible interval: need a_i + z > 0 and b_j - z > 0 for all sampled parameters"
            )
    else:
        ok = z > 0 and np.all(params.a / z < 1) and np.all(params.b * z < 1)
        if not ok:
            raise DomainError(
                f"z={z} outside the admissible interval: need a_i / z < 1 and b_j * z < 1 for all sampled parameters"
            )


def sample_boundary(params: ParameterPair, z: float, model: str, seed: int, m: int | None = None, n: int | None = None) -> StationaryBoundary:
    """Boundary weights of the stationary model.

    Exponential: W(i, 0) ~ Exp(a_i + z), W(0, j) ~ Exp(b_j - z).
    Geometric: W(i, 0) ~ Geom(a_i / z), W(0, j) ~ Geom(b_j z).
    """
    _check_model(model)
    _check_z(params, z, model)
    m = params.m if m is None else m
    n = params.n if n is None else n
    u_row = uniforms(_row_key(seed, 0), m)
    u_col = uniforms(_col0_key(seed), n)
    a, b = params.a[:m], params.b[:n]
    if model == EXPONENTIAL:
        row = _exp_from_uniform(u_row, a + z)
        col = _exp_from_uniform(u_col, b - z)
    else:
        row = _geom_from_uniform(u_row, a / z)
        col = _geom_from_uniform(u_col, b * z)
    return StationaryBoundary(z=float(z), model=model, boundary_row=row, boundary_col=col)


def last_passage_with_boundary(params: ParameterPair, z: float, model: str, seed: int, grid: WeightGrid | None = None):
    """Boundary-augmented last-passage times and their increments.

    The interior weights are those of ``sample_weights(params, model, seed)``
    (pass ``grid`` to reuse an already sampled one).

    Returns
    -------
    (LastPassageField, IncrementField)
    """
    _check_model(model)
    _check_z(params, z, model)
    if grid is None:
        grid = sample_weights(params, model, seed)
    boundary = sample_boundary(params, z, model, seed)
    m, n = params.m, params.n
    G = np.zeros((m + 1, n + 1))
    G[:, 0] = _kernels.compensated_cumsum(boundary.boundary_row)
    G[0, :] = _kernels.compensated_cumsum(boundary.boundary_col)
    _kernels.fill_last_passage(np.ascontiguousarray(grid.values), G)
    inc = IncrementField(I=G[1:, :] - G[:-1, :], J=G[:, 1:] - G[:, :-1])
    return LastPassageField(G=G, boundary=boundary), inc


def _stream_boundary(params, z, model, seed, last_row, m):
    boundary = sample_boundary(params, z, model, seed, m=m, n=max(last_row, 1))
    col = _kernels.compensated_cumsum(boundary.boundary_col)
    prev = _kernels.compensated_cumsum(boundary.boundary_row)
    yield 0, prev
    cur = np.empty(m + 1)
    for j in range(1, last_row + 1):
        u = uniforms(_row_key(seed, j), m)
        w = _transform(u, model, params.a[:m], params.b[j - 1])
        cur[0] = col[j]
        _kernels.advance_row(prev, w, cur)
        prev, cur = cur, prev
        yield j, prev


def boundary_increment_rows(params: ParameterPair, z: float, model: str, seed: int, rows) -> dict:
    """Horizontal increments I(1..m, l) of the boundary model for each l in ``rows``.

    Streams up to row max(rows) keeping O(m) memory.
    """
    _check_model(model)
    _check_z(params, z, model)
    wanted = sorted(set(int(r) for r in rows))
    if wanted and (wanted[0] < 0 or wanted[-1] > params.n):
        raise ValueError(f"probe rows must lie in [0, {params.n}]")
    out = {}
    if not wanted:
        return out
    for j, g in _stream_boundary(params, z, model, seed, wanted[-1], params.m):
        if j in wanted:
            out[j] = np.diff(g)
    return out


def boundary_last_passage_row(params: ParameterPair, z: float, model: str, seed: int, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Memory-lean Ĝ(0..cols, rows) of the boundary model."""
    _check_model(model)
    _check_z(params, z, model)
    m = params.m if cols is None else cols
    last = params.n if rows is None else rows
    g = None
    for _, g in _stream_boundary(params, z, model, seed, last, m):
        pass
    return g.copy()


def apply_F(x, y, w):
    """(x, y, w) -> (x - x^y + w, y - x^y + w, x^y) with x^y = min(x, y).

    The map is an involution and preserves the product laws
    Exp(a) x Exp(b) x Exp(a+b) and Geom(a) x Geom(b) x Geom(ab).
    """
    x = np.asarray(x)
    y = np.asarray(y)
    w = np.asarray(w)
    mn = np.minimum(x, y)
    return x - mn + w, y - mn + w, mn


# -- field dumps ---------------------------------------------------------------

_MAGIC = b"CGMLPP"
_VERSION = 1
_HEADER = struct.Struct("<6sHII")  # 16 bytes: magic, version, rows, cols


def write_field_csv(path, values: np.ndarray, start: int = 0) -> None:
    """Write a 2-D field as ``i,j,value`` records; ``start`` is the index of element [0, 0]."""
    values = np.asarray(values)
    rows, cols = values.shape
    with open(path, "w", newline="") as fh:
        fh.write("i,j,value\r\n")
        for i in range(rows):
            for j in range(cols):
                fh.write(f"{i + start},{j + start},{float(values[i, j])!r}\r\n")


def write_field_binary(path, values: np.ndarray) -> None:
    """Little-endian float64, row-major, after a 16-byte magic/version/shape header."""
    values = np.ascontiguousarray(values, dtype="<f8")
    rows, cols = values.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, rows, cols))
        fh.write(values.tobytes(order="C"))


def read_field_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError("truncated field header")
        magic, version, rows, cols = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError("not a field dump (bad magic)")
        if version != _VERSION:
            raise ValueError(f"unsupported field dump version {version}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != rows * cols:
        raise ValueError("field dump size does not match its header")
    return data.reshape(rows, cols).astype(float)

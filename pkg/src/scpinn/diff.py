"""Polynomial differentiation on Legendre grids.

``D[b, a] = l_a'(p_b)``: applying D to node samples of a polynomial of degree
<= n returns node samples of its derivative.  Multivariate operators act axis
by axis on the tensor-shaped value array and never form the full
(n+1)^m x (n+1)^m matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import (
    GridError,
    LegendreRule1D,
    TensorGrid,
    barycentric_weights,
    interpolation_matrix,
    legendre_rule,
)


@dataclass(frozen=True)
class DiffMatrix1D:
    degree: int
    matrix: np.ndarray

    def power(self, r: int) -> np.ndarray:
        return _matrix_power(self.degree, r)


def diff_matrix_1d(rule: LegendreRule1D) -> DiffMatrix1D:
    return DiffMatrix1D(rule.degree, _diff_matrix(rule.degree))


@lru_cache(maxsize=None)
def _diff_matrix(n: int) -> np.ndarray:
    x = legendre_rule(n).nodes
    lam = barycentric_weights(n)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    mat = (lam[None, :] / lam[:, None]) / diff
    np.fill_diagonal(mat, 0.0)
    np.fill_diagonal(mat, -mat.sum(axis=1))
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def _matrix_power(n: int, r: int) -> np.ndarray:
    if r == 0:
        out = np.eye(n + 1)
    elif r == 1:
        out = _diff_matrix(n)
    else:
        # repeated application, matching apply_axis(values, i, r) term for term
        out = _diff_matrix(n) @ _matrix_power(n, r - 1)
    out.setflags(write=False)
    return out


def _as_tensor(values, grid: TensorGrid) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape[-1:] != (len(grid),):
        raise GridError(f"expected {len(grid)} grid values, got shape {values.shape}")
    return values.reshape(values.shape[:-1] + grid.shape)


def _check_axis(axis: int, grid: TensorGrid) -> None:
    if not 1 <= axis <= grid.dim:
        raise GridError(f"axis {axis} out of range 1..{grid.dim}")


def _contract(mat: np.ndarray, arr: np.ndarray, axis: int) -> np.ndarray:
    # axis counted from the right so leading batch dimensions pass through
    out = np.tensordot(mat, arr, axes=(1, axis))
    return np.moveaxis(out, 0, axis)


def apply_axis(values, grid: TensorGrid, axis: int, order: int = 1, transpose: bool = False) -> np.ndarray:
    """Apply the 1D differentiation matrix ``order`` times along ``axis`` (1-based).

    Leading dimensions of ``values`` are treated as a batch.  With
    ``transpose=True`` the adjoint (D^T)^order is applied instead, which is what
    gradient pullbacks need.
    """
    _check_axis(axis, grid)
    if order < 0:
        raise GridError("derivative order must be nonnegative")
    arr = _as_tensor(values, grid)
    if order == 0:
        return arr.reshape(arr.shape[: arr.ndim - grid.dim] + (-1,)).copy()
    mat = _diff_matrix(grid.degree)
    if transpose:
        mat = mat.T
    ax = arr.ndim - grid.dim + axis - 1
    for _ in range(order):
        arr = _contract(mat, arr, ax)
    return arr.reshape(arr.shape[: arr.ndim - grid.dim] + (-1,))


def apply_multi(values, grid: TensorGrid, beta, transpose: bool = False) -> np.ndarray:
    """D_beta: per-axis derivative orders ``beta``, axes applied in ascending order."""
    beta = tuple(int(b) for b in beta)
    if len(beta) != grid.dim:
        raise GridError(f"multi-index {beta} does not match dimension {grid.dim}")
    out = np.asarray(values, dtype=float)
    if not any(beta):
        _as_tensor(out, grid)
        return out.copy()
    order = range(1, grid.dim + 1)
    # the adjoint of a composition runs the factors in reverse
    for axis in (reversed(order) if transpose else order):
        r = beta[axis - 1]
        if r:
            out = apply_axis(out, grid, axis, r, transpose=transpose)
    return out


def laplacian(values, grid: TensorGrid, transpose: bool = False) -> np.ndarray:
    """Sum of second derivatives over all axes."""
    out = apply_axis(values, grid, 1, 2, transpose=transpose)
    for axis in range(2, grid.dim + 1):
        out = out + apply_axis(values, grid, axis, 2, transpose=transpose)
    return out


def extrapolate_axis(values, grid: TensorGrid, axis: int, x: float, transpose: bool = False) -> np.ndarray:
    """Restrict the grid interpolant to the hyperplane ``x_axis = x``.

    Maps (n+1)^m grid values to (n+1)^(m-1) values on the face grid (the
    remaining axes keep their order).  ``transpose=True`` maps face values back
    to the full grid (the adjoint).
    """
    _check_axis(axis, grid)
    row = interpolation_matrix(grid.degree, x)[0]
    n1 = grid.degree + 1
    if transpose:
        face = np.asarray(values, dtype=float)
        lead = face.shape[:-1]
        face = face.reshape(lead + (n1,) * (grid.dim - 1))
        out = np.multiply.outer(face, row)
        out = np.moveaxis(out, -1, len(lead) + axis - 1)
        return out.reshape(lead + (-1,))
    arr = _as_tensor(values, grid)
    ax = arr.ndim - grid.dim + axis - 1
    out = np.tensordot(arr, row, axes=(ax, 0))
    lead = arr.shape[: arr.ndim - grid.dim]
    return out.reshape(lead + (-1,)) if grid.dim > 1 else out.reshape(lead + (1,))

"""Sobolev cubature quadratic forms on grid value vectors.

A form of order k is ``sum_{|beta|_1 <= k} (D_beta v)^T diag(c) (D_beta v)``
with ``c = w`` (kind ``"W"``, the H^k cubature) or ``c = w**2`` (kind ``"U"``,
the Lagrange-tested variational form).  Forms are applied operator-wise; the
dense matrix is only assembled on request for small grids.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .diff import apply_multi
from .grid import GridError, TensorGrid, tensor_grid

MAX_DENSE = 4000
FORM_KINDS = ("W", "U")
BOUNDARY_MODES = ("per_face", "pre")


def sobolev_multi_indices(m: int, k: int) -> list[tuple[int, ...]]:
    """All beta in N^m with |beta|_1 <= k, lexicographic."""
    if k < 0:
        raise ValueError(f"Sobolev order must be nonnegative, got {k}")
    return [b for b in itertools.product(range(k + 1), repeat=m) if sum(b) <= k]


@dataclass(frozen=True)
class SobolevForm:
    kind: str
    dim: int
    degree: int
    order: int

    def __post_init__(self):
        if self.kind not in FORM_KINDS:
            raise ValueError(f"unknown form kind {self.kind!r}")
        if self.order < 0:
            raise ValueError("Sobolev order must be nonnegative")

    @cached_property
    def grid(self) -> TensorGrid:
        return tensor_grid(self.dim, self.degree)

    @cached_property
    def betas(self) -> list[tuple[int, ...]]:
        return sobolev_multi_indices(self.dim, self.order)

    @cached_property
    def diag(self) -> np.ndarray:
        w = self.grid.weights
        return w if self.kind == "W" else w * w

    def __len__(self) -> int:
        return len(self.grid)


def _check(form: SobolevForm, values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (len(form),):
        raise GridError(f"expected {len(form)} values, got shape {values.shape}")
    return values


def sobolev_bilinear(form: SobolevForm, u, v) -> float:
    u = _check(form, u)
    v = _check(form, v)
    total = 0.0
    for beta in form.betas:
        total += float(np.dot(apply_multi(u, form.grid, beta) * form.diag, apply_multi(v, form.grid, beta)))
    return total


def sobolev_quadratic(form: SobolevForm, values) -> float:
    values = _check(form, values)
    total = 0.0
    for beta in form.betas:
        d = apply_multi(values, form.grid, beta)
        total += float(np.dot(d * form.diag, d))
    return total


def sobolev_gradient(form: SobolevForm, values) -> np.ndarray:
    """Gradient of :func:`sobolev_quadratic`, ``2 sum_beta D_beta^T (c * D_beta v)``."""
    values = _check(form, values)
    grad = np.zeros_like(values)
    for beta in form.betas:
        d = apply_multi(values, form.grid, beta)
        grad += apply_multi(form.diag * d, form.grid, beta, transpose=True)
    return 2.0 * grad


def quadratic_and_gradient(form: SobolevForm, values) -> tuple[float, np.ndarray]:
    values = _check(form, values)
    total = 0.0
    grad = np.zeros_like(values)
    for beta in form.betas:
        d = apply_multi(values, form.grid, beta)
        cd = form.diag * d
        total += float(np.dot(cd, d))
        grad += apply_multi(cd, form.grid, beta, transpose=True)
    return total, 2.0 * grad


def assemble_dense(form: SobolevForm) -> np.ndarray:
    """Dense symmetric matrix of the form; test cross-checks only."""
    size = len(form)
    if size > MAX_DENSE:
        raise GridError(f"dense assembly capped at {MAX_DENSE} rows, form has {size}")
    eye = np.eye(size)
    mat = np.zeros((size, size))
    for beta in form.betas:
        d = apply_multi(eye.T, form.grid, beta).T  # columns are D_beta e_j
        mat += d.T @ (form.diag[:, None] * d)
    return mat


def boundary_form_for(k: float, dim: int, degree: int) -> "BoundaryForm":
    """Trace-theorem boundary form for an interior Sobolev order ``k``.

    ``k < 1/2`` gives the plain cubature W_{m-1,n}; otherwise the squared-weight
    form of integer order ``floor(k - 1/2)``.
    """
    if k < 0.5:
        return BoundaryForm(dim, degree, order=0, kind="W")
    return BoundaryForm(dim, degree, order=int(np.floor(k - 0.5)), kind="U")


@dataclass(frozen=True)
class BoundaryForm:
    """Quadratic form over the 2m faces {x_j = -1}, {x_j = +1} of the cube.

    Faces are ordered (axis 1, -1), (axis 1, +1), (axis 2, -1), ...  In one
    dimension each face is a single point and the form is the sum of squares.
    """

    dim: int
    degree: int
    order: int = 0
    kind: str = "W"
    mode: str = "per_face"
    face_form: SobolevForm | None = field(init=False, default=None, compare=False)

    def __post_init__(self):
        if self.mode not in BOUNDARY_MODES:
            raise ValueError(f"unknown boundary aggregation {self.mode!r}")
        if self.dim > 1:
            object.__setattr__(self, "face_form", SobolevForm(self.kind, self.dim - 1, self.degree, self.order))

    @property
    def faces(self) -> list[tuple[int, int]]:
        return [(axis, sign) for axis in range(1, self.dim + 1) for sign in (-1, 1)]

    @property
    def face_size(self) -> int:
        return 1 if self.dim == 1 else (self.degree + 1) ** (self.dim - 1)

    def face_points(self, axis: int, sign: int) -> np.ndarray:
        """Face grid points embedded in R^m, shape (face_size, m)."""
        if self.dim == 1:
            return np.array([[float(sign)]])
        pts = self.face_form.grid.points
        return np.insert(pts, axis - 1, float(sign), axis=1)

    def _quad(self, s: np.ndarray) -> tuple[float, np.ndarray]:
        if self.face_form is None:
            return float(s @ s), 2.0 * s
        return quadratic_and_gradient(self.face_form, s)

    def quadratic_and_gradient(self, face_residuals) -> tuple[float, list[np.ndarray]]:
        res = [np.asarray(s, dtype=float).reshape(-1) for s in face_residuals]
        if len(res) != 2 * self.dim:
            raise GridError(f"expected {2 * self.dim} face residuals, got {len(res)}")
        for s in res:
            if s.shape != (self.face_size,):
                raise GridError(f"face residual must have {self.face_size} entries, got {s.shape}")
        if self.mode == "pre":
            val, g = self._quad(np.sum(res, axis=0))
            return val, [g] * len(res)
        total = 0.0
        grads = []
        for s in res:
            val, g = self._quad(s)
            total += val
            grads.append(g)
        return total, grads


def boundary_quadratic(bform: BoundaryForm, face_residuals) -> float:
    return bform.quadratic_and_gradient(face_residuals)[0]

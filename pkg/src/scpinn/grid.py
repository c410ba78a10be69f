"""Legendre nodes and weights, tensor grids and Gauss-Legendre cubature on [-1, 1]^m.

Every grid vector in the package is indexed by the lexicographic order of the
multi-index set A_{m,n} = {alpha : max_i alpha_i <= n}, i.e. the last axis runs
fastest.  A flat vector reshaped with ``numpy.reshape(v, (n + 1,) * m)`` gives
the value at ``alpha`` as ``v[alpha]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_RULE_DEGREE = 512
MAX_GRID_SIZE = 10**7


class GridError(ValueError):
    """Invalid grid request or grid/vector mismatch."""


def legendre_eval(k: int, x):
    """Return ``(P_k(x), P_k'(x))`` by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p0 = np.ones_like(x)
    if k == 0:
        return p0, np.zeros_like(x)
    p1 = x.copy()
    for j in range(2, k + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    # derivative from P_k and P_{k-1}; valid away from x = +-1
    dp = k * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@dataclass(frozen=True)
class LegendreRule1D:
    degree: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.degree + 1


@lru_cache(maxsize=None)
def legendre_rule(n: int) -> LegendreRule1D:
    """(n+1)-point Gauss-Legendre rule: roots of P_{n+1} and their weights.

    Newton iteration from Chebyshev-like starting points; the lower half of the
    nodes is computed and mirrored so the rule is exactly symmetric.
    """
    if n < 0:
        raise GridError(f"degree must be nonnegative, got {n}")
    if n > MAX_RULE_DEGREE:
        raise GridError(f"degree {n} exceeds the supported maximum {MAX_RULE_DEGREE}")
    npts = n + 1
    half = npts // 2
    j = np.arange(half)
    x = -np.cos(np.pi * (4 * j + 3) / (4 * n + 6))
    for _ in range(100):
        p, dp = legendre_eval(npts, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx), initial=0.0) < 1e-16:
            break
    # one more polishing step
    p, dp = legendre_eval(npts, x)
    x = x - p / dp
    if npts % 2:
        nodes = np.concatenate([x, [0.0], -x[::-1]])
    else:
        nodes = np.concatenate([x, -x[::-1]])
    _, dp = legendre_eval(npts, nodes)
    weights = 2.0 / ((1.0 - nodes**2) * dp**2)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return LegendreRule1D(n, nodes, weights)


@dataclass(frozen=True)
class MultiIndexSet:
    dim: int
    degree: int
    indices: np.ndarray = field(repr=False)  # (N, m) int array, lexicographic

    def __len__(self) -> int:
        return self.indices.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.degree + 1,) * self.dim

    def rank(self, alpha) -> int:
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.dim or any(a < 0 or a > self.degree for a in alpha):
            raise GridError(f"{alpha} is not in A_{{{self.dim},{self.degree}}}")
        return int(np.ravel_multi_index(alpha, self.shape))

    def __getitem__(self, i: int) -> tuple[int, ...]:
        return tuple(int(a) for a in self.indices[i])


def _check_size(m: int, n: int) -> None:
    if m < 1:
        raise GridError(f"dimension must be positive, got {m}")
    if n < 0:
        raise GridError(f"degree must be nonnegative, got {n}")
    if (n + 1) ** m > MAX_GRID_SIZE:
        raise GridError(f"(n+1)^m = {(n + 1) ** m} exceeds the cap {MAX_GRID_SIZE}")


@lru_cache(maxsize=None)
def multi_index_set(m: int, n: int) -> MultiIndexSet:
    _check_size(m, n)
    idx = np.array(list(itertools.product(range(n + 1), repeat=m)), dtype=np.int64)
    idx.setflags(write=False)
    return MultiIndexSet(m, n, idx)


@dataclass(frozen=True)
class TensorGrid:
    index_set: MultiIndexSet
    rule: LegendreRule1D
    points: np.ndarray = field(repr=False)  # (N, m)
    weights: np.ndarray = field(repr=False)  # (N,)

    @property
    def dim(self) -> int:
        return self.index_set.dim

    @property
    def degree(self) -> int:
        return self.index_set.degree

    @property
    def shape(self) -> tuple[int, ...]:
        return self.index_set.shape

    @property
    def axis_nodes(self) -> list[np.ndarray]:
        return [self.rule.nodes] * self.dim

    def __len__(self) -> int:
        return self.points.shape[0]


@lru_cache(maxsize=None)
def tensor_grid(m: int, n: int) -> TensorGrid:
    index_set = multi_index_set(m, n)
    rule = legendre_rule(n)
    points = rule.nodes[index_set.indices]
    weights = np.prod(rule.weights[index_set.indices], axis=1)
    points.setflags(write=False)
    weights.setflags(write=False)
    return TensorGrid(index_set, rule, points, weights)


def _check_values(values, grid: TensorGrid) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (len(grid),):
        raise GridError(f"expected {len(grid)} grid values, got shape {values.shape}")
    return values


def integrate(values, grid: TensorGrid) -> float:
    """Gauss-Legendre cubature sum; exact for samples of degree <= 2n+1 per axis."""
    values = _check_values(values, grid)
    return float(np.dot(grid.weights, values))


@lru_cache(maxsize=None)
def barycentric_weights(n: int) -> np.ndarray:
    """Barycentric weights of the Legendre nodes, scaled to unit max modulus."""
    x = legendre_rule(n).nodes
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    # products overflow/underflow for large n; accumulate in log space
    sign = np.prod(np.sign(diff), axis=1)
    logmag = -np.sum(np.log(np.abs(diff)), axis=1)
    lam = sign * np.exp(logmag - logmag.max())
    lam.setflags(write=False)
    return lam


def interpolation_matrix(n: int, x) -> np.ndarray:
    """Rows of Lagrange basis values ``l_a(x_i)`` for the degree-n Legendre nodes."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nodes = legendre_rule(n).nodes
    lam = barycentric_weights(n)
    diff = x[:, None] - nodes[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    terms = lam[None, :] / diff
    mat = terms / terms.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    if hit.any():
        mat[hit] = exact[hit].astype(float)
    return mat


def lagrange_interpolate(values, grid: TensorGrid, x) -> float:
    """Evaluate the interpolant sum_alpha values_alpha L_alpha(x) at one point."""
    values = _check_values(values, grid)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (grid.dim,):
        raise GridError(f"point must have {grid.dim} coordinates")
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise GridError(f"point {x} lies outside [-1, 1]^{grid.dim}")
    arr = values.reshape(grid.shape)
    for xi in x:
        row = interpolation_matrix(grid.degree, xi)[0]
        arr = np.tensordot(row, arr, axes=(0, 0))
    return float(arr)

"""Residual assembly and Sobolev-cubature losses with parameter gradients.

Interior residuals are formed from network values on the Legendre grid with
polynomial differentiation; boundary residuals from fresh network evaluations
on the face grids.  Every residual map is linear in the network values (except
the Burgers flux), so the loss gradient is the residual-space gradient of the
quadratic form, pulled back through the transposed operators and then through
one network VJP.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import diff
from .grid import tensor_grid
from .jets import mse_loss_and_grad
from .nn import MLPArchitecture, forward_batch, vjp_weights
from .problems import ProblemSpec
from .sobolev import BoundaryForm, SobolevForm, quadratic_and_gradient

LOSS_KINDS = ("strong", "strong_variational", "weak_variational", "mse")


class LossError(ValueError):
    pass


class DivergenceError(ArithmeticError):
    """Raised when a loss evaluates to a non-finite number."""


@dataclass(frozen=True)
class LossSpec:
    kind: str = "strong_variational"
    k: int = 0  # interior Sobolev order
    l: int = 0  # boundary Sobolev order
    n_r: int = 30  # interior grid degree
    n_s: int = 30  # boundary (face) grid degree
    boundary_kind: str | None = None  # None: plain cubature for l == 0, squared weights otherwise
    boundary_mode: str = "per_face"
    w_interior: float = 1.0
    w_boundary: float = 1.0
    w_data: float = 0.0  # observations of the solution at the interior nodes
    mse_seed: int = 0

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise LossError(f"unknown loss kind {self.kind!r}")
        if self.n_r < 1 or self.n_s < 0:
            raise LossError("grid degrees must be positive")
        if self.k < 0 or self.l < 0:
            raise LossError("Sobolev orders must be nonnegative")

    @property
    def interior_form_kind(self) -> str:
        return "W" if self.kind == "strong" else "U"

    @property
    def resolved_boundary_kind(self) -> str:
        if self.boundary_kind is not None:
            return self.boundary_kind
        return "W" if self.l == 0 else "U"


@dataclass
class ResidualAssembly:
    interior: np.ndarray
    faces: list[np.ndarray]
    flux: list[np.ndarray] | None = None  # outward normal derivative samples (weak loss)
    data: np.ndarray | None = None
    lam: float | None = None


@dataclass
class LossBreakdown:
    total: float
    r: float
    s: float
    d: float = 0.0
    grad: np.ndarray | None = field(default=None, repr=False)


class LossEvaluator:
    """Precomputed grids, forms and samples for one (problem, spec) pair."""

    def __init__(self, problem: ProblemSpec, spec: LossSpec, arch: MLPArchitecture | None = None):
        if arch is not None and arch.input_dim != problem.dim:
            raise LossError(f"network input dim {arch.input_dim} != problem dim {problem.dim}")
        if spec.kind == "weak_variational" and problem.kind == "ode4":
            raise LossError("the weak loss is defined for second-order problems only")
        self.problem = problem
        self.spec = spec
        self.arch = arch
        m = problem.dim
        if spec.kind == "mse":
            self._init_mse()
            return
        self.grid = tensor_grid(m, spec.n_r)
        self.form = SobolevForm(spec.interior_form_kind, m, spec.n_r, spec.k)
        self.bform = BoundaryForm(m, spec.n_s, spec.l, spec.resolved_boundary_kind, spec.boundary_mode)
        gp = self.grid.points
        self.source = problem.source(gp)
        self.potential = np.sum(gp * gp, axis=1)
        self.target = problem.solution(gp) if (spec.w_data and problem.solution is not None) else None

        blocks = [gp]
        if problem.kind == "ode4":
            blocks.append(np.array([[-1.0]]))
            self.face_slices = []
            self.face_targets = []
        else:
            self.face_slices = []
            self.face_targets = []
            start = len(gp)
            for axis, sign in self.bform.faces:
                pts = self.bform.face_points(axis, sign)
                blocks.append(pts)
                self.face_slices.append(slice(start, start + len(pts)))
                self.face_targets.append(problem.boundary(pts))
                start += len(pts)
        self.points = np.concatenate(blocks)
        self.n_int = len(gp)

        if spec.kind == "weak_variational":
            # face cubature weights at the interior degree, for the flux pairing
            self.flux_weights = tensor_grid(m - 1, spec.n_r).weights if m > 1 else np.ones(1)

    # -- mse ---------------------------------------------------------------

    def _init_mse(self):
        spec, problem = self.spec, self.problem
        m = problem.dim
        rng = np.random.default_rng(spec.mse_seed)
        self.mse_interior = rng.uniform(-1.0, 1.0, ((spec.n_r + 1) ** m, m))
        if m == 1:
            self.mse_boundary = np.array([[-1.0], [1.0]])
        else:
            faces = []
            for axis in range(m):
                for sign in (-1.0, 1.0):
                    pts = rng.uniform(-1.0, 1.0, ((spec.n_s + 1) ** (m - 1), m))
                    pts[:, axis] = sign
                    faces.append(pts)
            self.mse_boundary = np.concatenate(faces)

    # -- operators ---------------------------------------------------------

    def _stiffness(self, u: np.ndarray, transpose: bool = False) -> np.ndarray:
        """Weak-form replacement of -lap: W^-1 (sum_i D_i^T W D_i u - flux pairing)."""
        g = self.grid
        w = g.weights
        if transpose:
            u = u / w
        out = np.zeros_like(u)
        for axis in range(1, g.dim + 1):
            out += diff.apply_axis(w * diff.apply_axis(u, g, axis), g, axis, transpose=True)
            out -= self._flux_pairing(u, axis, transpose)
        return out if transpose else out / w

    def _flux_pairing(self, u: np.ndarray, axis: int, transpose: bool) -> np.ndarray:
        g = self.grid
        fw = self.flux_weights
        if transpose:
            acc = np.zeros_like(u)
            for sign in (-1.0, 1.0):
                face = diff.extrapolate_axis(u, g, axis, sign)
                acc += sign * diff.extrapolate_axis(fw * face, g, axis, sign, transpose=True)
            return diff.apply_axis(acc, g, axis, transpose=True)
        du = diff.apply_axis(u, g, axis)
        acc = np.zeros_like(u)
        for sign in (-1.0, 1.0):
            face = diff.extrapolate_axis(du, g, axis, sign)
            acc += sign * diff.extrapolate_axis(fw * face, g, axis, sign, transpose=True)
        return acc

    def _neg_lap(self, u: np.ndarray, transpose: bool = False) -> np.ndarray:
        if self.spec.kind == "weak_variational":
            return self._stiffness(u, transpose)
        return -diff.laplacian(u, self.grid, transpose=transpose)

    def flux(self, u_int: np.ndarray) -> list[np.ndarray]:
        """Outward normal derivative samples on each face (interior-degree face grids)."""
        g = self.grid
        out = []
        for axis in range(1, g.dim + 1):
            du = diff.apply_axis(u_int, g, axis)
            for sign in (-1.0, 1.0):
                out.append(sign * diff.extrapolate_axis(du, g, axis, sign))
        return out

    # -- residuals ---------------------------------------------------------

    def interior_residual(self, u: np.ndarray, lam: float) -> tuple[np.ndarray, Callable]:
        """Residual on the interior grid and its pullback ``c -> (dR^T c, dR/dlam . c)``."""
        kind = self.problem.kind
        g = self.grid
        if kind == "poisson":
            R = self._neg_lap(u) - lam * self.source
            return R, lambda c: (self._neg_lap(c, transpose=True), -float(self.source @ c))
        if kind == "qho":
            V = self.potential
            R = self._neg_lap(u) + V * u - lam * u
            return R, lambda c: (self._neg_lap(c, transpose=True) + V * c - lam * c, -float(u @ c))
        if kind == "burgers":
            if self.spec.kind == "weak_variational":
                second = self._stiffness(u)
            else:
                second = -diff.apply_axis(u, g, 1, 2)
            R = second + 0.5 * diff.apply_axis(u * u, g, 1) - self.source

            def pull(c):
                if self.spec.kind == "weak_variational":
                    d2 = self._stiffness(c, transpose=True)
                else:
                    d2 = -diff.apply_axis(c, g, 1, 2, transpose=True)
                return d2 + u * diff.apply_axis(c, g, 1, transpose=True), 0.0

            return R, pull
        R = diff.apply_axis(u, g, 1, 4) - self.source
        return R, lambda c: (diff.apply_axis(c, g, 1, 4, transpose=True), 0.0)

    def _ode4_conditions(self, u_int: np.ndarray, u_left: float) -> list[tuple[int, float]]:
        out = []
        for k, value in self.problem.initial_conditions:
            if k == 0:
                out.append((k, u_left - value))
            else:
                dk = diff.apply_axis(u_int, self.grid, 1, k)
                out.append((k, float(diff.extrapolate_axis(dk, self.grid, 1, -1.0)[0]) - value))
        return out

    def assemble(self, u_all: np.ndarray, lam: float) -> ResidualAssembly:
        u_int = u_all[: self.n_int]
        R, _ = self.interior_residual(u_int, lam)
        if self.problem.kind == "ode4":
            faces = [np.array([s]) for _, s in self._ode4_conditions(u_int, u_all[self.n_int])]
        else:
            faces = [u_all[sl] - t for sl, t in zip(self.face_slices, self.face_targets)]
        flux = self.flux(u_int) if self.spec.kind == "weak_variational" else None
        data = u_int - self.target if self.target is not None else None
        return ResidualAssembly(R, faces, flux, data, lam)

    # -- losses ------------------------------------------------------------

    def _lam(self, theta: np.ndarray) -> tuple[float, bool]:
        if self.problem.inverse and self.arch is not None and theta.shape[0] > self.arch.n_params:
            return float(theta[self.arch.n_params]), True
        return self.problem.lam, False

    def _loss_from_values(self, u_all: np.ndarray, lam: float, want_grad: bool):
        spec = self.spec
        u_int = u_all[: self.n_int]
        R, pull = self.interior_residual(u_int, lam)
        r, gR = quadratic_and_gradient(self.form, R)
        cot = np.zeros_like(u_all)
        dlam = 0.0
        if want_grad:
            du, dlam = pull(gR)
            cot[: self.n_int] += spec.w_interior * du
            dlam *= spec.w_interior

        if self.problem.kind == "ode4":
            s = 0.0
            for k, res in self._ode4_conditions(u_int, u_all[self.n_int]):
                s += res * res
                if not want_grad:
                    continue
                if k == 0:
                    cot[self.n_int] += spec.w_boundary * 2.0 * res
                else:
                    e = diff.extrapolate_axis(np.array([2.0 * res]), self.grid, 1, -1.0, transpose=True)
                    cot[: self.n_int] += spec.w_boundary * diff.apply_axis(e, self.grid, 1, k, transpose=True)
        else:
            faces = [u_all[sl] - t for sl, t in zip(self.face_slices, self.face_targets)]
            s, gfaces = self.bform.quadratic_and_gradient(faces)
            if want_grad:
                for sl, gf in zip(self.face_slices, gfaces):
                    cot[sl] += spec.w_boundary * gf

        d = 0.0
        if self.target is not None:
            e = u_int - self.target
            d = float(self.grid.weights @ (e * e))
            if want_grad:
                cot[: self.n_int] += spec.w_data * 2.0 * self.grid.weights * e

        total = spec.w_interior * r + spec.w_boundary * s + spec.w_data * d
        if not np.isfinite(total):
            raise DivergenceError(f"non-finite loss {total}")
        return LossBreakdown(total, r, s, d), cot, dlam

    def evaluate_field(self, field_fn: Callable[[np.ndarray], np.ndarray], lam: float | None = None) -> LossBreakdown:
        """Loss of an arbitrary function sampled on the loss points (no gradient)."""
        lam = self.problem.lam if lam is None else lam
        if self.spec.kind == "mse":
            raise LossError("field evaluation is implemented for the cubature losses")
        out, _, _ = self._loss_from_values(np.asarray(field_fn(self.points), dtype=float), lam, False)
        return out

    def loss_and_grad(self, theta) -> LossBreakdown:
        if self.arch is None:
            raise LossError("a network architecture is required")
        theta = np.asarray(theta, dtype=float)
        arch = self.arch
        lam, trainable = self._lam(theta)
        if self.spec.kind == "mse":
            spec = self.spec
            weights = (spec.w_interior, spec.w_boundary, spec.w_data)
            total, grad, terms = mse_loss_and_grad(arch, theta, self.problem, self.mse_interior,
                                                   self.mse_boundary, weights)
            if not np.isfinite(total):
                raise DivergenceError(f"non-finite loss {total}")
            return LossBreakdown(total, terms["r"], terms["s"], terms["d"], grad)
        u_all, tape = forward_batch(arch, theta, self.points)
        out, cot, dlam = self._loss_from_values(u_all, lam, True)
        grad = np.zeros_like(theta)
        grad[: arch.n_params] = vjp_weights(arch, theta, tape, cot)
        if trainable:
            grad[arch.n_params] = dlam
        out.grad = grad
        return out


def assemble_residuals(problem: ProblemSpec, theta, spec: LossSpec, arch: MLPArchitecture) -> ResidualAssembly:
    ev = LossEvaluator(problem, spec, arch)
    theta = np.asarray(theta, dtype=float)
    lam, _ = ev._lam(theta)
    u_all, _ = forward_batch(arch, theta, ev.points)
    return ev.assemble(u_all, lam)


def loss_and_grad(problem: ProblemSpec, theta, spec: LossSpec, arch: MLPArchitecture) -> LossBreakdown:
    return LossEvaluator(problem, spec, arch).loss_and_grad(theta)

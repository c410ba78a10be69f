"""Catalog of forward and inverse test problems on [-1, 1]^m.

Residual conventions (u is the unknown, lam the scalar slot of the problem):

* ``poisson``:  -lap(u) - lam * source(x) = 0       (forward problems use lam = 1)
* ``qho``:      -lap(u) + |x|^2 u - lam * u = 0
* ``burgers``:  -u'' + (u^2 / 2)' - source(x) = 0
* ``ode4``:     u'''' - source(x) = 0, with u, u', u'', u''' fixed at x = -1

Every ``u_gt`` stored here satisfies its residual exactly; ``exact_residual``
recomputes the residual from hand-written derivatives so that claim is
checkable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

KINDS = ("poisson", "qho", "burgers", "ode4")

Field = Callable[[np.ndarray], np.ndarray]


class ProblemError(ValueError):
    pass


def hermite(n: int, x):
    """Physicists' Hermite polynomial H_n."""
    if not 0 <= n <= 20:
        raise ProblemError(f"Hermite degree {n} outside 0..20")
    x = np.asarray(x, dtype=float)
    h0 = np.ones_like(x)
    if n == 0:
        return h0
    h1 = 2.0 * x
    for k in range(1, n):
        h0, h1 = h1, 2.0 * x * h1 - 2.0 * k * h0
    return h1


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    dim: int
    kind: str
    source: Field
    boundary: Field
    solution: Field | None = None
    exact_residual: Field | None = None
    lam: float = 1.0
    inverse: bool = False
    params: dict = field(default_factory=dict)
    # (derivative order, value) pairs imposed at x = -1 (ode4 only)
    initial_conditions: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ProblemError(f"unknown residual kind {self.kind!r}")

    @property
    def lam_gt(self) -> float:
        return self.lam

    @property
    def has_lambda(self) -> bool:
        return self.kind in ("poisson", "qho")


def _col(x: np.ndarray, i: int) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(len(x), -1)[:, i]


def poisson1d(omega: float = math.pi) -> ProblemSpec:
    def u(x):
        return np.sin(omega * _col(x, 0))

    def f(x):
        return omega**2 * np.sin(omega * _col(x, 0))

    def res(x):
        t = _col(x, 0)
        return omega**2 * np.sin(omega * t) - f(x)

    return ProblemSpec("poisson1d", 1, "poisson", f, u, u, res, params={"omega": omega})


def poisson2d(q: float = 6) -> ProblemSpec:
    lam = 2.0 * math.pi * q

    def u(x):
        return np.cos(lam * _col(x, 0)) * np.sin(lam * _col(x, 1))

    def f(x):
        return 2.0 * lam**2 * u(x)

    def res(x):
        a, b = _col(x, 0), _col(x, 1)
        uxx = -(lam**2) * np.cos(lam * a) * np.sin(lam * b)
        uyy = -(lam**2) * np.cos(lam * a) * np.sin(lam * b)
        return -(uxx + uyy) - f(x)

    return ProblemSpec("poisson2d", 2, "poisson", f, u, u, res, params={"q": q, "frequency": lam})


HARD_SCENARIOS = {
    "S1": dict(C=0.1, A=0.1, beta=30.0, omega=20 * math.pi),
    "S2": dict(C=0.1, A=0.1, beta=5.0, omega=26.5 * math.pi),
    "desk": dict(C=0.1, A=0.1, beta=5.0, omega=4 * math.pi),
}


def poisson1d_hard(C: float = 0.1, A: float = 0.1, beta: float = 5.0, omega: float = 4 * math.pi) -> ProblemSpec:
    """u = C (A sin(omega x) + tanh(beta x)); steep transition at the origin."""

    def u(x):
        t = _col(x, 0)
        return C * (A * np.sin(omega * t) + np.tanh(beta * t))

    def f(x):
        t = _col(x, 0)
        th = np.tanh(beta * t)
        return C * (A * omega**2 * np.sin(omega * t) + 2.0 * beta**2 * (1.0 - th**2) * th)

    def res(x):
        t = _col(x, 0)
        sech2 = 1.0 / np.cosh(beta * t) ** 2
        upp = C * (-A * omega**2 * np.sin(omega * t) - 2.0 * beta**2 * sech2 * np.tanh(beta * t))
        return -upp - f(x)

    return ProblemSpec(
        "poisson1d_hard", 1, "poisson", f, u, u, res, params=dict(C=C, A=A, beta=beta, omega=omega)
    )


def _hermite_function(n: int, t: np.ndarray):
    """exp(-t^2/2) H_n(t) and its second derivative."""
    g = np.exp(-0.5 * t * t)
    h = hermite(n, t)
    dh = 2.0 * n * hermite(n - 1, t) if n >= 1 else np.zeros_like(t)
    ddh = 4.0 * n * (n - 1) * hermite(n - 2, t) if n >= 2 else np.zeros_like(t)
    return g * h, g * (ddh - 2.0 * t * dh + (t * t - 1.0) * h)


def qho2d(n1: int = 0, n2: int = 0, inverse: bool = False) -> ProblemSpec:
    """Hermite-Gaussian eigenfunction of -lap + |x|^2 with eigenvalue 2 (n1 + n2 + 1)."""
    norm = math.pi**-0.25 / math.sqrt(2.0 ** (n1 + n2) * math.factorial(n1) * math.factorial(n2))
    eig = 2.0 * (n1 + n2 + 1)

    def u(x):
        return norm * _hermite_function(n1, _col(x, 0))[0] * _hermite_function(n2, _col(x, 1))[0]

    def zero(x):
        return np.zeros(len(x))

    def res(x):
        a, b = _col(x, 0), _col(x, 1)
        pa, dpa = _hermite_function(n1, a)
        pb, dpb = _hermite_function(n2, b)
        lap = norm * (dpa * pb + pa * dpb)
        val = norm * pa * pb
        return -lap + (a * a + b * b) * val - eig * val

    name = "qho_inverse" if inverse else "qho2d"
    return ProblemSpec(name, 2, "qho", zero, u, u, res, lam=eig, inverse=inverse, params={"n1": n1, "n2": n2})


def burgers1d(omega: float = 14 * math.pi) -> ProblemSpec:
    def u(x):
        return np.sin(omega * _col(x, 0))

    def f(x):
        t = _col(x, 0)
        return 0.5 * omega * np.sin(2 * omega * t) + omega**2 * np.sin(omega * t)

    def res(x):
        t = _col(x, 0)
        s, c = np.sin(omega * t), np.cos(omega * t)
        # -u'' + u u'
        return omega**2 * s + s * omega * c - f(x)

    return ProblemSpec("burgers1d", 1, "burgers", f, u, u, res, params={"omega": omega})


def ode4(omega: float = math.pi) -> ProblemSpec:
    """u'''' = omega^4 sin(omega x) with u = sin(omega x); all four conditions at x = -1."""

    def u(x):
        return np.sin(omega * _col(x, 0))

    def f(x):
        return omega**4 * np.sin(omega * _col(x, 0))

    def res(x):
        return omega**4 * np.sin(omega * _col(x, 0)) - f(x)

    ics = tuple((k, float(omega**k * math.sin(-omega + k * math.pi / 2))) for k in range(4))
    return ProblemSpec("ode4", 1, "ode4", f, u, u, res, params={"omega": omega}, initial_conditions=ics)


def poisson_inverse(omega: float = math.pi) -> ProblemSpec:
    """-lap(u) = lam cos(omega x) sin(omega y) with lam_gt = 2 omega^2."""

    def phi(x):
        return np.cos(omega * _col(x, 0)) * np.sin(omega * _col(x, 1))

    lam = 2.0 * omega**2

    def res(x):
        return 2.0 * omega**2 * phi(x) - lam * phi(x)

    return ProblemSpec("poisson_inverse", 2, "poisson", phi, phi, phi, res, lam=lam, inverse=True,
                       params={"omega": omega})


def poisson1d_inverse(omega: float = math.pi) -> ProblemSpec:
    """-u'' = lam cos(omega x) with lam_gt = omega^2, u = cos(omega x)."""

    def phi(x):
        return np.cos(omega * _col(x, 0))

    lam = omega**2

    def res(x):
        return omega**2 * phi(x) - lam * phi(x)

    return ProblemSpec("poisson1d_inverse", 1, "poisson", phi, phi, phi, res, lam=lam, inverse=True,
                       params={"omega": omega})


def qho_inverse(n1: int = 2, n2: int = 2) -> ProblemSpec:
    return qho2d(n1, n2, inverse=True)


BUILDERS: dict[str, Callable[..., ProblemSpec]] = {
    "poisson1d": poisson1d,
    "poisson2d": poisson2d,
    "poisson1d_hard": poisson1d_hard,
    "qho2d": qho2d,
    "burgers1d": burgers1d,
    "ode4": ode4,
    "poisson_inverse": poisson_inverse,
    "poisson1d_inverse": poisson1d_inverse,
    "qho_inverse": qho_inverse,
}


def catalog() -> list[ProblemSpec]:
    """Every registered problem at its default parameters, plus the named hard scenarios."""
    out = [build() for build in BUILDERS.values()]
    for label, params in HARD_SCENARIOS.items():
        p = poisson1d_hard(**params)
        out.append(ProblemSpec(f"poisson1d_hard_{label}", 1, "poisson", p.source, p.boundary, p.solution,
                               p.exact_residual, params=p.params))
    return out


def get_problem(name: str, **params) -> ProblemSpec:
    if name not in BUILDERS:
        raise ProblemError(f"unknown problem {name!r}; known: {sorted(BUILDERS)}")
    try:
        return BUILDERS[name](**params)
    except TypeError as exc:
        raise ProblemError(f"bad parameters for {name}: {exc}") from None


@dataclass(frozen=True)
class ErrorMetrics:
    eps1: float  # mean absolute error
    eps_inf: float
    resolution: int
    eps_lambda: float | None = None


def equidistant_grid(dim: int, resolution: int) -> np.ndarray:
    t = np.linspace(-1.0, 1.0, resolution)
    mesh = np.meshgrid(*([t] * dim), indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def error_metrics(approx: Field, problem: ProblemSpec, resolution: int = 100, lam: float | None = None) -> ErrorMetrics:
    if problem.solution is None:
        raise ProblemError(f"{problem.name} has no analytic solution")
    pts = equidistant_grid(problem.dim, resolution)
    err = np.abs(np.asarray(approx(pts), dtype=float) - problem.solution(pts))
    eps_lam = None if lam is None else abs(lam - problem.lam_gt)
    return ErrorMetrics(float(err.mean()), float(err.max()), resolution, eps_lam)

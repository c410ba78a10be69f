"""Truncated Taylor jets along one input axis, and a small recording tape.

``Jet`` holds coefficients c_0..c_K of t -> f(p + t e_axis), so
``d^k f / dx_axis^k = k! c_k``.  The arithmetic only uses ``+``, ``*``,
``@`` and the elementwise functions sin/cos/tanh/exp on its coefficients, so
the same code runs on plain numpy arrays (derivative values) and on
:class:`TapeScalar` (derivative values that can be differentiated in the
network weights by a reverse sweep).  This is the automatic-differentiation
baseline the polynomial-differentiation losses are compared against.
"""

from __future__ import annotations

import math

import numpy as np

from .nn import MLPArchitecture, NetworkError
from .problems import ProblemSpec

MAX_ORDER = 4
SMOOTH_ACTIVATIONS = ("sin", "tanh")


class JetError(ValueError):
    pass


# ---------------------------------------------------------------------------
# recording tape


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    g = np.asarray(g)
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, s in enumerate(shape):
        if s == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


class Tape:
    def __init__(self):
        self.parents: list[tuple[int, ...]] = []
        self.backward_fns: list = []
        self.shapes: list[tuple[int, ...]] = []

    def __len__(self) -> int:
        return len(self.parents)

    def var(self, value) -> "TapeScalar":
        return self._record(np.asarray(value, dtype=float), (), None)

    def _record(self, value, parents, fn) -> "TapeScalar":
        self.parents.append(parents)
        self.backward_fns.append(fn)
        self.shapes.append(np.shape(value))
        return TapeScalar(value, self, len(self.parents) - 1)

    def gradients(self, output: "TapeScalar") -> list[np.ndarray | None]:
        """Reverse sweep from a scalar output; returns one cotangent per node."""
        grads: list = [None] * len(self.parents)
        grads[output.index] = np.ones(self.shapes[output.index])
        for i in range(output.index, -1, -1):
            g = grads[i]
            fn = self.backward_fns[i]
            if g is None or fn is None:
                continue
            for p, gp in zip(self.parents[i], fn(g)):
                if gp is None:
                    continue
                gp = _unbroadcast(gp, self.shapes[p])
                grads[p] = gp if grads[p] is None else grads[p] + gp
        return grads


class TapeScalar:
    """Array value recorded on a :class:`Tape`; elementwise ops broadcast like numpy."""

    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, value, tape: Tape, index: int):
        self.value = value
        self.tape = tape
        self.index = index

    @property
    def shape(self):
        return np.shape(self.value)

    def _binary(self, other, value_fn, grad_fn):
        if isinstance(other, TapeScalar):
            val = value_fn(self.value, other.value)
            a, b = self.value, other.value
            return self.tape._record(val, (self.index, other.index), lambda g: grad_fn(g, a, b))
        other = np.asarray(other, dtype=float)
        val = value_fn(self.value, other)
        a = self.value
        return self.tape._record(val, (self.index,), lambda g: grad_fn(g, a, other)[:1])

    def _rbinary(self, other, value_fn, grad_fn):
        other = np.asarray(other, dtype=float)
        val = value_fn(other, self.value)
        b = self.value
        return self.tape._record(val, (self.index,), lambda g: grad_fn(g, other, b)[1:])

    def __add__(self, other):
        return self._binary(other, np.add, lambda g, a, b: (g, g))

    def __radd__(self, other):
        return self._rbinary(other, np.add, lambda g, a, b: (g, g))

    def __sub__(self, other):
        return self._binary(other, np.subtract, lambda g, a, b: (g, -g))

    def __rsub__(self, other):
        return self._rbinary(other, np.subtract, lambda g, a, b: (g, -g))

    def __mul__(self, other):
        return self._binary(other, np.multiply, lambda g, a, b: (g * b, g * a))

    def __rmul__(self, other):
        return self._rbinary(other, np.multiply, lambda g, a, b: (g * b, g * a))

    def __matmul__(self, other):
        return self._binary(other, np.matmul, lambda g, a, b: (g @ b.T, a.T @ g))

    def __rmatmul__(self, other):
        return self._rbinary(other, np.matmul, lambda g, a, b: (g @ b.T, a.T @ g))

    def __neg__(self):
        return self.tape._record(-self.value, (self.index,), lambda g: (-g,))

    def _unary(self, val, dval):
        return self.tape._record(val, (self.index,), lambda g: (g * dval,))

    def sin(self):
        return self._unary(np.sin(self.value), np.cos(self.value))

    def cos(self):
        return self._unary(np.cos(self.value), -np.sin(self.value))

    def tanh(self):
        t = np.tanh(self.value)
        return self._unary(t, 1.0 - t * t)

    def exp(self):
        e = np.exp(self.value)
        return self._unary(e, e)

    def sum(self):
        shape = self.shape
        return self.tape._record(np.sum(self.value), (self.index,), lambda g: (np.broadcast_to(g, shape),))

    def column(self, j: int):
        """Column ``j`` of a 2D value."""
        shape = self.shape

        def back(g):
            out = np.zeros(shape)
            out[:, j] = g
            return (out,)

        return self.tape._record(self.value[:, j], (self.index,), back)


def _apply(name: str, x):
    if isinstance(x, TapeScalar):
        return getattr(x, name)()
    return getattr(np, name)(x)


# ---------------------------------------------------------------------------
# jets


class Jet:
    def __init__(self, coeffs):
        self.c = list(coeffs)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def _check(self, other: "Jet") -> None:
        if other.order != self.order:
            raise JetError(f"jet orders differ: {self.order} vs {other.order}")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet([a + b for a, b in zip(self.c, other.c)])
        return Jet([self.c[0] + other] + self.c[1:])

    __radd__ = __add__

    def __neg__(self):
        return Jet([-a for a in self.c])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            a, b = self.c, other.c
            return Jet([_conv(a, b, k) for k in range(len(a))])
        return Jet([a * other for a in self.c])

    __rmul__ = __mul__

    def scale(self, s: float) -> "Jet":
        return Jet([s * a for a in self.c])

    def matmul(self, w) -> "Jet":
        return Jet([a @ w for a in self.c])

    def derivatives(self) -> list:
        """``[f, f', f'', ...]`` from the normalized coefficients."""
        return [c if k == 0 else math.factorial(k) * c for k, c in enumerate(self.c)]


def _conv(a, b, k):
    out = a[0] * b[k]
    for i in range(1, k + 1):
        out = out + a[i] * b[k - i]
    return out


def jet_sincos(f: Jet) -> tuple[Jet, Jet]:
    s = [_apply("sin", f.c[0])]
    c = [_apply("cos", f.c[0])]
    for k in range(1, f.order + 1):
        ds = None
        dc = None
        for j in range(1, k + 1):
            jf = (j / k) * f.c[j]
            ts, tc = jf * c[k - j], jf * s[k - j]
            ds = ts if ds is None else ds + ts
            dc = tc if dc is None else dc + tc
        s.append(ds)
        c.append(-dc)
    return Jet(s), Jet(c)


def jet_sin(f: Jet) -> Jet:
    return jet_sincos(f)[0]


def jet_cos(f: Jet) -> Jet:
    return jet_sincos(f)[1]


def jet_tanh(f: Jet) -> Jet:
    """t = tanh f from t' = f' (1 - t^2)."""
    t = [_apply("tanh", f.c[0])]
    v = [1.0 - t[0] * t[0]]  # coefficients of 1 - t^2
    for k in range(1, f.order + 1):
        acc = None
        for j in range(1, k + 1):
            term = ((j / k) * f.c[j]) * v[k - j]
            acc = term if acc is None else acc + term
        t.append(acc)
        v.append(-_conv(t, t, k))
    return Jet(t)


def jet_exp(f: Jet) -> Jet:
    e = [_apply("exp", f.c[0])]
    for k in range(1, f.order + 1):
        acc = None
        for j in range(1, k + 1):
            term = ((j / k) * f.c[j]) * e[k - j]
            acc = term if acc is None else acc + term
        e.append(acc)
    return Jet(e)


_JET_ACT = {"sin": jet_sin, "tanh": jet_tanh}


def _network_jet(arch: MLPArchitecture, layers, points: np.ndarray, axis: int, order: int) -> Jet:
    if arch.activation not in SMOOTH_ACTIVATIONS:
        raise JetError(f"jets need a smooth activation, got {arch.activation!r}")
    if not 0 <= order <= MAX_ORDER:
        raise JetError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
    if not 1 <= axis <= arch.input_dim:
        raise JetError(f"axis {axis} out of range 1..{arch.input_dim}")
    seed = np.zeros_like(points)
    seed[:, axis - 1] = 1.0
    x = Jet([points, seed] + [np.zeros_like(points)] * (order - 1))
    if order == 0:
        x = Jet([points])
    act = _JET_ACT[arch.activation]
    for w, b in layers[:-1]:
        x = act(x.matmul(w) + b)
    w, b = layers[-1]
    return x.matmul(w) + b


def nn_axis_derivatives(arch: MLPArchitecture, theta, points, axis: int = 1, order: int = 2) -> np.ndarray:
    """Exact derivatives ``d^k u / dx_axis^k`` for k = 0..order, shape (order+1, npoints)."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta[: arch.n_params])):
        raise NetworkError("non-finite network parameters")
    pts = np.asarray(points, dtype=float).reshape(-1, arch.input_dim)
    out = _network_jet(arch, arch.unpack(theta), pts, axis, order)
    return np.stack([d[:, 0] for d in out.derivatives()])


# ---------------------------------------------------------------------------
# MSE collocation loss through jets + tape


def _tape_layers(tape: Tape, arch: MLPArchitecture, theta: np.ndarray):
    return [(tape.var(w), tape.var(b)) for w, b in arch.unpack(theta)]


def _mean_square(r: TapeScalar) -> TapeScalar:
    return (r * r).sum() * (1.0 / r.shape[0])


def mse_loss_and_grad(
    arch: MLPArchitecture,
    theta,
    problem: ProblemSpec,
    interior,
    boundary=None,
    weights: tuple[float, float, float] = (1.0, 1.0, 0.0),
) -> tuple[float, np.ndarray, dict]:
    """Mean-square residual loss with input derivatives from jets.

    Returns ``(loss, gradient, terms)``; the gradient covers the network
    parameters and, for inverse problems, the trailing lam entry.  ``terms``
    holds the interior/boundary/data contributions.  ``weights`` scales the
    interior, boundary and data (solution observation) terms.
    """
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise NetworkError("non-finite network parameters")
    interior = np.asarray(interior, dtype=float).reshape(-1, problem.dim)
    wr, ws, wd = weights
    tape = Tape()
    layers = _tape_layers(tape, arch, theta)
    trainable_lam = problem.inverse and theta.shape[0] > arch.n_params
    lam = tape.var(theta[arch.n_params]) if trainable_lam else problem.lam
    zero = tape.var(0.0)
    terms = {"r": zero, "s": zero, "d": zero}

    if len(interior):
        terms["r"] = _mean_square(_mse_residual(arch, layers, problem, interior, lam))
        if wd and problem.solution is not None:
            u = _network_jet(arch, layers, interior, 1, 0).c[0].column(0)
            terms["d"] = _mean_square(u - problem.solution(interior))

    if problem.kind == "ode4":
        left = np.array([[-1.0]])
        order = max(k for k, _ in problem.initial_conditions)
        derivs = _network_jet(arch, layers, left, 1, order).derivatives()
        s = zero
        for k, value in problem.initial_conditions:
            d = derivs[k].column(0) - value
            s = s + (d * d).sum()
        terms["s"] = s * (1.0 / len(problem.initial_conditions))
    elif boundary is not None and len(boundary):
        boundary = np.asarray(boundary, dtype=float).reshape(-1, problem.dim)
        u = _network_jet(arch, layers, boundary, 1, 0).c[0].column(0)
        terms["s"] = _mean_square(u - problem.boundary(boundary))

    total = terms["r"] * wr + terms["s"] * ws + terms["d"] * wd
    grads = tape.gradients(total)
    flat = []
    for w, b in layers:
        for v in (w, b):
            g = grads[v.index]
            flat.append(np.zeros(v.shape).reshape(-1) if g is None else g.reshape(-1))
    if trainable_lam:
        g = grads[lam.index]
        flat.append(np.array([0.0 if g is None else float(g)]))
        flat.append(np.zeros(theta.shape[0] - arch.n_params - 1))
    else:
        flat.append(np.zeros(theta.shape[0] - arch.n_params))
    values = {k: float(v.value) for k, v in terms.items()}
    return float(total.value), np.concatenate(flat), values


def _mse_residual(arch, layers, problem: ProblemSpec, pts: np.ndarray, lam):
    kind = problem.kind
    if kind in ("poisson", "qho"):
        lap = None
        u = None
        for axis in range(1, problem.dim + 1):
            d = _network_jet(arch, layers, pts, axis, 2).derivatives()
            u = d[0].column(0)
            dd = d[2].column(0)
            lap = dd if lap is None else lap + dd
        if kind == "poisson":
            return -lap - lam * problem.source(pts)
        pot = np.sum(pts * pts, axis=1)
        return -lap + pot * u - lam * u
    if kind == "burgers":
        d = _network_jet(arch, layers, pts, 1, 2).derivatives()
        u, du, ddu = (x.column(0) for x in d)
        return -ddu + u * du - problem.source(pts)
    d = _network_jet(arch, layers, pts, 1, 4).derivatives()
    return d[4].column(0) - problem.source(pts)

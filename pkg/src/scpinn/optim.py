"""Adam on the full Legendre batch, forward and inverse training loops."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .losses import DivergenceError, LossEvaluator, LossSpec
from .nn import MLPArchitecture, forward, init
from .problems import ErrorMetrics, ProblemSpec, error_metrics


@dataclass
class AdamState:
    size: int
    lr: float | np.ndarray = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)
    step: int = field(init=False, default=0)

    def __post_init__(self):
        self.m = np.zeros(self.size)
        self.v = np.zeros(self.size)


def adam_step(state: AdamState, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """One bias-corrected Adam update; returns the new parameter vector."""
    grad = np.asarray(grad, dtype=float)
    if grad.shape != theta.shape:
        raise ValueError(f"gradient shape {grad.shape} != parameter shape {theta.shape}")
    if not np.all(np.isfinite(grad)):
        raise DivergenceError("non-finite gradient")
    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    mhat = state.m / (1.0 - state.beta1**state.step)
    vhat = state.v / (1.0 - state.beta2**state.step)
    return theta - state.lr * mhat / (np.sqrt(vhat) + state.eps)


@dataclass
class TrainConfig:
    epochs: int = 1000
    lr: float = 1e-3
    lr_lambda: float | None = None  # defaults to lr
    seed: int = 0
    eval_resolution: int = 100
    checkpoint_every: int = 0  # 0: metrics only at the end


@dataclass
class TrainReport:
    total: list[float] = field(default_factory=list)
    r: list[float] = field(default_factory=list)
    s: list[float] = field(default_factory=list)
    wall: list[float] = field(default_factory=list)  # seconds per epoch
    lam: list[float] = field(default_factory=list)  # lambda before each update (inverse runs)
    checkpoints: list[tuple[int, ErrorMetrics]] = field(default_factory=list)
    theta: np.ndarray | None = None
    final_loss: float = float("nan")
    final_lambda: float | None = None
    metrics: ErrorMetrics | None = None
    diverged: bool = False

    @property
    def epochs(self) -> int:
        return len(self.total)

    def median_epoch_time(self) -> float:
        return float(np.median(self.wall)) if self.wall else float("nan")


def _metrics(arch, theta, problem, resolution, lam):
    if problem.solution is None:
        return None
    return error_metrics(lambda p: forward(arch, theta, p), problem, resolution, lam)


def _run(problem: ProblemSpec, spec: LossSpec, arch: MLPArchitecture, config: TrainConfig,
         theta: np.ndarray, inverse: bool) -> TrainReport:
    evaluator = LossEvaluator(problem, spec, arch)
    lr = np.full(theta.shape, config.lr)
    if inverse:
        lr[arch.n_params:] = config.lr if config.lr_lambda is None else config.lr_lambda
    state = AdamState(theta.size, lr=lr)
    report = TrainReport()
    lam_index = arch.n_params if inverse else None
    with np.errstate(over="ignore", invalid="ignore"):  # blow-ups are caught and flagged below
        _loop(evaluator, state, report, problem, arch, config, theta, lam_index)
    theta = report.theta
    if lam_index is not None:
        report.final_lambda = float(theta[lam_index])
    if not report.diverged:
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                report.final_loss = evaluator.loss_and_grad(theta).total
        except DivergenceError:
            report.diverged = True
    if np.all(np.isfinite(theta)):
        report.metrics = _metrics(arch, theta, problem, config.eval_resolution, report.final_lambda)
    return report


def _loop(evaluator, state, report, problem, arch, config, theta, lam_index) -> None:
    for epoch in range(config.epochs):
        t0 = time.perf_counter()
        try:
            out = evaluator.loss_and_grad(theta)
            new_theta = adam_step(state, theta, out.grad)
        except DivergenceError:
            report.diverged = True
            break
        report.wall.append(time.perf_counter() - t0)
        report.total.append(out.total)
        report.r.append(out.r)
        report.s.append(out.s)
        if lam_index is not None:
            report.lam.append(float(theta[lam_index]))
        theta = new_theta
        if config.checkpoint_every and (epoch + 1) % config.checkpoint_every == 0:
            lam = float(theta[lam_index]) if lam_index is not None else None
            report.checkpoints.append((epoch + 1, _metrics(arch, theta, problem, config.eval_resolution, lam)))
    report.theta = theta


def train(problem: ProblemSpec, spec: LossSpec, arch: MLPArchitecture, config: TrainConfig,
          theta0: np.ndarray | None = None) -> TrainReport:
    """Full-batch Adam on the loss; deterministic for a fixed seed."""
    theta = init(arch, config.seed) if theta0 is None else np.array(theta0, dtype=float)
    return _run(problem, spec, arch, config, theta, inverse=False)


def train_inverse(problem: ProblemSpec, spec: LossSpec, arch: MLPArchitecture, config: TrainConfig,
                  lam0: float, theta0: np.ndarray | None = None) -> TrainReport:
    """Joint training of the network and the problem's scalar unknown."""
    if not (problem.inverse and problem.has_lambda):
        raise ValueError(f"{problem.name} has no unknown scalar to infer")
    if not np.isfinite(lam0):
        raise ValueError("initial lambda must be finite")
    if theta0 is None:
        theta = init(arch, config.seed, extras=(lam0,))
    else:
        theta = np.concatenate([np.asarray(theta0, dtype=float)[: arch.n_params], [lam0]])
    return _run(problem, spec, arch, config, theta, inverse=True)

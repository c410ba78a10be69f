"""Timing of k-th input derivatives: polynomial differentiation vs jets."""

from __future__ import annotations

import csv
import io
import time

import numpy as np

from .diff import apply_axis
from .grid import tensor_grid
from .jets import nn_axis_derivatives
from .nn import MLPArchitecture, forward_batch, init

COLUMNS = ("method", "order", "points", "median_ms", "ratio")


def _median_ms(fn, repetitions: int) -> float:
    fn()  # warm caches (differentiation matrices, allocator)
    times = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return 1e3 * float(np.median(times))


def time_pd(arch: MLPArchitecture, theta, points: int, order: int, repetitions: int = 5) -> float:
    """Network values on the Legendre grid, then ``order`` differentiation-matrix applications."""
    grid = tensor_grid(1, points - 1)

    def run():
        u, _ = forward_batch(arch, theta, grid.points)
        return apply_axis(u, grid, 1, order)

    return _median_ms(run, repetitions)


def time_jet(arch: MLPArchitecture, theta, points: int, order: int, repetitions: int = 5) -> float:
    grid = tensor_grid(1, points - 1)
    return _median_ms(lambda: nn_axis_derivatives(arch, theta, grid.points, 1, order), repetitions)


def bench_derivatives(hidden=(50, 50, 50, 50), points: int = 200, orders=(0, 1, 2, 3, 4),
                      repetitions: int = 5, activation: str = "sin", seed: int = 0) -> list[dict]:
    if repetitions < 5:
        raise ValueError("at least 5 repetitions are required")
    if any(not 0 <= k <= 4 for k in orders):
        raise ValueError("derivative orders must be within 0..4")
    arch = MLPArchitecture((1, *hidden, 1), activation)
    theta = init(arch, seed)
    rows = []
    for k in orders:
        pd = time_pd(arch, theta, points, k, repetitions)
        jet = time_jet(arch, theta, points, k, repetitions)
        rows.append(dict(method="pd", order=k, points=points, median_ms=pd, ratio=1.0))
        rows.append(dict(method="jet_ad", order=k, points=points, median_ms=jet, ratio=jet / pd))
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([row["method"], row["order"], row["points"], f"{row['median_ms']:.17g}",
                         f"{row['ratio']:.17g}"])
    return buf.getvalue()

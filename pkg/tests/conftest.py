"""Shared polynomial oracles: monomial-coefficient dicts differentiated and integrated by hand."""

import math

import numpy as np
import pytest


def random_poly(rng, m, deg, terms=8):
    """Dict {exponent tuple: coefficient}, per-axis degree <= deg."""
    poly = {}
    for _ in range(terms):
        alpha = tuple(int(a) for a in rng.integers(0, deg + 1, size=m))
        poly[alpha] = poly.get(alpha, 0.0) + float(rng.uniform(-1, 1))
    return poly


def poly_eval(poly, points):
    points = np.atleast_2d(points)
    out = np.zeros(len(points))
    for alpha, c in poly.items():
        out += c * np.prod(points ** np.array(alpha), axis=1)
    return out


def poly_diff(poly, beta):
    out = {}
    for alpha, c in poly.items():
        if any(a < b for a, b in zip(alpha, beta)):
            continue
        factor = np.prod([math.perm(a, b) for a, b in zip(alpha, beta)])
        key = tuple(a - b for a, b in zip(alpha, beta))
        out[key] = out.get(key, 0.0) + c * float(factor)
    return out


def monomial_integral(alpha):
    return float(np.prod([0.0 if a % 2 else 2.0 / (a + 1) for a in alpha]))


def poly_integral(poly):
    return sum(c * monomial_integral(a) for a, c in poly.items())


def poly_abs_scale(poly):
    """sum |c| int |x^alpha|: scale used for relative errors when the integral itself cancels."""
    return sum(abs(c) * np.prod([2.0 / (a + 1) for a in alpha]) for alpha, c in poly.items())


def poly_mul(p, q):
    out = {}
    for a, c in p.items():
        for b, d in q.items():
            key = tuple(x + y for x, y in zip(a, b))
            out[key] = out.get(key, 0.0) + c * d
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

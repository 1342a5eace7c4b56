"""Shared fixtures: canonical example problems and seeded spec generation."""

import math

import numpy as np
import pytest

from mpsl.problem import BoundarySide, ProblemSpec


@pytest.fixture(scope="session")
def half_u0_spec() -> ProblemSpec:
    """u(-1) = 0, u(1) = 0.5*u(0): the standing worked example."""
    return ProblemSpec(
        minus=BoundarySide(1.0, 0.0, side="minus"),
        plus=BoundarySide(1.0, 0.0, alpha=(0.5,), beta=(0.0,), eta=(0.0,), side="plus"),
    )


@pytest.fixture(scope="session")
def two_mp_spec() -> ProblemSpec:
    """Two multi-point sides with J- = 1, J+ = 4 (summed-fraction level)."""
    return ProblemSpec(
        minus=BoundarySide(1.0, -1.0, (0.1,), (0.1,), (0.5,), "minus"),
        plus=BoundarySide(2.0, 1.0, (0.2,), (0.1,), (0.0,), "plus"),
    )


def random_side(rng: np.random.Generator, side: str, level: str) -> BoundarySide:
    m = int(rng.integers(1, 4))
    eta = tuple(float(v) for v in rng.uniform(-0.9, 0.9, size=m))
    style = float(rng.uniform())
    if style < 0.15:
        alpha0, beta0 = 0.0, float(rng.uniform(0.3, 2.0))
    elif style < 0.35:
        alpha0, beta0 = float(rng.uniform(0.3, 2.0)), 0.0
    else:
        alpha0, beta0 = float(rng.uniform(0.3, 2.0)), float(rng.uniform(0.3, 2.0))
    if side == "minus":
        beta0 = -beta0

    if rng.uniform() < 0.25:  # classical single-point side
        zeros = (0.0,) * m
        return BoundarySide(alpha0, beta0, zeros, zeros, eta, side)

    rho = float(rng.uniform(0.1, 0.85))
    if level == "linear":
        split = float(rng.uniform())
        fa, fb = rho * split, rho * (1.0 - split)
    else:
        theta = float(rng.uniform(0.0, math.pi / 2.0))
        fa, fb = rho * math.cos(theta), rho * math.sin(theta)
    if alpha0 == 0.0:
        fa = 0.0
    if beta0 == 0.0:
        fb = 0.0
    sum_alpha = fa * alpha0
    sum_beta = fb * abs(beta0)

    wa = rng.uniform(0.2, 1.0, size=m)
    wb = rng.uniform(0.2, 1.0, size=m)
    sa = rng.choice([-1.0, 1.0], size=m)
    sb = rng.choice([-1.0, 1.0], size=m)
    alpha = tuple(float(v) for v in sa * wa / wa.sum() * sum_alpha)
    beta = tuple(float(v) for v in sb * wb / wb.sum() * sum_beta)
    return BoundarySide(alpha0, beta0, alpha, beta, eta, side)


def random_spec(rng: np.random.Generator, level: str = "quadratic") -> ProblemSpec:
    """A random admissible spec at (at least) the requested hypothesis level."""
    spec = ProblemSpec(
        minus=random_side(rng, "minus", level),
        plus=random_side(rng, "plus", level),
    )
    assert spec.hypothesis_level in (("linear",) if level == "linear" else ("linear", "quadratic"))
    return spec

import math

import numpy as np
import pytest

from mpsl.errors import UnresolvableZeros
from mpsl.nodal import (
    ClosedTrace,
    SampledTrace,
    classify,
    energy_deviation,
    reflected_trace,
    zeros_of,
)
from mpsl.reference import reference_eigenfunction
from mpsl.trig import TrigSolution, eval_solution


def closed(lam, A, B) -> ClosedTrace:
    return ClosedTrace(TrigSolution(lam, A, B))


def sampled_from_solution(sol: TrigSolution, n=2001) -> SampledTrace:
    xs = np.linspace(-1.0, 1.0, n)
    u = np.empty(n)
    up = np.empty(n)
    for i, x in enumerate(xs):
        u[i], up[i] = eval_solution(sol, float(x))
    return SampledTrace(xs, u, up)


def test_zeros_of_half_period_cosine():
    z = zeros_of(closed(math.pi**2 / 4, 1.0, 0.0), "u")
    assert len(z) == 1
    assert z[0][0] == pytest.approx(0.0, abs=1e-12)
    assert z[0][1] is True


def test_zeros_of_full_period_sine():
    tr = closed(math.pi**2, 0.0, 1.0)
    zu = zeros_of(tr, "u")
    assert [x for x, _ in zu] == pytest.approx([0.0], abs=1e-12)
    zup = zeros_of(tr, "uprime")
    assert [x for x, _ in zup] == pytest.approx([-0.5, 0.5], abs=1e-12)


def test_zeros_of_subcritical_sine_has_none():
    # omega ~ 1.318: first zero of sin(omega(x+1)) is at x = pi/omega - 1 > 1.
    w0 = 1.318
    z = zeros_of(closed(w0 * w0, 0.0, 1.0), "u")
    assert z == []


def test_zeros_sampled_matches_closed():
    rng = np.random.default_rng(41)
    for _ in range(20):
        lam = float(rng.uniform(0.5, 70.0))
        A, B = rng.normal(size=2)
        sol = TrigSolution(lam, A, B)
        z_closed = [x for x, _ in zeros_of(ClosedTrace(sol), "u")]
        z_sampled = [x for x, _ in zeros_of(sampled_from_solution(sol), "u")]
        assert len(z_closed) == len(z_sampled)
        for a, b in zip(z_closed, z_sampled):
            assert b == pytest.approx(a, abs=1e-10)


def test_zeros_negative_lambda():
    # u = cosh -sinh-type combination with a single interior zero.
    sol = TrigSolution(-1.0, 1.0, -1.5)
    z = zeros_of(ClosedTrace(sol), "u")
    assert len(z) == 1
    x0 = z[0][0]
    assert eval_solution(sol, x0)[0] == pytest.approx(0.0, abs=1e-12)


def test_cluster_raises():
    xs = np.linspace(-1.0, 1.0, 2001)
    # two zeros 5e-9 apart at x = 0.3: below the resolvable separation
    gap = 5e-9
    u = (xs - 0.3) * (xs - 0.3 - gap)
    up = 2 * (xs - 0.3) - gap
    with pytest.raises(UnresolvableZeros):
        zeros_of(SampledTrace(xs, u, up), "u")


def test_classify_cos_half_period():
    result = classify(closed(math.pi**2 / 4, 1.0, 0.0))
    assert result.has("S", 1, "+")
    assert result.status["T"] == ("unclassified", "boundary-degenerate")
    assert result.status["R"] == ("unclassified", "boundary-degenerate")


def test_classify_sin_half_period():
    result = classify(closed(math.pi**2 / 4, 0.0, 1.0))
    assert result.has("T", 1, "+")
    assert result.status["S"] == ("unclassified", "boundary-degenerate")


def test_classify_R_example_from_eigenfunction():
    # psi_1^0: u'(-1) > 0, u(1) < 0, one simple interior zero -> R_1^+
    # (the count rule admits k or k+1 zeros).
    psi = reference_eigenfunction(
        "robin-robin", 1, robin_minus=(1.0, -1.0), robin_plus=(1.0, 1.0)
    )
    result = classify(ClosedTrace(psi))
    u1 = eval_solution(psi, 1.0)[0]
    assert eval_solution(psi, -1.0)[1] > 0 and u1 < 0
    assert len(result.zeros_u) in (1, 2)
    assert result.has("R", 1, "+")


def test_classify_R_example_two_zeros():
    # A hand-made trace with u'(-1) > 0, u(1) < 0 and exactly two simple
    # interior zeros: the odd-parity count rule puts it in R_1^+.
    a, b, c = -0.4, 0.3, 1.5
    xs = np.linspace(-1.0, 1.0, 2001)
    u = (xs - a) * (xs - b) * (xs - c)
    up = 3 * xs**2 - 2 * (a + b + c) * xs + (a * b + a * c + b * c)
    tr = SampledTrace(xs, u, up)
    assert tr.eval(-1.0)[1] > 0 and tr.eval(1.0)[0] < 0
    result = classify(tr)
    assert len(result.zeros_u) == 2
    assert result.has("R", 1, "+")
    assert result.has("S", 2, "-")  # u(-1) < 0 with two simple zeros


def test_classify_sign_flip():
    result = classify(closed(math.pi**2 / 4, -1.0, 0.0))
    assert result.has("S", 1, "-")


def test_classify_R_nonstandard_minus_one():
    # u'(-1) > 0, u(1) < 0, no interior zeros -> R_{-1}^+ (flagged).
    xs = np.linspace(-1.0, 1.0, 2001)
    u = -2.0 + (1.0 - xs**2) / 2.0  # stays negative, rising at x = -1
    up = -xs
    tr = SampledTrace(xs, u, up)
    assert tr.eval(1.0)[0] < 0 and tr.eval(-1.0)[1] > 0
    result = classify(tr)
    m = result.member("R")
    assert m is not None and m.k == -1 and m.note == "nonstandard"


def test_classify_family_hint():
    result = classify(closed(math.pi**2 / 4, 1.0, 0.0), family_hint="S")
    assert set(result.status) == {"S"}


def test_T_interleaving_condition():
    # sin over two full periods: u' zeros interleaved by u zeros.
    result = classify(closed((2 * math.pi) ** 2, 0.0, 1.0))
    m = result.member("T")
    assert m is not None and m.k == 4


def test_disjointness_within_family():
    rng = np.random.default_rng(42)
    for _ in range(100):
        lam = float(rng.uniform(0.3, 90.0))
        A, B = rng.normal(size=2)
        result = classify(closed(lam, A, B))
        for fam in ("S", "T", "R"):
            assert sum(1 for m in result.memberships if m.family == fam) <= 1


def test_openness_under_perturbation():
    rng = np.random.default_rng(43)
    base = TrigSolution(11.0, 0.8, 1.1)
    tr = sampled_from_solution(base)
    verdict = {(m.family, m.k, m.sign) for m in classify(tr).memberships}
    for _ in range(5):
        delta = 1e-9 * rng.normal(size=3)
        pert = SampledTrace(
            tr.x,
            tr.u + delta[0] + delta[1] * np.sin(3 * tr.x),
            tr.up + delta[2] + 3 * delta[1] * np.cos(3 * tr.x),
        )
        assert {(m.family, m.k, m.sign) for m in classify(pert).memberships} == verdict


def _ref(kind, k):
    if k < 0:
        return 0.0
    from mpsl.reference import reference_eigenvalue

    return reference_eigenvalue(kind, k)


def test_membership_implies_lambda_bounds():
    # For any solution of the equation (no boundary conditions imposed):
    # T_{k+1} forces lam in (lam_k^N, lam_{k+2}^N), S_k in (lam_{k-2}^D, lam_k^D),
    # R_k in (lam_{k-1}^M, lam_{k+1}^M).
    rng = np.random.default_rng(44)
    checked = {"S": 0, "T": 0, "R": 0}
    for _ in range(400):
        lam = float(rng.uniform(0.2, 80.0))
        A, B = rng.normal(size=2)
        result = classify(closed(lam, A, B))
        m = result.member("T")
        if m is not None:
            k = m.k - 1  # T_{k+1} with k = m.k - 1
            assert _ref("neumann", k) < lam < _ref("neumann", k + 2)
            checked["T"] += 1
        m = result.member("S")
        if m is not None:
            k = m.k
            assert _ref("dirichlet", k - 2) < lam < _ref("dirichlet", k)
            checked["S"] += 1
        m = result.member("R")
        if m is not None and m.k >= 0:
            k = m.k
            assert _ref("mixed", k - 1) < lam < _ref("mixed", k + 1)
            checked["R"] += 1
    assert all(v > 50 for v in checked.values())


def test_membership_single_bc_bounds():
    # With the minus-side Robin condition imposed, the Robin reference
    # families bracket the parameter.
    from mpsl.reference import separated_eigenvalue

    robin = (1.0, -1.0)
    rng = np.random.default_rng(45)
    for _ in range(200):
        lam = float(rng.uniform(0.2, 70.0))
        sol = TrigSolution(lam, -robin[1], robin[0])  # satisfies the Robin BC
        result = classify(ClosedTrace(sol))
        m = result.member("T")
        if m is not None:
            k = m.k - 1
            lo = separated_eigenvalue(robin, (0.0, 1.0), k) if k >= 0 else None
            hi = separated_eigenvalue(robin, (0.0, 1.0), k + 1)
            if lo is not None:
                assert lo < lam
            assert lam < hi
        m = result.member("S")
        if m is not None:
            k = m.k
            lo = separated_eigenvalue(robin, (1.0, 0.0), k - 1) if k >= 1 else 0.0
            hi = separated_eigenvalue(robin, (1.0, 0.0), k)
            assert lo < lam < hi


def test_energy_deviation_exact_solution():
    assert energy_deviation(math.pi**2 / 4, closed(math.pi**2 / 4, 1.0, 0.0)) <= 1e-12


def test_energy_deviation_flags_nonsolution():
    xs = np.linspace(-1.0, 1.0, 2001)
    tr = SampledTrace(xs, xs**2, 2 * xs)
    assert energy_deviation(1.0, tr) > 0.5


def test_energy_deviation_requires_positive_lambda():
    with pytest.raises(ValueError):
        energy_deviation(0.0, closed(1.0, 1.0, 0.0))


def test_bc_satisfaction_flags(half_u0_spec):
    psi = TrigSolution(math.pi**2, 0.0, 1.0)
    result = classify(ClosedTrace(psi), spec=half_u0_spec)
    assert result.satisfies_minus_bc is True
    assert result.satisfies_plus_bc is True
    off = TrigSolution(2.0, 0.3, 1.0)
    result = classify(ClosedTrace(off), spec=half_u0_spec)
    assert result.satisfies_minus_bc is False


def test_reflected_trace():
    sol = TrigSolution(7.3, 0.6, -0.9)
    refl = reflected_trace(ClosedTrace(sol))
    for x in (-0.8, -0.1, 0.5):
        u, up = eval_solution(sol, -x)
        ru, rup = refl.eval(x)
        assert ru == pytest.approx(u, rel=1e-12)
        assert rup == pytest.approx(-up, rel=1e-12)


def test_sampled_trace_validation():
    xs = np.linspace(-1.0, 1.0, 101)  # step 0.02 > 1e-3
    with pytest.raises(ValueError):
        SampledTrace(xs, xs, np.ones_like(xs))

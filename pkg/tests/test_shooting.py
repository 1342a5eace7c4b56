import math

import numpy as np
import pytest

from mpsl.errors import DivergenceError, NoConvergence, SingularSystem
from mpsl.expressions import ForcingTerm, NonlinearitySpec
from mpsl.problem import BoundarySide, ProblemSpec
from mpsl.shooting import (
    collocation_residual,
    integrate_ivp,
    nonlinear_energy_deviation,
    nonresonance_check,
    shooting_residuals,
    solve_bvp,
    solve_bvp_multistart,
)
from mpsl.spectrum import eigen_continuation
from mpsl.trig import TrigSolution, eval_solution

LIN = NonlinearitySpec.from_text("xi", f0=1.0, finf=1.0)


def test_integrate_linear_reduction():
    lam = math.pi**2 / 4
    tr = integrate_ivp(LIN, None, lam, 0.0, 1.0)
    exact = TrigSolution(lam, 0.0, 1.0)
    for x in np.linspace(-1.0, 1.0, 81):
        u, up = tr.eval(float(x))
        eu, eup = eval_solution(exact, float(x))
        assert u == pytest.approx(eu, abs=1e-9)
        assert up == pytest.approx(eup, abs=1e-9)
    assert collocation_residual(tr, LIN, None, lam) <= 1e-7


def test_integrate_trivial_solution():
    nl = NonlinearitySpec.from_text("xi^3", f0=1.0, finf=math.inf)
    tr = integrate_ivp(nl, None, 1.0, 0.0, 0.0)
    assert tr.sup_u() == 0.0


def test_integrate_dense_output_step():
    tr = integrate_ivp(LIN, None, 1.0, 0.3, -0.2)
    assert np.max(np.diff(tr.x)) <= 1e-3 * (1 + 1e-9)
    assert tr.x[0] == -1.0 and tr.x[-1] == 1.0


def test_linear_energy_identity_on_integrated_trace():
    from mpsl.nodal import energy_deviation

    lam = 7.3
    tr = integrate_ivp(LIN, None, lam, 0.4, -0.9)
    assert energy_deviation(lam, tr) <= 1e-8


def test_nonlinear_energy_identity():
    nl = NonlinearitySpec.from_text("xi*(1+3/(1+xi^2))", f0=4.0, finf=1.0)
    tr = integrate_ivp(nl, None, 0.5, 0.0, 0.1)
    assert nonlinear_energy_deviation(tr, nl, 0.5) <= 1e-8


def test_blowup_detection():
    # -u'' = lam*(-u) with lam large: pure exponential growth past 1e12
    # well before x = 1.
    nl = NonlinearitySpec.from_text("-xi", f0=1.0, finf=1.0)
    with pytest.raises(DivergenceError) as exc:
        integrate_ivp(nl, None, 3600.0, 1.0, 60.0)
    assert -1.0 <= exc.value.x <= 1.0


def test_solve_bvp_criterion_six_config(half_u0_spec):
    nl = NonlinearitySpec.from_text("xi/(1+abs(xi))", f0=1.0, finf=0.0)
    h = ForcingTerm.from_text("x")
    sol = solve_bvp_multistart(half_u0_spec, nl, h, 1.0)
    assert sol.accepted()
    assert sol.collocation_residual <= 1e-7
    # independent re-integration at tighter tolerance
    tr2 = integrate_ivp(nl, h, 1.0, sol.shooting.a, sol.shooting.b,
                        rtol=1e-12, atol=1e-13)
    for x in np.linspace(-1.0, 1.0, 41):
        assert tr2.eval(float(x))[0] == pytest.approx(sol.trace.eval(float(x))[0], abs=1e-8)


def test_solve_bvp_linear_nonresonant_homogeneous(half_u0_spec):
    sol = solve_bvp(half_u0_spec, LIN, None, 1.0, (0.1, 0.1))
    assert sol.amplitude <= 1e-9


def test_solve_bvp_at_exact_resonance(half_u0_spec):
    # At lam = lam_0 with h = 0 the problem is resonant: the Jacobian is
    # singular up to finite-difference noise.  Either the guard fires or
    # Newton lands somewhere on the eigenline (every multiple of psi_0
    # solves the problem there) -- never on a spurious answer.
    ep = eigen_continuation(half_u0_spec, 0)
    try:
        sol = solve_bvp(half_u0_spec, LIN, None, ep.lam, (ep.psi.A + 0.1, ep.psi.B - 0.05))
    except (SingularSystem, NoConvergence):
        return
    ratio = sol.shooting.b / ep.psi.B
    assert sol.shooting.a == pytest.approx(ratio * ep.psi.A, abs=1e-8)


def test_solve_bvp_forced_resonance_fails(half_u0_spec):
    # Forcing with a component along the eigenfunction leaves no solution at
    # resonance: the solver must fail rather than fabricate one.
    ep = eigen_continuation(half_u0_spec, 0)
    h = ForcingTerm.from_text("1")
    with pytest.raises((SingularSystem, NoConvergence)):
        solve_bvp(half_u0_spec, LIN, h, ep.lam, (0.3, 0.4))


def test_shooting_jacobian_conditioning_near_spectrum(half_u0_spec):
    # For f = xi the shooting Jacobian degenerates exactly on the spectrum:
    # near lam_0 its condition number dwarfs the mid-gap value.
    def jac_cond(lam):
        base = shooting_residuals(half_u0_spec, LIN, None, lam, 0.3, 0.4)[:2]
        J = np.empty((2, 2))
        for col, d in enumerate(((1e-6, 0.0), (0.0, 1e-6))):
            r = shooting_residuals(
                half_u0_spec, LIN, None, lam, 0.3 + d[0], 0.4 + d[1]
            )[:2]
            J[:, col] = [(r[0] - base[0]) / 1e-6, (r[1] - base[1]) / 1e-6]
        return np.linalg.cond(J)

    lam0 = eigen_continuation(half_u0_spec, 0).lam
    mid = 0.5 * (lam0 + math.pi**2)
    assert jac_cond(lam0 + 0.01) > 1e3 * 0.001
    assert jac_cond(lam0 + 0.01) / jac_cond(mid) > 1e3 * 1e-3
    assert jac_cond(lam0 + 1e-7) > 1e3 * jac_cond(mid)


def test_multistart_deterministic(half_u0_spec):
    nl = NonlinearitySpec.from_text("xi/(1+abs(xi))", f0=1.0, finf=0.0)
    h = ForcingTerm.from_text("x")
    s1 = solve_bvp_multistart(half_u0_spec, nl, h, 1.0, seed=3)
    s2 = solve_bvp_multistart(half_u0_spec, nl, h, 1.0, seed=3)
    assert s1.shooting.a == s2.shooting.a
    assert s1.shooting.b == s2.shooting.b
    assert list(s1.trace.u) == list(s2.trace.u)


def test_nonresonance_pass(half_u0_spec):
    nl = NonlinearitySpec.from_text("xi/(1+abs(xi))", f0=1.0, finf=0.0)
    v = nonresonance_check(half_u0_spec, nl)
    assert v.ok
    assert v.nearest_eigenvalue == pytest.approx(1.7374299783, abs=1e-6)


def test_nonresonance_resonant(half_u0_spec):
    lam0 = eigen_continuation(half_u0_spec, 0).lam
    nl = NonlinearitySpec.from_text("xi", f0=1.0, finf=lam0)
    v = nonresonance_check(half_u0_spec, nl)
    assert not v.ok and "resonant" in v.reason


def test_nonresonance_out_of_scope():
    spec = ProblemSpec(
        minus=BoundarySide(0.0, -1.0, side="minus"),
        plus=BoundarySide(0.0, 1.0, side="plus"),
    )
    nl = NonlinearitySpec.from_text("xi/(1+abs(xi))", f0=1.0, finf=0.0)
    v = nonresonance_check(spec, nl)
    assert not v.ok and v.out_of_scope

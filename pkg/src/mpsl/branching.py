"""Continua of nontrivial solutions of -u'' = lam*f(u): tracing and nodal audits.

Branches of nontrivial solutions bifurcate from the trivial line at
(lam_k/f0, 0) and from infinity at (lam_k/finf, infty).  Both are traced in
shooting coordinates z = (lam, a, b) by pseudo-arclength continuation: a
secant predictor followed by a damped Newton corrector on the two boundary
residuals plus the arclength constraint.  Folds in lam are expected and
handled; every accepted point carries a BVP-residual certificate, a nodal
audit and the nonlinear energy deviation.

The nodal-solution pipeline runs the appropriate tracer when the slopes
f0, finf straddle lam_k, refines the crossing of lam = 1 and returns the
pair of sign-symmetric solutions with their nodal verdicts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .conditions import side_thresholds
from .errors import (
    DivergenceError,
    HypothesisReport,
    NoConvergence,
    NoCrossing,
    NumericError,
    SeedFailure,
    SingularSystem,
)
from .expressions import F_BIG, F_SMALL, NonlinearitySpec, certify_hypotheses
from .nodal import ClosedTrace, NodalClass, classify
from .problem import ProblemSpec
from .shooting import (
    RESIDUAL_TOL,
    SampledSolution,
    ShootingState,
    nonlinear_energy_deviation,
    shooting_residuals,
    side_scale,
    solve_bvp,
)
from .spectrum import Eigenpair, continuation_spectrum, eigen_continuation

AMPLITUDE_CAP = 1e6
POINT_BUDGET = 10000
FOLD_CAP = 40
DS_INIT = 1e-2
DS_MIN = 1e-5
DS_MAX = 0.2

FROM_ZERO = "from_zero"
FROM_INFINITY = "from_infinity"

TERM_CROSSED = "crossed_lambda_one"
TERM_AMPLITUDE = "amplitude_cap"
TERM_LAMBDA = "lambda_cap"
TERM_SECONDARY = "secondary_bifurcation_suspected"
TERM_FOLDS = "fold_count_cap"
TERM_POINTS = "point_budget"
TERM_TRIVIAL = "returned_to_trivial"


@dataclass(frozen=True)
class BranchPoint:
    lam: float
    shooting: ShootingState
    amplitude: float
    nodal: tuple[NodalClass, ...]
    arclength: float
    energy_dev: float | None
    scales: tuple[float, float] = (1.0, 1.0)


@dataclass
class Branch:
    k: int
    sign: str  # '+' or '-'
    origin: str  # FROM_ZERO or FROM_INFINITY
    origin_lambda: float
    points: list[BranchPoint] = field(default_factory=list)
    termination: str = ""
    returned_to_trivial_j: int | None = None

    def lambdas(self) -> list[float]:
        return [p.lam for p in self.points]

    def amplitudes(self) -> list[float]:
        return [p.amplitude for p in self.points]


class _BranchProblem:
    """Residuals of the lam-parameterized BVP in shooting coordinates."""

    def __init__(self, spec: ProblemSpec, nl: NonlinearitySpec):
        self.spec = spec
        self.nl = nl

    def residuals(self, z) -> tuple[float, float, object, float, float]:
        lam, a, b = z
        rm, rp, trace = shooting_residuals(self.spec, self.nl, None, lam, a, b)
        sm = side_scale(self.spec.minus, trace)
        sp = side_scale(self.spec.plus, trace)
        return rm, rp, trace, sm, sp

    def bvp_error(self, rm, rp, sm, sp) -> float:
        return max(abs(rm) / sm, abs(rp) / sp)


def _make_point(problem: _BranchProblem, z, rm, rp, trace, sm, sp, arclength) -> BranchPoint:
    lam, a, b = z
    amplitude = trace.sup_u()
    memberships: tuple[NodalClass, ...] = ()
    if amplitude > 0.0:
        try:
            memberships = tuple(classify(trace).memberships)
        except NumericError:
            memberships = ()
    energy = None
    if lam > 0.0 and amplitude > 0.0:
        try:
            energy = nonlinear_energy_deviation(trace, problem.nl, lam)
        except NumericError:
            energy = None
    return BranchPoint(
        lam=lam,
        shooting=ShootingState(a=a, b=b, lam=lam, residuals=(rm, rp)),
        amplitude=amplitude,
        nodal=memberships,
        arclength=arclength,
        energy_dev=energy,
        scales=(sm, sp),
    )


def _corrector(problem: _BranchProblem, z_pred, tau, weights, tol=RESIDUAL_TOL,
               max_iter=8, max_halvings=12):
    """Newton on (r-, r+, arc) from the predicted point.

    The arc constraint <w*(z - z_pred), w*tau> = 0 pins the parameterization;
    acceptance is judged on the scaled BVP residuals alone.
    """
    z = np.asarray(z_pred, dtype=float)
    rm, rp, trace, sm, sp = problem.residuals(z)
    err = problem.bvp_error(rm, rp, sm, sp)
    wtau = weights * tau
    for _ in range(max_iter):
        if err <= tol:
            return z, rm, rp, trace, sm, sp
        arc = float(np.dot(weights * (z - z_pred), wtau))
        J = np.empty((3, 3))
        base = np.array([rm, rp, arc])
        for col in range(3):
            dz = 1e-6 * (1.0 + abs(z[col]))
            zp = z.copy()
            zp[col] += dz
            try:
                rm2, rp2, _, _, _ = problem.residuals(zp)
            except DivergenceError:
                raise NoConvergence(err, "Jacobian probe diverged")
            arc2 = float(np.dot(weights * (zp - z_pred), wtau))
            J[:, col] = [(rm2 - rm) / dz, (rp2 - rp) / dz, (arc2 - arc) / dz]
        try:
            step = np.linalg.solve(J, -base)
        except np.linalg.LinAlgError:
            raise SingularSystem(math.inf)
        damp = 1.0
        for _h in range(max_halvings):
            cand = z + damp * step
            try:
                rm2, rp2, trace2, sm2, sp2 = problem.residuals(cand)
            except DivergenceError:
                damp *= 0.5
                continue
            err2 = problem.bvp_error(rm2, rp2, sm2, sp2)
            if err2 < err or err2 <= tol:
                z, rm, rp, trace, sm, sp, err = cand, rm2, rp2, trace2, sm2, sp2, err2
                break
            damp *= 0.5
        else:
            raise NoConvergence(err, "corrector damping exhausted")
    if err <= tol:
        return z, rm, rp, trace, sm, sp
    raise NoConvergence(err, "corrector iteration budget exhausted")


def _continue_branch(
    problem: _BranchProblem,
    branch: Branch,
    z_prev,
    z_curr,
    stop_at_lambda: float | None,
    amplitude_cap: float,
    lambda_cap: float,
    point_budget: int,
    trivial_targets: list[tuple[int, float]],
) -> None:
    """March the branch from z_curr with initial tangent z_curr - z_prev."""
    ds = DS_INIT
    z_prev = np.asarray(z_prev, dtype=float)
    z = np.asarray(z_curr, dtype=float)
    folds = 0
    last_dlam = 0.0
    while len(branch.points) < point_budget:
        weights = 1.0 / np.maximum(1.0, np.abs(z))
        tau = (z - z_prev) * weights
        nrm = float(np.linalg.norm(tau))
        if nrm == 0.0:
            raise NumericError("stalled tangent")
        tau /= nrm

        accepted = None
        while True:
            z_pred = z + ds * tau / weights
            try:
                accepted = _corrector(problem, z_pred, tau, weights)
                break
            except (NoConvergence, SingularSystem) as exc:
                if ds <= DS_MIN:
                    branch.termination = TERM_SECONDARY
                    return
                ds = max(DS_MIN, 0.5 * ds)
        z_new, rm, rp, trace, sm, sp = accepted
        arclength = branch.points[-1].arclength + float(
            np.linalg.norm((z_new - z) * weights)
        )
        point = _make_point(problem, z_new, rm, rp, trace, sm, sp, arclength)
        prev_lam = z[0]
        z_prev, z = z, z_new
        branch.points.append(point)
        ds = min(DS_MAX, ds * 1.4)

        dlam = point.lam - prev_lam
        if abs(dlam) > max(1e-8, 1e-6 * abs(point.lam)):
            if last_dlam != 0.0 and math.copysign(1.0, dlam) != math.copysign(1.0, last_dlam):
                folds += 1
            last_dlam = dlam

        if stop_at_lambda is not None and (prev_lam - stop_at_lambda) * (
            point.lam - stop_at_lambda
        ) <= 0.0 and point.lam != prev_lam:
            branch.termination = TERM_CROSSED
            return
        if point.amplitude >= amplitude_cap:
            branch.termination = TERM_AMPLITUDE
            return
        if point.lam >= lambda_cap or point.lam <= 1e-10:
            branch.termination = TERM_LAMBDA
            return
        if folds >= FOLD_CAP:
            branch.termination = TERM_FOLDS
            return
        if point.amplitude < 1e-5:
            for j, lam_triv in trivial_targets:
                if abs(point.lam - lam_triv) < 1e-3:
                    branch.termination = TERM_TRIVIAL
                    branch.returned_to_trivial_j = j
                    return
    branch.termination = TERM_POINTS


def _trivial_targets(spec: ProblemSpec, nl: NonlinearitySpec, k: int, lambda_cap: float):
    """Nearby bifurcation-from-zero parameters lam_j/f0 (j != k) for the
    returned-to-trivial detection (windowed to a handful of indices)."""
    targets = []
    try:
        pairs = continuation_spectrum(spec, k + 4)
        for ep in pairs:
            if ep.k != k and ep.lam / nl.f0 <= lambda_cap:
                targets.append((ep.k, ep.lam / nl.f0))
    except NumericError:
        pass
    return targets


def _require_f0(nl: NonlinearitySpec) -> None:
    if not (math.isfinite(nl.f0) and nl.f0 > 0.0):
        raise HypothesisReport("f0 positivity", f"f0={nl.f0}")


def branch_from_zero(
    spec: ProblemSpec,
    nl: NonlinearitySpec,
    k: int,
    sign: str,
    eps_seed: float = 1e-3,
    stop_at_lambda: float | None = None,
    amplitude_cap: float = AMPLITUDE_CAP,
    lambda_cap: float | None = None,
    point_budget: int = POINT_BUDGET,
    eigenpair: Eigenpair | None = None,
) -> Branch:
    """Trace the continuum bifurcating from the trivial line at lam_k/f0.

    The first recorded point is the bifurcation point itself; the second is
    the eps-scaled eigenfunction seed corrected at fixed lam (the analytic
    seed already meets the residual tolerance when eps is small enough;
    collapse onto the trivial solution triggers eps escalation).
    """
    _require_f0(nl)
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    ep = eigenpair if eigenpair is not None else eigen_continuation(spec, k)
    lam_star = ep.lam / nl.f0
    if lambda_cap is None:
        finf = nl.finf if math.isfinite(nl.finf) else 0.0
        lambda_cap = 10.0 * max(nl.f0, finf, ep.lam, 1.0)
    problem = _BranchProblem(spec, nl)
    branch = Branch(k=k, sign=sign, origin=FROM_ZERO, origin_lambda=lam_star)
    branch.points.append(
        BranchPoint(
            lam=lam_star,
            shooting=ShootingState(0.0, 0.0, lam_star, (0.0, 0.0)),
            amplitude=0.0,
            nodal=(),
            arclength=0.0,
            energy_dev=None,
        )
    )

    s = 1.0 if sign == "+" else -1.0
    psi_m, psi_pm = ep.psi.A, ep.psi.B  # (psi(-1), psi'(-1)), |psi|_0 = 1
    seed_sol: SampledSolution | None = None
    for eps in (eps_seed, eps_seed / 10.0, eps_seed / 100.0):
        guess = (eps * s * psi_m, eps * s * psi_pm)
        try:
            cand = solve_bvp(spec, nl, None, lam_star, guess)
        except (NoConvergence, SingularSystem, DivergenceError):
            continue
        if cand.amplitude > 0.25 * eps:  # did not collapse onto u = 0
            seed_sol = cand
            break
    if seed_sol is None:
        raise SeedFailure(
            f"seeding failed at eps = {eps_seed:g}, {eps_seed / 10:g}, {eps_seed / 100:g}"
        )

    st = seed_sol.shooting
    z0 = np.array([lam_star, 0.0, 0.0])
    z1 = np.array([lam_star, st.a, st.b])
    sm = side_scale(spec.minus, seed_sol.trace)
    sp = side_scale(spec.plus, seed_sol.trace)
    branch.points.append(
        _make_point(problem, z1, st.residuals[0], st.residuals[1],
                    seed_sol.trace, sm, sp, arclength=float(np.linalg.norm(z1 - z0)))
    )
    targets = _trivial_targets(spec, nl, k, lambda_cap)
    _continue_branch(
        problem, branch, z0, z1, stop_at_lambda, amplitude_cap, lambda_cap,
        point_budget, targets,
    )
    return branch


def _pinned_correct(problem: _BranchProblem, lam0: float, a: float, b: float,
                    pin: int, tol=RESIDUAL_TOL, max_iter=20):
    """Newton on (lam, free shooting coordinate) with the other pinned.

    Used to land on the branch near infinity, where fixing lam would be
    ill-posed (the branch is one-sided in lam near its asymptote).
    """
    z = np.array([lam0, a, b])
    free = 2 if pin == 1 else 1
    rm, rp, trace, sm, sp = problem.residuals(z)
    err = problem.bvp_error(rm, rp, sm, sp)
    for _ in range(max_iter):
        if err <= tol:
            return z, rm, rp, trace, sm, sp
        J = np.empty((2, 2))
        for j, col in enumerate((0, free)):
            dz = 1e-6 * (1.0 + abs(z[col]))
            zp = z.copy()
            zp[col] += dz
            rm2, rp2, _, _, _ = problem.residuals(zp)
            J[:, j] = [(rm2 - rm) / dz, (rp2 - rp) / dz]
        try:
            step = np.linalg.solve(J, [-rm, -rp])
        except np.linalg.LinAlgError:
            raise SingularSystem(math.inf)
        damp = 1.0
        for _h in range(12):
            cand = z.copy()
            cand[0] += damp * step[0]
            cand[free] += damp * step[1]
            try:
                rm2, rp2, trace2, sm2, sp2 = problem.residuals(cand)
            except DivergenceError:
                damp *= 0.5
                continue
            err2 = problem.bvp_error(rm2, rp2, sm2, sp2)
            if err2 < err or err2 <= tol:
                z, rm, rp, trace, sm, sp, err = cand, rm2, rp2, trace2, sm2, sp2, err2
                break
            damp *= 0.5
        else:
            raise NoConvergence(err, "pinned corrector stalled")
    raise NoConvergence(err, "pinned corrector budget exhausted")


def branch_from_infinity(
    spec: ProblemSpec,
    nl: NonlinearitySpec,
    k: int,
    sign: str,
    amplitude_start: float = 1e2,
    stop_at_lambda: float | None = None,
    lambda_cap: float | None = None,
    point_budget: int = POINT_BUDGET,
    eigenpair: Eigenpair | None = None,
) -> Branch:
    """Trace the continuum bifurcating from infinity at lam_k/finf.

    Seeds at large amplitude A (escalating from amplitude_start) with the
    eigenfunction direction, corrected with the dominant shooting coordinate
    pinned, then continues toward decreasing amplitude.  finf must be a
    positive finite limit; the superlinear case is handled by the from-zero
    tracer instead.
    """
    if not (math.isfinite(nl.finf) and nl.finf > 0.0):
        raise HypothesisReport("finf in (0, inf)", f"finf={nl.finf}")
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    ep = eigenpair if eigenpair is not None else eigen_continuation(spec, k)
    lam_star = ep.lam / nl.finf
    if lambda_cap is None:
        lambda_cap = 10.0 * max(nl.f0, nl.finf, ep.lam, 1.0)
    problem = _BranchProblem(spec, nl)
    branch = Branch(k=k, sign=sign, origin=FROM_INFINITY, origin_lambda=lam_star)

    s = 1.0 if sign == "+" else -1.0
    pin = 1 if abs(ep.psi.A) >= abs(ep.psi.B) else 2
    z1 = z0 = None
    for A in (amplitude_start, 10.0 * amplitude_start, 100.0 * amplitude_start):
        a, b = A * s * ep.psi.A, A * s * ep.psi.B
        try:
            big = _pinned_correct(problem, lam_star, a, b, pin)
            shrunk = _pinned_correct(problem, lam_star, a / 1.05, b / 1.05, pin)
        except (NoConvergence, SingularSystem, DivergenceError):
            continue
        z0, z1 = big, shrunk
        break
    if z1 is None:
        raise SeedFailure(f"from-infinity seeding failed starting at A={amplitude_start:g}")

    zb, rmb, rpb, traceb, smb, spb = z0
    zs, rms, rps, traces, sms, sps = z1
    branch.points.append(_make_point(problem, zb, rmb, rpb, traceb, smb, spb, 0.0))
    branch.points.append(
        _make_point(problem, zs, rms, rps, traces, sms, sps,
                    float(np.linalg.norm(zs - zb)))
    )
    targets = _trivial_targets(spec, nl, k, lambda_cap)
    _continue_branch(
        problem, branch, zb, zs, stop_at_lambda, AMPLITUDE_CAP, lambda_cap,
        point_budget, targets,
    )
    return branch


# ---------------------------------------------------------------------------
# nodal audit


@dataclass
class AuditReport:
    ok: bool
    family: str
    baseline: NodalClass | None
    audited_points: int
    first_violation: int | None
    detail: str = ""


def branch_nodal_audit(
    branch: Branch, lambda_gate: float, family: str | None = None,
    certified_side: str | None = None,
) -> AuditReport:
    """Check nodal-class constancy on the certified side of the gate.

    The baseline is the first nontrivial point's membership in the audited
    family; every gated point must repeat it.  Violations are legitimate
    when no preservation certificate applies; they are reported, not raised.
    """
    pts = [p for p in branch.points if p.amplitude > 0.0]
    if not pts:
        return AuditReport(True, family or "", None, 0, None, "empty branch")
    if certified_side is None:
        certified_side = "below" if branch.origin_lambda < lambda_gate else "above"

    baseline = None
    fam = family
    for p in pts:
        for m in p.nodal:
            if fam is None or m.family == fam:
                baseline = m
                fam = m.family
                break
        if baseline:
            break
    if baseline is None:
        return AuditReport(False, fam or "", None, len(pts), 0, "no classifiable baseline")

    audited = 0
    for i, p in enumerate(pts):
        gated = p.lam < lambda_gate if certified_side == "below" else p.lam > lambda_gate
        if not gated:
            continue
        audited += 1
        if not any(m == baseline for m in p.nodal):
            return AuditReport(False, fam, baseline, audited, i,
                               f"point {i} at lam={p.lam:.6g} lost {baseline.label()}")
    return AuditReport(True, fam, baseline, audited, None)


# ---------------------------------------------------------------------------
# nodal solutions at lam = 1


@dataclass
class NodalSolutionsResult:
    k: int
    family: str
    class_index: int
    orientation: str  # 'slopes-fall' (finf < lam_k < f0) or 'slopes-rise'
    route: str  # FROM_ZERO or FROM_INFINITY
    gamma: float
    certificates: dict
    branches: dict  # sign -> Branch
    solutions: dict  # sign -> SampledSolution
    verdicts: dict  # sign -> tuple[NodalClass, ...]


def _endpoint_inequalities_at(spec: ProblemSpec, lam: float, gamma: float, which: str) -> bool:
    """Pointwise endpoint inequalities of the nonlinear preservation lemma,
    evaluated at parameter lam with envelope constant gamma."""
    root = math.sqrt(lam * gamma)
    for side in spec.sides:
        th = side_thresholds(side)
        if which == "ud":
            if not th.alpha0 > th.sum_alpha + root * th.sum_beta:
                return False
        else:
            if not th.beta0_abs > th.sum_alpha / root + th.sum_beta:
                return False
    return True


def nodal_solutions_at_one(
    spec: ProblemSpec,
    nl: NonlinearitySpec,
    k: int,
    eps_seed: float = 1e-3,
    uniqueness_margin: float = 2.0,
) -> NodalSolutionsResult:
    """Produce the pair u_k^+/- of nodal solutions of -u'' = f(u) at lam = 1.

    Verifies the eigenvalue-crossing condition, the eigenfunction membership
    and windowed uniqueness in the target family, the F-envelope and the
    endpoint inequalities at lam = 1; then traces both sign branches to the
    crossing, refines it by secant and polishes with a fixed-lam solve.
    """
    _require_f0(nl)
    ep = eigen_continuation(spec, k)
    lam_k = ep.lam
    f0, finf = nl.f0, nl.finf

    if finf < lam_k < f0:
        orientation = "slopes-fall"
    elif f0 < lam_k and (lam_k < finf or not math.isfinite(finf)):
        orientation = "slopes-rise"
    else:
        raise HypothesisReport(
            "eigenvalue crossing",
            f"lam_k={lam_k:.6g} not strictly between f0={f0:.6g} and finf={finf:.6g}",
        )

    psi_classes = classify_eigenpair(ep)
    in_T = psi_classes.has("T", k + 1)
    in_S = psi_classes.has("S", k)

    route_errors: list[str] = []
    for family in ("T", "S"):
        try:
            return _run_route(
                spec, nl, k, ep, family, orientation, in_T, in_S, eps_seed,
                uniqueness_margin,
            )
        except HypothesisReport as exc:
            route_errors.append(f"{family}-route: {exc.failed}")
    raise HypothesisReport("; ".join(route_errors))


def classify_eigenpair(ep: Eigenpair):
    return classify(ClosedTrace(ep.psi))


def _run_route(spec, nl, k, ep, family, orientation, in_T, in_S, eps_seed,
               uniqueness_margin) -> NodalSolutionsResult:
    lam_k, f0, finf = ep.lam, nl.f0, nl.finf
    if family == "T":
        if not in_T:
            raise HypothesisReport("eigenfunction membership in the derivative family")
        gamma = f0 if orientation == "slopes-fall" else finf
        if not math.isfinite(gamma):
            raise HypothesisReport("finite envelope constant", "finf = inf")
        cert = certify_hypotheses(nl, gamma, F_SMALL)
        if not cert.passed:
            raise HypothesisReport("F-envelope (upper)", cert.reason)
        if not _endpoint_inequalities_at(spec, 1.0, gamma, "ud"):
            raise HypothesisReport("endpoint derivative-pinning inequality at lambda=1")
        target = NodalClass("T", k + 1, "+")
        route = FROM_ZERO
        class_index = k + 1
    else:
        if not in_S:
            raise HypothesisReport("eigenfunction membership in the value family")
        gamma = finf if orientation == "slopes-fall" else f0
        if not (math.isfinite(gamma) and gamma > 0.0):
            raise HypothesisReport("positive finite envelope constant", f"gamma={gamma}")
        cert = certify_hypotheses(nl, gamma, F_BIG)
        if not cert.passed:
            raise HypothesisReport("F-envelope (lower)", cert.reason)
        if not _endpoint_inequalities_at(spec, 1.0, gamma, "u"):
            raise HypothesisReport("endpoint value-pinning inequality at lambda=1")
        target = NodalClass("S", k, "+")
        route = FROM_ZERO if orientation == "slopes-rise" else FROM_INFINITY
        class_index = k

    # Windowed uniqueness: no other eigenfunction in the target family with
    # lam_j inside the crossing window.  The theorems quantify over all such
    # j; this checks the computed spectrum up to the larger slope + margin.
    window = max(f0, finf) if math.isfinite(finf) else f0
    _check_uniqueness(spec, k, family, class_index, window + uniqueness_margin)

    certs = {"envelope": cert}
    branches: dict[str, Branch] = {}
    solutions: dict[str, SampledSolution] = {}
    verdicts: dict[str, tuple] = {}
    for sign in ("+", "-"):
        if route == FROM_ZERO:
            br = branch_from_zero(spec, nl, k, sign, eps_seed=eps_seed,
                                  stop_at_lambda=1.0, eigenpair=ep)
        else:
            br = branch_from_infinity(spec, nl, k, sign, stop_at_lambda=1.0,
                                      eigenpair=ep)
        if br.termination != TERM_CROSSED:
            raise NoCrossing(br, f"termination={br.termination}")
        sol = _polish_crossing(spec, nl, br)
        branches[sign] = br
        solutions[sign] = sol
        verdicts[sign] = tuple(classify(sol.trace).memberships)
        want = NodalClass(family, class_index, sign)
        if not any(m == want for m in verdicts[sign]):
            raise HypothesisReport(
                "crossing solution nodal class",
                f"expected {want.label()}, got {[m.label() for m in verdicts[sign]]}",
            )
    return NodalSolutionsResult(
        k=k,
        family=family,
        class_index=class_index,
        orientation=orientation,
        route=route,
        gamma=gamma,
        certificates=certs,
        branches=branches,
        solutions=solutions,
        verdicts=verdicts,
    )


def _check_uniqueness(spec, k, family, class_index, lam_window) -> None:
    try:
        pairs = continuation_spectrum(spec, max(k + 3, 6))
    except NumericError:
        raise HypothesisReport("eigenfunction uniqueness", "could not compute the window")
    for epj in pairs:
        if epj.k == k or epj.lam > lam_window:
            continue
        try:
            res = classify(ClosedTrace(epj.psi))
        except NumericError:
            continue
        if res.has(family, class_index):
            raise HypothesisReport(
                "eigenfunction uniqueness",
                f"psi_{epj.k} also lies in the target family",
            )


def _polish_crossing(spec, nl, branch: Branch) -> SampledSolution:
    """Secant in (lam - 1) between the last two points, then a fixed-lam solve."""
    p1, p2 = branch.points[-2], branch.points[-1]
    g1, g2 = p1.lam - 1.0, p2.lam - 1.0
    if g1 == g2:
        t = 0.0
    else:
        t = g1 / (g1 - g2)
    t = min(max(t, 0.0), 1.0)
    a = p1.shooting.a + t * (p2.shooting.a - p1.shooting.a)
    b = p1.shooting.b + t * (p2.shooting.b - p1.shooting.b)
    sol = solve_bvp(spec, nl, None, 1.0, (a, b))
    if sol.amplitude <= 1e-8:
        raise NoCrossing(branch, "crossing polish collapsed to the trivial solution")
    return sol

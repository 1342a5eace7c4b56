"""Characteristic determinant of the multi-point problem and eigenvalue location.

An eigenvalue of the full problem is a lam for which both boundary
functionals vanish on some nontrivial u = A*c + B*s.  Writing each
functional's action on the fundamental pair as a row gives the 2x2
characteristic determinant

    Gamma(lam) = det [ bc-(c)  bc-(s) ]
                     [ bc+(c)  bc+(s) ]

which is real-analytic in lam and vanishes exactly at the eigenvalues.
Two locators are provided: a brute-force sign-change scan (the oracle) and
a homotopy continuation that scales the interior coefficients by t in
[0, 1], tracking each root from its single-point Robin anchor at t = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import nodal
from .errors import ContinuationBreakdown, HypothesisError, NumericError
from .problem import LEVEL_QUADRATIC, ProblemSpec, level_at_least, scale_coefficients
from .reference import separated_eigenvalue
from .trig import TrigSolution, _fundamental, bc_functional, sup_norms

SCAN_STEP_OMEGA = min(0.25, (math.pi / 2.0) / 8.0)
LAMBDA_MIN_GUARD = 25.0
SIMPLE_DET_TOL = 1e-8  # |dGamma/dlam| below this * scale flags "possibly non-simple"
ROOT_SEPARATION = 1e-8


@dataclass(frozen=True)
class Eigenpair:
    """One eigenvalue with its normalized eigenfunction.

    ``k`` is the oscillation index: continuation ancestry when ``t_path``
    is present, position in the scanned window otherwise.
    """

    k: int
    lam: float
    psi: TrigSolution
    t_path: tuple[tuple[float, float], ...] | None = None
    sign_convention: str = "nodal-plus"
    simple: bool = True
    det_slope: float = 0.0
    bc_residuals: tuple[float, float] = (0.0, 0.0)

    @property
    def negative(self) -> bool:
        return self.lam < 0.0


@dataclass
class SpectrumWindow:
    lambda_max: float
    eigenpairs: list[Eigenpair] = field(default_factory=list)
    robin_count: int | None = None

    def lambdas(self) -> list[float]:
        return [ep.lam for ep in self.eigenpairs]


def _bc_rows(spec: ProblemSpec, lam: float):
    """Rows (bc(c), bc(s)) for both sides, evaluating the pair once per point."""
    rows = []
    for side in spec.sides:
        c, cp, s, sp = _fundamental(lam, side.endpoint + 1.0)
        rc = side.alpha0 * c + side.beta0 * cp
        rs = side.alpha0 * s + side.beta0 * sp
        for ai, bi, ei in zip(side.alpha, side.beta, side.eta):
            ce, cpe, se, spe = _fundamental(lam, ei + 1.0)
            rc -= ai * ce + bi * cpe
            rs -= ai * se + bi * spe
        rows.append((rc, rs))
    return rows


def char_det(spec: ProblemSpec, lam: float) -> float:
    """The characteristic determinant Gamma(lam)."""
    (m11, m12), (m21, m22) = _bc_rows(spec, lam)
    return m11 * m22 - m12 * m21


def char_det_scale(spec: ProblemSpec, lam: float) -> float:
    """Natural magnitude of Gamma near lam (product of row norms)."""
    (m11, m12), (m21, m22) = _bc_rows(spec, lam)
    return math.hypot(m11, m12) * math.hypot(m21, m22) + 1e-300


def det_slope(spec: ProblemSpec, lam: float) -> float:
    """Centered-difference dGamma/dlam."""
    h = 1e-6 * max(1.0, abs(lam))
    return (char_det(spec, lam + h) - char_det(spec, lam - h)) / (2.0 * h)


def assemble_eigenfunction(spec: ProblemSpec, lam: float) -> tuple[TrigSolution, tuple[float, float]]:
    """Null direction of the boundary matrix at lam, normalized and signed.

    Sign rule: '+' nodal class when the classifier gives one; otherwise the
    first nonvanishing of (u(-1), u'(-1)) is positive.
    """
    rows = _bc_rows(spec, lam)
    # Take the null vector of the larger row for stability.
    (m11, m12), (m21, m22) = rows
    if math.hypot(m11, m12) >= math.hypot(m21, m22):
        A, B = -m12, m11
    else:
        A, B = -m22, m21
    nrm = math.hypot(A, B)
    if nrm == 0.0:
        raise NumericError(f"boundary matrix vanished identically at lam={lam:.6g}")
    sol = TrigSolution(lam, A / nrm, B / nrm)
    su, _ = sup_norms(sol)
    if su == 0.0:
        raise NumericError(f"degenerate eigenfunction at lam={lam:.6g}")
    sol = TrigSolution(lam, sol.A / su, sol.B / su)

    flip, convention = _sign_rule(sol)
    if flip:
        sol = TrigSolution(lam, -sol.A, -sol.B)
    residuals = (bc_functional(spec.minus, sol), bc_functional(spec.plus, sol))
    return sol, residuals


def _sign_rule(sol: TrigSolution) -> tuple[bool, str]:
    try:
        result = nodal.classify(nodal.ClosedTrace(sol))
        signs = {m.sign for m in result.memberships}
    except NumericError:
        signs = set()
    if signs == {"-"}:
        return True, "nodal-plus"
    if signs == {"+"}:
        return False, "nodal-plus"
    lead = sol.A if sol.A != 0.0 else sol.B
    return lead < 0.0, "boundary-data"


def robin_anchor(spec: ProblemSpec, k: int) -> float:
    """Anchor lam_k of the t=0 (single-point Robin) problem."""
    return separated_eigenvalue(
        (spec.minus.alpha0, spec.minus.beta0), (spec.plus.alpha0, spec.plus.beta0), k
    )


def _refine_root(spec: ProblemSpec, lo: float, hi: float, flo: float, fhi: float) -> float:
    """Bisection to 1e-12 relative followed by a Newton polish."""
    a, b, fa = lo, hi, flo
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = char_det(spec, mid)
        if fm == 0.0:
            return mid
        if fa * fm < 0.0:
            b = mid
        else:
            a, fa = mid, fm
        if b - a <= 1e-12 * max(1.0, abs(mid)):
            break
    lam = 0.5 * (a + b)
    width = hi - lo
    for _ in range(3):
        g = char_det(spec, lam)
        gp = det_slope(spec, lam)
        if gp == 0.0:
            break
        step = g / gp
        if not math.isfinite(step) or abs(step) > width:
            break
        lam -= step
    if not lo - width <= lam <= hi + width:
        lam = 0.5 * (a + b)
    return lam


def eigen_scan(
    spec: ProblemSpec,
    lambda_max: float,
    lambda_min_guard: float = LAMBDA_MIN_GUARD,
    assign_k: bool = True,
) -> SpectrumWindow:
    """All roots of Gamma in (-lambda_min_guard, lambda_max] by sign-change scan.

    The grid is uniform in sqrt(|lam|) so the (asymptotically pi/2-spaced)
    roots are sampled several times per gap; each bracket is refined by
    bisection and polished by Newton.  Roots where |dGamma/dlam| is tiny are
    flagged non-simple (a hypothesis-violation signal).  A touching root
    without a sign change cannot be seen by this scan.
    """
    if lambda_max <= 0.0:
        raise ValueError("lambda_max must be positive")
    grid = []
    mu = math.sqrt(max(lambda_min_guard, 0.0))
    while mu > 0.0:
        grid.append(-mu * mu)
        mu -= SCAN_STEP_OMEGA
    grid.append(0.0)
    w = SCAN_STEP_OMEGA
    wmax = math.sqrt(lambda_max)
    while w < wmax:
        grid.append(w * w)
        w += SCAN_STEP_OMEGA
    grid.append(lambda_max)

    vals = [char_det(spec, lam) for lam in grid]
    roots: list[float] = []
    for i in range(len(grid) - 1):
        lam_i, lam_j = grid[i], grid[i + 1]
        fi, fj = vals[i], vals[i + 1]
        if fi == 0.0:
            roots.append(lam_i)
            continue
        if fj == 0.0:
            continue  # captured as the left endpoint of the next cell
        if fi * fj < 0.0:
            roots.append(_refine_root(spec, lam_i, lam_j, fi, fj))
    if vals[-1] == 0.0:
        roots.append(grid[-1])

    # Merge anything tighter than the separation tolerance.
    roots.sort()
    merged: list[float] = []
    for r in roots:
        if merged and abs(r - merged[-1]) < ROOT_SEPARATION * max(1.0, abs(r)):
            continue
        merged.append(r)

    pairs = []
    for idx, lam in enumerate(merged):
        scale = char_det_scale(spec, lam)
        slope = det_slope(spec, lam)
        psi, res = assemble_eigenfunction(spec, lam)
        pairs.append(
            Eigenpair(
                k=idx if assign_k else -1,
                lam=lam,
                psi=psi,
                t_path=None,
                simple=abs(slope) >= SIMPLE_DET_TOL * scale,
                det_slope=slope,
                bc_residuals=res,
            )
        )

    # Anchors exist only under the endpoint sign convention; specs violating
    # it simply get no Robin count.
    try:
        robin_count = 0
        while robin_anchor(spec, robin_count) <= lambda_max:
            robin_count += 1
    except Exception:
        robin_count = None
    return SpectrumWindow(lambda_max=lambda_max, eigenpairs=pairs, robin_count=robin_count)


def _newton_root(spec_t: ProblemSpec, lam0: float, max_iter: int = 15) -> float:
    """Newton iteration on Gamma(., spec_t) from lam0; raises on failure."""
    lam = lam0
    last_step = math.inf
    for _ in range(max_iter):
        g = char_det(spec_t, lam)
        gp = det_slope(spec_t, lam)
        if gp == 0.0 or not math.isfinite(gp):
            raise NumericError("flat determinant in corrector")
        step = g / gp
        lam -= step
        if abs(step) <= 1e-13 * max(1.0, abs(lam)):
            return lam
        if abs(step) > 10.0 * max(1.0, abs(lam0)) and abs(step) > last_step * 4.0:
            raise NumericError("corrector diverging")
        last_step = abs(step)
    if abs(char_det(spec_t, lam)) <= 1e-9 * char_det_scale(spec_t, lam):
        return lam
    raise NumericError("corrector did not converge")


def eigen_continuation(
    spec: ProblemSpec,
    k: int,
    dt_init: float = 0.05,
    dt_min: float = 1e-6,
    neighbor_margin: float = 0.1,
) -> Eigenpair:
    """Track lam_k from its Robin anchor at t=0 to the full problem at t=1.

    Secant predictor in t, Newton corrector in lam.  The neighbours k-1 and
    k+1 are tracked alongside to watch for path collisions, which abort with
    a diagnostic rather than re-indexing.
    """
    pairs = continuation_spectrum(spec, k, k_lo=max(0, k - 1), extra_upper=1,
                                  dt_init=dt_init, dt_min=dt_min,
                                  neighbor_margin=neighbor_margin)
    for ep in pairs:
        if ep.k == k:
            return ep
    raise NumericError(f"continuation lost index k={k}")  # pragma: no cover


def continuation_spectrum(
    spec: ProblemSpec,
    k_max: int,
    k_lo: int = 0,
    extra_upper: int = 1,
    dt_init: float = 0.05,
    dt_min: float = 1e-6,
    neighbor_margin: float = 0.1,
) -> list[Eigenpair]:
    """Continue all indices k_lo..k_max together (plus guard paths above)."""
    if k_max < k_lo or k_lo < 0:
        raise ValueError("bad index range")
    if not level_at_least(spec.hypothesis_level, LEVEL_QUADRATIC):
        raise HypothesisError(
            "eigenvalue continuation requires the squared-fraction hypothesis level"
        )
    indices = list(range(k_lo, k_max + 1 + extra_upper))
    lams = [robin_anchor(spec, j) for j in indices]
    paths: dict[int, list[tuple[float, float]]] = {j: [(0.0, lam)] for j, lam in zip(indices, lams)}

    t, dt = 0.0, dt_init
    prev_t, prev_lams = 0.0, list(lams)
    while t < 1.0:
        t_next = min(1.0, t + dt)
        # Secant prediction through the last two accepted states.
        if t > prev_t:
            preds = [
                lam + (lam - plam) * (t_next - t) / (t - prev_t)
                for lam, plam in zip(lams, prev_lams)
            ]
        else:
            preds = list(lams)
        try:
            spec_t = scale_coefficients(spec, t_next)
            news = [_newton_root(spec_t, p) for p in preds]
        except NumericError:
            news = None
        ok = news is not None
        if ok:
            for a, b in zip(news, news[1:]):
                if not (b > a):
                    ok = False
                    break
                if b - a < ROOT_SEPARATION * max(1.0, abs(b)):
                    raise ContinuationBreakdown(t_next, f"paths merged near lam={b:.6g}")
        if ok:
            tight = any(b - a < neighbor_margin for a, b in zip(news, news[1:]))
            if tight and dt > dt_min * 2.0:
                dt = max(dt_min, 0.5 * dt)
                # accept anyway at the reduced future step
        if not ok:
            if dt <= dt_min:
                raise ContinuationBreakdown(t_next, "corrector failed at minimal step")
            dt = max(dt_min, 0.5 * dt)
            continue
        prev_t, prev_lams = t, list(lams)
        t, lams = t_next, news
        for j, lam in zip(indices, lams):
            paths[j].append((t, lam))
        if dt < dt_init:
            dt = min(dt_init, dt * 1.6)

    out = []
    for j, lam in zip(indices, lams):
        if j > k_max:
            continue
        psi, res = assemble_eigenfunction(spec, lam)
        scale = char_det_scale(spec, lam)
        slope = det_slope(spec, lam)
        out.append(
            Eigenpair(
                k=j,
                lam=lam,
                psi=psi,
                t_path=tuple(paths[j]),
                simple=abs(slope) >= SIMPLE_DET_TOL * scale,
                det_slope=slope,
                bc_residuals=res,
            )
        )
    return out

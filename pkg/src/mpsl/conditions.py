"""Endpoint inequality machinery and nodal-class prediction.

Two pointwise conditions on a side with endpoint pair (alpha0, beta0) and
interior sums S_a = sum|alpha_i|, S_b = sum|beta_i| drive everything:

    derivative-pinning:  alpha0  > S_a + sqrt(lam) * S_b   =>  u'(nu) != 0
    value-pinning:       |beta0| > S_a / sqrt(lam) + S_b   =>  u(nu)  != 0

for any solution (lam, u), lam > 0, satisfying that side's condition.
(The value-pinning condition is stated with |beta0|: the minus-side sign
convention makes beta0 <= 0 there, and the underlying estimate only uses
its magnitude.)

At the summed-fraction hypothesis level the two ranges meet at
J = (alpha0/beta0)^2: lam <= J gives derivative-pinning, lam >= J gives
value-pinning, so crossover indices against the reference spectra split
the index axis into a T range, an S range, an intermediate R range, and a
handful of boundary indices needing strengthened pointwise checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import HypothesisError
from .problem import (
    LEVEL_LINEAR,
    LEVEL_QUADRATIC,
    BoundarySide,
    ProblemSpec,
    level_at_least,
)
from .reference import separated_eigenvalue

BOUNDARY_EQUALITY_WARN = 1e-9
_SEARCH_CAP = 100000


@dataclass(frozen=True)
class SideThresholds:
    """Solved lam-ranges of the two pointwise conditions for one side.

    ``lambda_ud_max``: the condition alpha0 > S_a + sqrt(lam)*S_b holds for
    lam below this value (math.inf when it holds for every lam, None when it
    never holds).  ``lambda_u_min`` likewise bounds the value-pinning range
    from below (None when empty).  ``J = (alpha0/beta0)^2`` with J = inf for
    a Dirichlet-type side.
    """

    side: str
    lambda_ud_max: float | None
    lambda_u_min: float | None
    J: float
    sum_alpha: float
    sum_beta: float
    alpha0: float
    beta0_abs: float

    def holds_ud(self, lam: float) -> bool:
        """Exact pointwise derivative-pinning test at lam >= 0."""
        if lam < 0.0:
            raise ValueError("conditions are defined for lam >= 0")
        return self.alpha0 > self.sum_alpha + math.sqrt(lam) * self.sum_beta

    def holds_u(self, lam: float) -> bool:
        """Exact pointwise value-pinning test at lam >= 0."""
        if lam < 0.0:
            raise ValueError("conditions are defined for lam >= 0")
        if lam == 0.0:
            return self.sum_alpha == 0.0 and self.beta0_abs > self.sum_beta
        return self.beta0_abs > self.sum_alpha / math.sqrt(lam) + self.sum_beta


def side_thresholds(side: BoundarySide) -> SideThresholds:
    a0 = side.alpha0
    b0 = abs(side.beta0)
    sa = side.sum_alpha
    sb = side.sum_beta
    if a0 > sa:
        ud_max = math.inf if sb == 0.0 else ((a0 - sa) / sb) ** 2
    else:
        ud_max = None
    u_min = (sa / (b0 - sb)) ** 2 if b0 > sb else None
    J = math.inf if side.beta0 == 0.0 else (a0 / side.beta0) ** 2
    return SideThresholds(
        side=side.side,
        lambda_ud_max=ud_max,
        lambda_u_min=u_min,
        J=J,
        sum_alpha=sa,
        sum_beta=sb,
        alpha0=a0,
        beta0_abs=b0,
    )


@dataclass(frozen=True)
class CrossoverIndices:
    """Crossover indices of the prediction machinery.

    ``k_c`` applies to the single multi-point case (None for two multi-point
    sides); the N/D/M-based indices apply to the two multi-point case.
    Infinite searches are reported as None (e.g. k_S when J_max = inf).
    """

    J_minus: float
    J_plus: float
    J_min: float
    J_max: float
    k_c: int | None
    k_T: int | None
    k_S: int | None
    k_TM: int | None
    k_SM: int | None
    warnings: tuple[str, ...] = ()


def _max_index_leq(value_fn, bound: float, start: int = 0) -> int | None:
    """max{k >= start-1 : value_fn(k) <= bound}, None when unbounded."""
    if math.isinf(bound):
        return None
    k = start
    last = start - 1
    while k < _SEARCH_CAP:
        if value_fn(k) <= bound:
            last = k
            k += 1
        else:
            return last
    raise HypothesisError("crossover search exceeded the index cap")


def _min_index_geq(value_fn, bound: float) -> int | None:
    """min{k >= 0 : value_fn(k) >= bound}, None when no such k exists."""
    if math.isinf(bound):
        return None
    k = 0
    while k < _SEARCH_CAP:
        if value_fn(k) >= bound:
            return k
        k += 1
    raise HypothesisError("crossover search exceeded the index cap")


def _single_point_side(spec: ProblemSpec) -> BoundarySide | None:
    """The single-point side when exactly one side is multi-point, else None."""
    mp = spec.multipoint_sides()
    if len(mp) != 1:
        return None
    return spec.plus if mp[0] is spec.minus else spec.minus


def _ref_with_robin(single_side: BoundarySide, mp_tag: str):
    """Reference eigenvalue family with the Robin data on the single-point side
    and a Dirichlet/Neumann replacement on the multi-point side."""
    robin_pair = (single_side.alpha0, single_side.beta0)
    repl = (1.0, 0.0) if mp_tag == "dirichlet" else (0.0, 1.0)
    if single_side.side == "minus":
        return lambda k: 0.0 if k < 0 else separated_eigenvalue(robin_pair, repl, k)
    return lambda k: 0.0 if k < 0 else separated_eigenvalue(repl, robin_pair, k)


def _lam_ref(tag: str):
    table = {
        "N": lambda k: (k * math.pi / 2.0) ** 2,
        "D": lambda k: 0.0 if k < 0 else ((k + 1) * math.pi / 2.0) ** 2,
        "M": lambda k: 0.0 if k < 0 else ((2 * k + 1) * math.pi / 4.0) ** 2,
    }
    return table[tag]


def crossover_indices(spec: ProblemSpec) -> CrossoverIndices:
    """Crossover indices; requires the summed-fraction hypothesis level."""
    if not level_at_least(spec.hypothesis_level, LEVEL_LINEAR):
        raise HypothesisError(
            "theorem hypotheses not met: crossover indices need the "
            "summed-fraction condition on both sides"
        )
    th_m = side_thresholds(spec.minus)
    th_p = side_thresholds(spec.plus)
    J_min = min(th_m.J, th_p.J)
    J_max = max(th_m.J, th_p.J)
    warnings: list[str] = []

    lam_n, lam_d, lam_m = _lam_ref("N"), _lam_ref("D"), _lam_ref("M")
    k_T = _max_index_leq(lam_n, J_min)
    k_S = _min_index_geq(lam_d, J_max)
    # k_TM may come out -1 via the sentinel lam_{-1}^M = 0 <= J_min.
    k_TM = _max_index_leq(lam_m, J_min, start=0)
    k_SM = _min_index_geq(lam_m, J_max)

    for name, fn, idx, bound in (
        ("k_T", lam_n, k_T, J_min),
        ("k_S", lam_d, k_S, J_max),
        ("k_TM", lam_m, k_TM, J_min),
        ("k_SM", lam_m, k_SM, J_max),
    ):
        if idx is not None and idx >= 0 and abs(fn(idx) - bound) < BOUNDARY_EQUALITY_WARN:
            warnings.append(f"{name}: reference eigenvalue within 1e-9 of J boundary")

    k_c: int | None = None
    single = _single_point_side(spec)
    if single is not None:
        mp_side = spec.minus if single is spec.plus else spec.plus
        J_mp = side_thresholds(mp_side).J
        if J_mp == 0.0:
            k_c = -1
        elif math.isinf(J_mp):
            k_c = None
        else:
            lam_rd = _ref_with_robin(single, "dirichlet")
            # unique k >= -1 with lam_{k}^{RD} < J <= lam_{k+1}^{RD}
            k = -1
            while lam_rd(k + 1) < J_mp:
                k += 1
                if k > _SEARCH_CAP:
                    raise HypothesisError("k_c search exceeded the index cap")
            k_c = k
            if abs(lam_rd(k_c + 1) - J_mp) < BOUNDARY_EQUALITY_WARN or (
                k_c >= 0 and abs(lam_rd(k_c) - J_mp) < BOUNDARY_EQUALITY_WARN
            ):
                warnings.append("k_c: J within 1e-9 of a reference eigenvalue")

    return CrossoverIndices(
        J_minus=th_m.J,
        J_plus=th_p.J,
        J_min=J_min,
        J_max=J_max,
        k_c=k_c,
        k_T=k_T,
        k_S=k_S,
        k_TM=k_TM,
        k_SM=k_SM,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class Prediction:
    """Dispatched nodal-class prediction for one eigenvalue index.

    ``family`` is 'T', 'S' or 'R' (None when indeterminate); the predicted
    class is family_{class_index} with either sign, and lam_k must lie in
    (bracket_lo, bracket_hi) — inclusive at 0 on the left, covering the
    Neumann-type ground state.  ``mirrored`` marks R predictions that apply
    to the reflected trace (the orientation with J^- < J^+).

    ``redefined`` marks verdicts that hold in the BC-restricted sense: a
    Dirichlet-type single-point side forces u = 0 at its endpoint (so the
    plain S data cannot hold there), a Neumann-type one forces u' = 0 (ditto
    for T).  ``redefined_end`` is that endpoint; confirm_prediction knows
    how to check the weakened membership.
    """

    k: int
    family: str | None
    class_index: int | None
    bracket: tuple[float, float] | None
    theorem: str
    reason: str = ""
    mirrored: bool = False
    redefined: bool = False
    redefined_end: float | None = None

    @property
    def determinate(self) -> bool:
        return self.family is not None

    def bracket_contains(self, lam: float, tol: float = 1e-9) -> bool:
        if self.bracket is None:
            return False
        lo, hi = self.bracket
        if lo == 0.0:
            return -tol <= lam < hi
        return lo < lam < hi


def _indet(k: int, reason: str) -> Prediction:
    return Prediction(k, None, None, None, theorem="none", reason=reason)


def predict_nodal_class(spec: ProblemSpec, k: int) -> Prediction:
    """Dispatch the strongest applicable nodal theorem for index k.

    Order: pure-coefficient corollaries; single multi-point side machinery
    (pointwise thresholds at the Robin reference values, then crossover
    ranges and the strengthened crossover-pair tests at the summed level);
    two multi-point sides (crossover ranges, intermediate R range, and the
    strengthened boundary tests).  Indeterminate is a verdict, not an error.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    level = spec.hypothesis_level
    if not level_at_least(level, LEVEL_QUADRATIC):
        return _indet(k, "hypotheses violated: no nodal theorem applies")

    lam_n, lam_d, lam_m = _lam_ref("N"), _lam_ref("D"), _lam_ref("M")
    th_m = side_thresholds(spec.minus)
    th_p = side_thresholds(spec.plus)

    # (i) pure-coefficient corollaries.
    if spec.minus.sum_beta == 0.0 and spec.plus.sum_beta == 0.0 and (
        spec.minus.alpha0 > 0.0 and spec.plus.alpha0 > 0.0
    ):
        return Prediction(k, "T", k + 1, (lam_n(k), lam_n(k + 2)), theorem="T-all")
    if spec.minus.sum_alpha == 0.0 and spec.plus.sum_alpha == 0.0 and (
        spec.minus.beta0 != 0.0 and spec.plus.beta0 != 0.0
    ):
        return Prediction(k, "S", k, (lam_d(k - 2), lam_d(k)), theorem="S-all")

    single = _single_point_side(spec)
    if single is not None:
        return _predict_single_mp(spec, k, single, level)
    return _predict_two_mp(spec, k, th_m, th_p, level, lam_n, lam_d, lam_m)


def _predict_single_mp(spec: ProblemSpec, k: int, single: BoundarySide, level: str) -> Prediction:
    mp_side = spec.minus if single is spec.plus else spec.plus
    th = side_thresholds(mp_side)
    lam_rn = _ref_with_robin(single, "neumann")
    lam_rd = _ref_with_robin(single, "dirichlet")
    # A degenerate single-point side pins u or u' at its endpoint, so the
    # corresponding family holds only in the BC-restricted sense.
    t_redef = single.is_neumann_type
    s_redef = single.is_dirichlet_type

    def predict_T(theorem: str) -> Prediction:
        return Prediction(
            k, "T", k + 1, (lam_rn(k), lam_rn(k + 1)), theorem=theorem,
            redefined=t_redef, redefined_end=single.endpoint if t_redef else None,
        )

    def predict_S(theorem: str) -> Prediction:
        return Prediction(
            k, "S", k, (lam_rd(k - 1), lam_rd(k)), theorem=theorem,
            redefined=s_redef, redefined_end=single.endpoint if s_redef else None,
        )

    # Pointwise thresholds (valid at the squared-fraction level): the
    # derivative-pinning range is a down-set, the value-pinning range an
    # up-set, over the Robin reference sequences.
    k_T_ind = _max_index_leq_pred(lambda j: th.holds_ud(lam_rn(j)))
    if k_T_ind is not None and k <= k_T_ind - 1:
        return predict_T("T-below-crossover")
    k_S_ind = _min_index_pred(lambda j: th.holds_u(lam_rd(j)))
    if k_S_ind is not None and (k >= k_S_ind + 1 or k_S_ind == 0):
        return predict_S("S-above-crossover")

    if not level_at_least(level, LEVEL_LINEAR):
        return _indet(k, "in the pointwise-threshold gap (squared-fraction level only)")

    idx = crossover_indices(spec)
    k_c = idx.k_c
    if k_c is None:
        return _indet(k, "in the pointwise-threshold gap")
    if k_c == -1:
        return predict_S("S-all-from-crossover")
    if k <= k_c - 1:
        return predict_T("T-below-crossover")
    if k >= k_c + 2:
        return predict_S("S-above-crossover")

    # k is k_c or k_c + 1: the strengthened crossover-pair tests.
    J = th.J
    pair_ok = False
    if lam_rn(k_c + 1) <= J:  # (then J <= lam_rd(k_c+1) holds by definition)
        pair_ok = True
    elif th.holds_u(lam_rd(k_c)) or th.holds_ud(lam_rn(k_c + 1)):
        pair_ok = True
    if pair_ok:
        return predict_T("crossover-pair") if k == k_c else predict_S("crossover-pair")
    return _indet(k, "crossover-pair tests failed at the crossover indices")


def _predict_two_mp(spec, k, th_m, th_p, level, lam_n, lam_d, lam_m) -> Prediction:
    if not level_at_least(level, LEVEL_LINEAR):
        return _indet(k, "two multi-point sides need the summed-fraction level")
    idx = crossover_indices(spec)

    if idx.k_T is not None and k <= idx.k_T - 2:
        return Prediction(k, "T", k + 1, (lam_n(k), lam_n(k + 2)), theorem="T-range")
    if idx.k_S is not None and k >= idx.k_S + 2:
        return Prediction(k, "S", k, (lam_d(k - 2), lam_d(k)), theorem="S-range")

    both_finite = not math.isinf(idx.J_minus) and not math.isinf(idx.J_plus)
    if both_finite and idx.J_minus != idx.J_plus and idx.k_TM is not None and idx.k_SM is not None:
        if idx.k_TM + 1 <= k <= idx.k_SM - 1:
            return Prediction(
                k,
                "R",
                k,
                (lam_m(k - 1), lam_m(k + 1)),
                theorem="R-intermediate",
                mirrored=idx.J_minus < idx.J_plus,
            )

    # Strengthened boundary tests on the remaining indices.
    if idx.k_TM is not None and k <= idx.k_TM:
        lam0 = lam_n(idx.k_TM + 2)
        if th_m.holds_ud(lam0) and th_p.holds_ud(lam0):
            return Prediction(k, "T", k + 1, (lam_n(k), lam_n(k + 2)), theorem="T-gap-strengthened")
    if idx.k_SM is not None and k >= idx.k_SM:
        lam0 = lam_d(idx.k_SM - 2)
        if th_m.holds_u(lam0) and th_p.holds_u(lam0):
            return Prediction(k, "S", k, (lam_d(k - 2), lam_d(k)), theorem="S-gap-strengthened")
    return _indet(k, "between the T and S ranges; strengthened tests failed")


def confirm_prediction(pred: Prediction, trace, tol: float = 1e-8) -> bool:
    """Does a computed eigenfunction trace confirm a determinate prediction?

    Plain verdicts are checked by literal family membership (R verdicts in
    the mirrored orientation classify the reflected trace).  Redefined
    verdicts weaken the family data at the BC-pinned endpoint: the pinned
    value must vanish there (simply), everything else — the other endpoint,
    zero counts, simplicity, interleaving — is checked as usual, with the
    pinned u'-zero of a Neumann end counted toward the T index.
    """
    from .nodal import classify, reflected_trace, zeros_of

    if not pred.determinate:
        raise ValueError("cannot confirm an indeterminate prediction")
    if pred.family == "R" and pred.mirrored:
        trace = reflected_trace(trace)
    result = classify(trace, tol=tol)
    if result.has(pred.family, pred.class_index):
        return True
    if not pred.redefined:
        return False

    end = pred.redefined_end
    other = -end
    sup_u = trace.sup_u()
    sup_up = trace.sup_uprime()
    u_end, up_end = trace.eval(end)
    u_oth, up_oth = trace.eval(other)
    if pred.family == "S":
        if abs(u_end) > tol * sup_u:  # not actually pinned: nothing to weaken
            return False
        if abs(up_end) <= tol * sup_up or abs(u_oth) <= tol * sup_u:
            return False
        zeros = zeros_of(trace, "u", tol)
        return all(simple for _, simple in zeros) and len(zeros) == pred.class_index
    if pred.family == "T":
        if abs(up_end) > tol * sup_up:
            return False
        if abs(up_oth) <= tol * sup_up:
            return False
        zeros_up = zeros_of(trace, "uprime", tol)
        if not all(simple for _, simple in zeros_up):
            return False
        # the pinned endpoint zero of u' counts toward the index
        if len(zeros_up) != pred.class_index - 1:
            return False
        zeros_u = [x for x, _ in zeros_of(trace, "u", tol)]
        stations = sorted([end] + [x for x, _ in zeros_up])
        for d1, d2 in zip(stations, stations[1:]):
            if not any(d1 < z < d2 for z in zeros_u):
                return False
        return True
    return False


def _max_index_leq_pred(pred) -> int | None:
    """max{j >= 0 : pred(j)} for a down-set predicate; None when pred(0) fails.

    Returns _SEARCH_CAP (effectively 'all k') if the predicate never fails.
    """
    if not pred(0):
        return None
    j = 0
    while j < _SEARCH_CAP:
        if not pred(j + 1):
            return j
        j += 1
    return _SEARCH_CAP


def _min_index_pred(pred) -> int | None:
    """min{j >= 0 : pred(j)} for an up-set predicate; None when empty.

    The predicate is monotone, so failure out to the cap means empty for
    any index of practical interest.
    """
    if pred(0):
        return 0
    # Monotone: find the first success by doubling then bisecting.
    lo, hi = 0, 1
    while hi < _SEARCH_CAP and not pred(hi):
        lo, hi = hi, hi * 2
    if hi >= _SEARCH_CAP:
        return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi

"""Nodal classification of solutions: the S / T / R families.

For a C^2 function u on [-1, 1] the families are

  S_k^+ : u(+-1) != 0, u(-1) > 0, exactly k simple interior zeros of u;
  T_k^+ : u'(+-1) != 0, u'(-1) > 0, u' has exactly k simple interior zeros,
          and u vanishes strictly between each consecutive pair of them;
  R_k^+ : u'(-1) > 0, sign of u(1) is + for k even and - for k odd, u has
          only simple interior zeros, either k or k+1 of them  (k >= -1);

with X_k^- := -X_k^+.  Membership is decided from exact phase arithmetic
for closed-form solutions and from per-cell cubic Hermite interpolation for
sampled traces.  Boundary data within tolerance of a degeneracy yields an
"unclassified" verdict for that family, never a false negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnresolvableZeros
from .trig import TrigSolution, eval_solution, sup_norms
from .trig import reflected as _trig_reflected

DEFAULT_TOL = 1e-8
CLUSTER_TOL = 1e-8
MAX_SAMPLE_STEP = 1e-3 * (1.0 + 1e-9)
# Zeros closer to an endpoint than this are endpoint zeros up to rounding
# (phase arithmetic places an exact boundary zero at distance ~1e-16).
ENDPOINT_GUARD = 1e-12


class FunctionTrace:
    """Common view of a solution: evaluate (u, u') and take sup-norms."""

    def eval(self, x: float) -> tuple[float, float]:  # pragma: no cover - interface
        raise NotImplementedError

    def sup_u(self) -> float:  # pragma: no cover - interface
        raise NotImplementedError

    def sup_uprime(self) -> float:  # pragma: no cover - interface
        raise NotImplementedError


class ClosedTrace(FunctionTrace):
    """Closed-form solution of -u'' = lam*u."""

    def __init__(self, sol: TrigSolution):
        self.sol = sol

    def eval(self, x: float) -> tuple[float, float]:
        return eval_solution(self.sol, x)

    def sup_u(self) -> float:
        return sup_norms(self.sol)[0]

    def sup_uprime(self) -> float:
        return sup_norms(self.sol)[1]

    def grid(self, n: int = 2001) -> np.ndarray:
        return np.linspace(-1.0, 1.0, n)


class SampledTrace(FunctionTrace):
    """Dense (x, u, u') samples with cubic Hermite interpolation between nodes."""

    def __init__(self, x, u, uprime, max_step: float = MAX_SAMPLE_STEP):
        self.x = np.asarray(x, dtype=float)
        self.u = np.asarray(u, dtype=float)
        self.up = np.asarray(uprime, dtype=float)
        if self.x.ndim != 1 or self.x.shape != self.u.shape or self.x.shape != self.up.shape:
            raise ValueError("x, u, uprime must be 1-d arrays of equal length")
        if len(self.x) < 2:
            raise ValueError("need at least two samples")
        dx = np.diff(self.x)
        if not np.all(dx > 0.0):
            raise ValueError("sample x must be strictly increasing")
        if abs(self.x[0] + 1.0) > 1e-9 or abs(self.x[-1] - 1.0) > 1e-9:
            raise ValueError("samples must cover [-1, 1] endpoint to endpoint")
        if dx.max() > max_step:
            raise ValueError(
                f"sample step {dx.max():.3g} exceeds the allowed {max_step:.3g}"
            )

    def _locate(self, x: float) -> int:
        i = int(np.searchsorted(self.x, x, side="right")) - 1
        return min(max(i, 0), len(self.x) - 2)

    def _cell_coeffs(self, i: int) -> tuple[float, float, float, float, float]:
        """Cubic u = a s^3 + b s^2 + c s + d on cell i, s in [0, 1]."""
        h = self.x[i + 1] - self.x[i]
        u0, u1 = self.u[i], self.u[i + 1]
        p0, p1 = h * self.up[i], h * self.up[i + 1]
        a = 2.0 * u0 + p0 - 2.0 * u1 + p1
        b = -3.0 * u0 - 2.0 * p0 + 3.0 * u1 - p1
        return a, b, p0, u0, h

    def eval(self, x: float) -> tuple[float, float]:
        if not -1.0 - 1e-12 <= x <= 1.0 + 1e-12:
            raise ValueError(f"x={x} outside [-1, 1]")
        i = self._locate(x)
        a, b, c, d, h = self._cell_coeffs(i)
        s = (x - self.x[i]) / h
        u = ((a * s + b) * s + c) * s + d
        up = ((3.0 * a * s + 2.0 * b) * s + c) / h
        return u, up

    def sup_u(self) -> float:
        return float(np.max(np.abs(self.u)))

    def sup_uprime(self) -> float:
        return float(np.max(np.abs(self.up)))

    def sup_usecond(self) -> float:
        """Estimated |u''|_0 from the interpolant (used for zero simplicity)."""
        dx = np.diff(self.x)
        du = np.diff(self.u)
        # H''(0)/h^2 and H''(1)/h^2 per cell, vectorized.
        p0, p1 = self.up[:-1] * dx, self.up[1:] * dx
        a = 2.0 * self.u[:-1] + p0 - 2.0 * self.u[1:] + p1
        b = -3.0 * self.u[:-1] - 2.0 * p0 + 3.0 * self.u[1:] - p1
        h2 = dx * dx
        vals = np.maximum(np.abs(2.0 * b), np.abs(6.0 * a + 2.0 * b)) / h2
        return float(np.max(vals))

    def grid(self, n: int = 0) -> np.ndarray:
        return self.x


def reflected_trace(trace: FunctionTrace) -> FunctionTrace:
    """The trace of v(x) = u(-x)."""
    if isinstance(trace, ClosedTrace):
        return ClosedTrace(_trig_reflected(trace.sol))
    if isinstance(trace, SampledTrace):
        return SampledTrace(-trace.x[::-1], trace.u[::-1], -trace.up[::-1])
    raise TypeError(f"cannot reflect {type(trace).__name__}")


@dataclass(frozen=True)
class NodalClass:
    family: str  # 'S', 'T' or 'R'
    k: int
    sign: str  # '+' or '-'
    note: str = ""

    def label(self) -> str:
        return f"{self.family}_{self.k}^{self.sign}"


@dataclass
class ClassificationResult:
    memberships: list[NodalClass] = field(default_factory=list)
    status: dict = field(default_factory=dict)  # family -> ('member', NodalClass) | ('unclassified', reason)
    zeros_u: list[tuple[float, bool]] = field(default_factory=list)
    zeros_uprime: list[tuple[float, bool]] = field(default_factory=list)
    boundary: dict = field(default_factory=dict)
    satisfies_minus_bc: bool | None = None
    satisfies_plus_bc: bool | None = None

    def member(self, family: str) -> NodalClass | None:
        entry = self.status.get(family)
        if entry and entry[0] == "member":
            return entry[1]
        return None

    def has(self, family: str, k: int, sign: str | None = None) -> bool:
        for m in self.memberships:
            if m.family == family and m.k == k and (sign is None or m.sign == sign):
                return True
        return False


# ---------------------------------------------------------------------------
# zero location


def _closed_zeros(sol: TrigSolution, which: str) -> list[float]:
    lam, A, B = sol.lam, sol.A, sol.B
    from .trig import ZERO_LAMBDA_CUTOFF

    guard = ENDPOINT_GUARD
    if abs(lam) < ZERO_LAMBDA_CUTOFF:
        if which == "u":
            if B == 0.0:
                return []
            y0 = -A / B
            return [y0 - 1.0] if guard < y0 < 2.0 - guard else []
        return []  # u' is the constant B: no interior zeros (or identically 0)
    if lam > 0.0:
        w = math.sqrt(lam)
        R = math.hypot(A, B / w)
        if R == 0.0:
            return []
        phi = math.atan2(B / w, A)
        offset = phi + (0.5 * math.pi if which == "u" else 0.0)
        zeros = []
        n = math.ceil(-offset / math.pi)
        while True:
            y = (offset + n * math.pi) / w
            if y >= 2.0 - guard:
                break
            if y > guard:
                zeros.append(y - 1.0)
            n += 1
        return zeros
    w = math.sqrt(-lam)
    if which == "u":
        if B == 0.0 or A == 0.0:
            return []
        r = -A * w / B
    else:
        if A == 0.0 or B == 0.0:
            return []
        r = -B / (A * w)
    if not 0.0 < r < 1.0:
        return []
    y = math.atanh(r) / w
    return [y - 1.0] if ENDPOINT_GUARD < y < 2.0 - ENDPOINT_GUARD else []


def _sampled_zeros(trace: SampledTrace, which: str) -> list[float]:
    """Real roots of the per-cell interpolant of the requested channel."""
    x, u, up = trace.x, trace.u, trace.up
    dx = np.diff(x)
    if which == "u":
        vals = u
        slope_bound = trace.sup_uprime()
    else:
        vals = up
        slope_bound = trace.sup_usecond()
    v0, v1 = vals[:-1], vals[1:]
    sign_change = v0 * v1 < 0.0
    near = np.minimum(np.abs(v0), np.abs(v1)) <= dx * slope_bound * 1.5 + 1e-300
    candidates = np.nonzero(sign_change | near)[0]

    zeros: list[float] = []
    for i in candidates:
        a, b, c, d, h = trace._cell_coeffs(i)
        if which == "u":
            poly = [a, b, c, d]
        else:
            poly = [3.0 * a, 2.0 * b, c]
        poly = np.array(poly, dtype=float)
        lead = np.max(np.abs(poly))
        if lead == 0.0:
            continue
        nz = np.nonzero(np.abs(poly) > 1e-14 * lead)[0]
        poly = poly[nz[0]:]
        if len(poly) < 2:
            continue
        roots = np.roots(poly)
        last_cell = i == len(dx) - 1
        for r in roots:
            if abs(r.imag) > 1e-9:
                continue
            s = r.real
            hi = 1.0 + 1e-12 if last_cell else 1.0
            if -1e-12 <= s < hi:
                zeros.append(float(x[i] + min(max(s, 0.0), 1.0) * h))
    zeros.sort()
    # Roots recovered from both sides of a shared node differ by solver
    # noise (~1e-12); merge well below the cluster threshold so genuine
    # near-tangencies still raise.
    merged: list[float] = []
    for z in zeros:
        if merged and z - merged[-1] < 1e-10:
            continue
        merged.append(z)
    return [z for z in merged if -1.0 + ENDPOINT_GUARD < z < 1.0 - ENDPOINT_GUARD]


def zeros_of(trace: FunctionTrace, which: str = "u", tol: float = DEFAULT_TOL) -> list[tuple[float, bool]]:
    """Interior zeros of u or u' with a simplicity flag.

    A zero x0 of u is simple iff |u'(x0)| > tol * |u'|_0 (analogously with
    u'' for zeros of u').  Zeros closer together than the cluster tolerance
    raise UnresolvableZeros: the data cannot distinguish a tangency.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if which not in ("u", "uprime"):
        raise ValueError("which must be 'u' or 'uprime'")
    if isinstance(trace, ClosedTrace):
        xs = _closed_zeros(trace.sol, which)
        if which == "u":
            deriv_sup = trace.sup_uprime()
            deriv = lambda x: trace.eval(x)[1]
        else:
            deriv_sup = abs(trace.sol.lam) * trace.sup_u()
            deriv = lambda x: -trace.sol.lam * trace.eval(x)[0]
    elif isinstance(trace, SampledTrace):
        xs = _sampled_zeros(trace, which)
        if which == "u":
            deriv_sup = trace.sup_uprime()
            deriv = lambda x: trace.eval(x)[1]
        else:
            deriv_sup = trace.sup_usecond()

            def deriv(xv, _t=trace):
                i = _t._locate(xv)
                a, b, c, _, h = _t._cell_coeffs(i)
                s = (xv - _t.x[i]) / h
                return (6.0 * a * s + 2.0 * b) / (h * h)
    else:
        raise TypeError(f"unsupported trace type {type(trace).__name__}")

    for za, zb in zip(xs, xs[1:]):
        if zb - za < CLUSTER_TOL:
            raise UnresolvableZeros(
                f"zeros of {which} at {za:.12g} and {zb:.12g} are unresolvably close"
            )
    out = []
    for z in xs:
        simple = abs(deriv(z)) > tol * deriv_sup
        out.append((z, simple))
    return out


# ---------------------------------------------------------------------------
# classification


def _sign(v: float) -> str:
    return "+" if v > 0.0 else "-"


def classify(
    trace: FunctionTrace,
    family_hint: str | None = None,
    tol: float = DEFAULT_TOL,
    spec=None,
) -> ClassificationResult:
    """All S/T/R memberships of a trace (they are not mutually exclusive).

    Boundary data within tol (relative) of a family's degeneracy makes that
    family 'unclassified' with a reason.  With ``spec`` given, the result
    also reports whether the trace satisfies each multi-point boundary
    condition to tolerance (used when endpoint conditions force u or u' to
    vanish at an endpoint and the plain families cannot apply).
    """
    sup_u = trace.sup_u()
    sup_up = trace.sup_uprime()
    if sup_u == 0.0:
        raise ValueError("cannot classify the zero function")
    u_m, up_m = trace.eval(-1.0)
    u_p, up_p = trace.eval(1.0)

    result = ClassificationResult()
    result.boundary = {"u(-1)": u_m, "u(1)": u_p, "uprime(-1)": up_m, "uprime(1)": up_p}
    families = [family_hint] if family_hint else ["S", "T", "R"]

    zeros_u: list[tuple[float, bool]] | None = None
    zeros_up: list[tuple[float, bool]] | None = None

    def get_zeros_u():
        nonlocal zeros_u
        if zeros_u is None:
            zeros_u = zeros_of(trace, "u", tol)
            result.zeros_u = zeros_u
        return zeros_u

    def get_zeros_up():
        nonlocal zeros_up
        if zeros_up is None:
            zeros_up = zeros_of(trace, "uprime", tol)
            result.zeros_uprime = zeros_up
        return zeros_up

    if "S" in families:
        if min(abs(u_m), abs(u_p)) <= tol * sup_u:
            result.status["S"] = ("unclassified", "boundary-degenerate")
        else:
            zu = get_zeros_u()
            if all(simple for _, simple in zu):
                cls = NodalClass("S", len(zu), _sign(u_m))
                result.status["S"] = ("member", cls)
                result.memberships.append(cls)
            else:
                result.status["S"] = ("unclassified", "nonsimple-zero")

    if "T" in families:
        if sup_up == 0.0 or min(abs(up_m), abs(up_p)) <= tol * sup_up:
            result.status["T"] = ("unclassified", "boundary-degenerate")
        else:
            zup = get_zeros_up()
            if not all(simple for _, simple in zup):
                result.status["T"] = ("unclassified", "nonsimple-zero")
            else:
                zu = get_zeros_u()
                verdict: tuple | None = None
                coincide_tol = CLUSTER_TOL
                for (d, _) in zup:
                    if any(abs(z - d) <= coincide_tol for z, _s in zu):
                        verdict = ("unclassified", "zero-coincidence")
                        break
                if verdict is None:
                    for (d1, _), (d2, _) in zip(zup, zup[1:]):
                        if not any(d1 < z < d2 for z, _s in zu):
                            verdict = ("unclassified", "no-interleaving-zero")
                            break
                if verdict is None:
                    cls = NodalClass("T", len(zup), _sign(up_m))
                    verdict = ("member", cls)
                    result.memberships.append(cls)
                result.status["T"] = verdict

    if "R" in families:
        if sup_up == 0.0 or abs(up_m) <= tol * sup_up or abs(u_p) <= tol * sup_u:
            result.status["R"] = ("unclassified", "boundary-degenerate")
        else:
            zu = get_zeros_u()
            if not all(simple for _, simple in zu):
                result.status["R"] = ("unclassified", "nonsimple-zero")
            else:
                s = _sign(up_m)
                # u(1)*sign > 0 wants k even, < 0 wants k odd; of the two
                # admissible counts {z-1, z} exactly one has the right parity.
                want_even = (u_p > 0.0) == (s == "+")
                z = len(zu)
                k = z if (z % 2 == 0) == want_even else z - 1
                if k >= -1:
                    cls = NodalClass("R", k, s, note="nonstandard" if k == -1 else "")
                    result.status["R"] = ("member", cls)
                    result.memberships.append(cls)
                else:  # pragma: no cover - unreachable: z >= 0
                    result.status["R"] = ("unclassified", "no-admissible-count")

    if spec is not None:
        result.satisfies_minus_bc = _bc_satisfied(spec.minus, trace, sup_u, sup_up, tol)
        result.satisfies_plus_bc = _bc_satisfied(spec.plus, trace, sup_u, sup_up, tol)
    return result


def _bc_satisfied(side, trace: FunctionTrace, sup_u: float, sup_up: float, tol: float) -> bool:
    u_nu, up_nu = trace.eval(side.endpoint)
    r = side.alpha0 * u_nu + side.beta0 * up_nu
    for ai, bi, ei in zip(side.alpha, side.beta, side.eta):
        ue, upe = trace.eval(ei)
        r -= ai * ue + bi * upe
    scale = 1.0 + abs(side.alpha0) * sup_u + abs(side.beta0) * sup_up
    return abs(r) <= tol * scale


def energy_deviation(lam: float, trace: FunctionTrace, n_samples: int = 2001) -> float:
    """Relative non-constancy of lam*u^2 + u'^2 along the trace.

    For an exact solution of -u'' = lam*u this profile is constant, so the
    deviation is a solver-independent correctness check.
    """
    if lam <= 0.0:
        raise ValueError("energy deviation requires lam > 0")
    xs = trace.grid(n_samples)
    profile = np.empty(len(xs))
    for i, xv in enumerate(xs):
        u, upv = trace.eval(float(xv))
        profile[i] = lam * u * u + upv * upv
    med = float(np.median(profile))
    if med == 0.0:
        raise ValueError("degenerate energy profile")
    return float(np.max(np.abs(profile - med)) / med)

"""Command-line interface.

Subcommands: validate, spectrum, classify, predict, solve, branch,
nodal-solve, selftest.  Exit codes: 0 success, 2 problem-data/validation
failure, 3 numeric failure, 4 theorem-hypothesis failure.  All outputs are
written atomically and are byte-identical for identical configuration and
seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import reporting
from .branching import branch_from_infinity, branch_from_zero, nodal_solutions_at_one
from .conditions import predict_nodal_class
from .errors import (
    HypothesisError,
    MpslError,
    NumericError,
    ParseError,
    ProblemDataError,
)
from .expressions import ForcingTerm, NonlinearitySpec
from .nodal import ClosedTrace, SampledTrace, classify
from .problem import ProblemSpec, load_problem, validate_problem
from .shooting import nonresonance_check, solve_bvp_multistart
from .spectrum import continuation_spectrum, eigen_scan

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_HYPOTHESIS = 4

TOL_RANGE = (1e-14, 1e-2)


def _worker_count() -> int:
    env = os.environ.get("MPSL_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _parse_k_range(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo_i, hi_i = int(lo), int(hi)
        if hi_i < lo_i:
            raise ProblemDataError(f"empty k range {text!r}")
        return list(range(lo_i, hi_i + 1))
    if "," in text:
        return [int(p) for p in text.split(",")]
    return [int(text)]


def _check_tol(tol: float) -> float:
    if not TOL_RANGE[0] <= tol <= TOL_RANGE[1]:
        raise ProblemDataError(
            f"tolerance override {tol:g} outside [{TOL_RANGE[0]:g}, {TOL_RANGE[1]:g}]"
        )
    return tol


def _load(path: str):
    spec, extras = load_problem(path)
    validate_problem(spec)  # raises on structural errors
    return spec, extras


def _nonlinearity(extras: dict) -> NonlinearitySpec | None:
    section = extras.get("nonlinearity")
    if not section:
        return None
    unknown = set(section) - {"f", "f0", "finf"}
    if unknown:
        raise ProblemDataError(f"nonlinearity: unknown keys {sorted(unknown)}")
    if "f" not in section:
        raise ProblemDataError("nonlinearity: missing expression key 'f'")
    return NonlinearitySpec.from_text(
        section["f"], f0=section.get("f0"), finf=section.get("finf")
    )


def _forcing(extras: dict) -> ForcingTerm | None:
    section = extras.get("forcing")
    if not section:
        return None
    unknown = set(section) - {"h"}
    if unknown:
        raise ProblemDataError(f"forcing: unknown keys {sorted(unknown)}")
    return ForcingTerm.from_text(section["h"])


def _primary_membership(result):
    for fam in ("S", "T", "R"):
        m = result.member(fam)
        if m is not None:
            return m
    return None


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    spec, _ = _load(args.problem)
    report = validate_problem(spec)
    payload = {
        "ok": report.ok,
        "level": report.level,
        "messages": [list(m) for m in report.messages],
        "strict_alpha_positive": report.strict_alpha_positive,
        "quadratic_ok": report.quadratic_ok,
        "linear_ok": report.linear_ok,
        "side_types": report.side_types,
        "problem_type": report.problem_type,
    }
    reporting.write_json(os.path.join(args.out, "validate.json"), payload)
    for sev, text in report.messages:
        print(f"{sev}: {text}", file=sys.stderr)
    print(f"level: {report.level} ({report.problem_type})")
    return EXIT_OK if report.ok else EXIT_VALIDATION


def _spectrum_rows(spec: ProblemSpec, window):
    def row(ep):
        res = classify(ClosedTrace(ep.psi))
        m = _primary_membership(res)
        pred = predict_nodal_class(spec, ep.k)
        return [
            ep.k,
            ep.lam,
            m.family if m else "",
            m.k if m else "",
            m.sign if m else "",
            pred.bracket[0] if pred.determinate else "",
            pred.bracket[1] if pred.determinate else "",
        ]

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        return list(pool.map(row, window.eigenpairs))


def cmd_spectrum(args) -> int:
    spec, _ = _load(args.problem)
    if args.reference:
        from .reference import reference_eigenvalue

        rows = [[k, reference_eigenvalue(args.reference, k)] for k in range(args.count)]
        reporting.write_csv(os.path.join(args.out, "reference.csv"), ["k", "lambda"], rows)
        return EXIT_OK
    window = eigen_scan(spec, args.lambda_max)
    rows = _spectrum_rows(spec, window)
    reporting.write_csv(
        os.path.join(args.out, "spectrum.csv"),
        ["k", "lambda", "family", "class_k", "sign", "bracket_lo", "bracket_hi"],
        rows,
    )
    payload = {
        "lambda_max": window.lambda_max,
        "count": len(window.eigenpairs),
        "robin_count": window.robin_count,
        "eigenvalues": [ep.lam for ep in window.eigenpairs],
        "simple": [ep.simple for ep in window.eigenpairs],
        "negative": [ep.negative for ep in window.eigenpairs],
    }
    reporting.write_json(os.path.join(args.out, "spectrum.json"), payload)
    print(f"{len(window.eigenpairs)} eigenvalues <= {args.lambda_max:g}")
    return EXIT_OK


def _classification_payload(result) -> dict:
    return {
        "memberships": [m.label() for m in result.memberships],
        "status": {fam: list(entry) if entry[0] == "unclassified" else ["member", entry[1].label()]
                   for fam, entry in result.status.items()},
        "zeros_u": [[x, s] for x, s in result.zeros_u],
        "zeros_uprime": [[x, s] for x, s in result.zeros_uprime],
        "boundary": result.boundary,
        "satisfies_minus_bc": result.satisfies_minus_bc,
        "satisfies_plus_bc": result.satisfies_plus_bc,
    }


def cmd_classify(args) -> int:
    tol = _check_tol(args.tol)
    if args.trace:
        data = np.loadtxt(args.trace, delimiter=",", skiprows=1)
        trace = SampledTrace(data[:, 0], data[:, 1], data[:, 2])
        spec = None
        if args.problem:
            spec, _ = _load(args.problem)
        result = classify(trace, tol=tol, spec=spec)
        payload = {"source": os.path.basename(args.trace), "classification": _classification_payload(result)}
        reporting.write_json(os.path.join(args.out, "classify.json"), payload)
        print(", ".join(m.label() for m in result.memberships) or "unclassified")
        return EXIT_OK

    if not args.problem:
        raise ProblemDataError("classify needs a problem file unless --trace is given")
    spec, _ = _load(args.problem)
    if args.from_spectrum:
        rows = _read_csv_rows(args.from_spectrum)
        ks = [int(float(r["k"])) for r in rows]
    else:
        ks = _parse_k_range(args.k)
    pairs = continuation_spectrum(spec, max(ks))
    by_k = {ep.k: ep for ep in pairs}
    out = {}
    curves = []
    for k in ks:
        ep = by_k[k]
        result = classify(ClosedTrace(ep.psi), tol=tol, spec=spec)
        out[str(k)] = {
            "lambda": ep.lam,
            "classification": _classification_payload(result),
        }
        xs = np.linspace(-1.0, 1.0, 401)
        curves.append((f"psi_{k}", list(xs), [ep.psi(float(x))[0] for x in xs]))
    reporting.write_json(os.path.join(args.out, "classify.json"), {"eigenpairs": out})
    if args.format == "svg":
        reporting.eigenfunction_gallery_svg(os.path.join(args.out, "gallery.svg"), curves)
    if args.from_spectrum:
        mism = _roundtrip_mismatches(rows, out)
        if mism:
            print(f"{len(mism)} verdict mismatches vs {args.from_spectrum}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"verdicts match {os.path.basename(args.from_spectrum)}")
    else:
        for k in ks:
            print(f"k={k}: " + (", ".join(out[str(k)]["classification"]["memberships"]) or "unclassified"))
    return EXIT_OK


def _read_csv_rows(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[1:]]


def _roundtrip_mismatches(rows: list[dict], out: dict) -> list[int]:
    mism = []
    for r in rows:
        k = int(float(r["k"]))
        entry = out[str(k)]["classification"]
        fam, ck, sign = r.get("family", ""), r.get("class_k", ""), r.get("sign", "")
        if not fam:
            continue
        label = f"{fam}_{ck}^{sign}"
        if label not in entry["memberships"]:
            mism.append(k)
    return mism


def cmd_predict(args) -> int:
    spec, _ = _load(args.problem)
    ks = _parse_k_range(args.k)
    rows = []
    payload = {}
    for k in ks:
        p = predict_nodal_class(spec, k)
        verdict = f"{p.family}({p.class_index})" if p.determinate else "Indeterminate"
        if p.redefined:
            verdict += "*"  # holds in the BC-restricted sense
        rows.append([
            k,
            verdict,
            p.bracket[0] if p.bracket else "",
            p.bracket[1] if p.bracket else "",
            p.theorem,
            p.reason,
        ])
        payload[str(k)] = {
            "family": p.family,
            "class_index": p.class_index,
            "bracket": list(p.bracket) if p.bracket else None,
            "theorem": p.theorem,
            "reason": p.reason,
            "mirrored": p.mirrored,
            "redefined": p.redefined,
        }
    reporting.write_csv(
        os.path.join(args.out, "predict.csv"),
        ["k", "verdict", "bracket_lo", "bracket_hi", "theorem", "reason"],
        rows,
    )
    reporting.write_json(os.path.join(args.out, "predict.json"), {"predictions": payload})
    for row in rows:
        print(f"k={row[0]}: {row[1]} [{row[4]}]")
    return EXIT_OK


def _solution_files(args, sol, tag: str, extra: dict) -> None:
    rows = [[float(x), float(u), float(up)] for x, u, up in zip(sol.trace.x, sol.trace.u, sol.trace.up)]
    reporting.write_csv(os.path.join(args.out, f"{tag}.csv"), ["x", "u", "uprime"], rows)
    result = classify(sol.trace)
    payload = {
        "a": sol.shooting.a,
        "b": sol.shooting.b,
        "lambda": sol.shooting.lam,
        "residuals": list(sol.shooting.residuals),
        "scales": list(sol.scales),
        "energy_dev": sol.energy_dev,
        "collocation_residual": sol.collocation_residual,
        "amplitude": sol.amplitude,
        "classification": _classification_payload(result),
    }
    payload.update(extra)
    reporting.write_json(os.path.join(args.out, f"{tag}.json"), payload)


def cmd_solve(args) -> int:
    spec, extras = _load(args.problem)
    nl = _nonlinearity(extras)
    h = _forcing(extras)
    if nl is None:
        raise ProblemDataError("solve needs a 'nonlinearity' section in the problem file")
    verdict = nonresonance_check(spec, nl)
    sol = solve_bvp_multistart(spec, nl, h, args.lam, seed=args.seed)
    _solution_files(args, sol, "solution", {
        "nonresonance": {
            "ok": verdict.ok,
            "reason": verdict.reason,
            "finf": verdict.finf,
            "nearest_eigenvalue": verdict.nearest_eigenvalue,
            "distance": verdict.distance,
            "out_of_scope": verdict.out_of_scope,
        },
    })
    print(f"solution found: residuals {sol.shooting.residuals[0]:.3e}, {sol.shooting.residuals[1]:.3e}")
    return EXIT_OK


def _branch_files(args, branch, tag: str) -> None:
    rows = []
    for p in branch.points:
        label = ";".join(m.label() for m in p.nodal)
        rows.append([p.arclength, p.lam, p.amplitude, p.shooting.a, p.shooting.b, label])
    reporting.write_csv(
        os.path.join(args.out, f"{tag}.csv"),
        ["arclength", "lambda", "amplitude", "a", "b", "class"],
        rows,
    )
    reporting.bifurcation_diagram_svg(
        os.path.join(args.out, f"{tag}.svg"),
        [(tag, branch.lambdas(), branch.amplitudes())],
        gate=1.0,
    )


def cmd_branch(args) -> int:
    spec, extras = _load(args.problem)
    nl = _nonlinearity(extras)
    if nl is None:
        raise ProblemDataError("branch needs a 'nonlinearity' section in the problem file")
    signs = [args.sign] if args.sign else ["+", "-"]
    for k in _parse_k_range(args.k):
        for sign in signs:
            if args.from_infinity:
                br = branch_from_infinity(spec, nl, k, sign)
            else:
                br = branch_from_zero(spec, nl, k, sign, eps_seed=args.eps_seed)
            tag = f"branch_k{k}_{'plus' if sign == '+' else 'minus'}"
            _branch_files(args, br, tag)
            print(f"{tag}: {len(br.points)} points, termination {br.termination}")
    return EXIT_OK


def cmd_nodal_solve(args) -> int:
    spec, extras = _load(args.problem)
    nl = _nonlinearity(extras)
    if nl is None:
        raise ProblemDataError("nodal-solve needs a 'nonlinearity' section in the problem file")
    for k in _parse_k_range(args.k):
        res = nodal_solutions_at_one(spec, nl, k, eps_seed=args.eps_seed)
        for sign, sol in res.solutions.items():
            tag = f"nodal_k{k}_{'plus' if sign == '+' else 'minus'}"
            _solution_files(args, sol, tag, {
                "family": res.family,
                "class_index": res.class_index,
                "route": res.route,
                "gamma": res.gamma,
                "orientation": res.orientation,
            })
        print(f"k={k}: {res.family}_{res.class_index}^+- solutions at lambda=1 via {res.route}")
    return EXIT_OK


SELFTEST_PROBLEM = {
    "minus": {"alpha0": 1.0, "beta0": 0.0, "alpha": [], "beta": [], "eta": []},
    "plus": {"alpha0": 1.0, "beta0": 0.0, "alpha": [0.5], "beta": [0.0], "eta": [0.0]},
    "nonlinearity": {"f": "xi*(1+3/(1+xi^2))", "f0": 4.0, "finf": 1.0},
    "forcing": {"h": "x"},
}


def cmd_selftest(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    problem_path = os.path.join(args.out, "problem.json")
    reporting.atomic_write_text(problem_path, json.dumps(SELFTEST_PROBLEM, indent=2, sort_keys=True) + "\n")

    ns = argparse.Namespace(problem=problem_path, out=args.out, seed=args.seed,
                            tol=1e-8, format="csv")
    code = cmd_validate(ns)
    if code != EXIT_OK:
        return code
    ns.lambda_max = 40.0
    ns.reference = None
    ns.count = 0
    cmd_spectrum(ns)
    ns.k = "0..6"
    cmd_predict(ns)
    ns.trace = None
    ns.from_spectrum = None
    ns.k = "0..3"
    ns.format = "svg"
    cmd_classify(ns)
    # nonresonance solve of the forced problem with a sublinear f.
    solve_problem = dict(SELFTEST_PROBLEM)
    solve_problem["nonlinearity"] = {"f": "xi/(1+abs(xi))", "f0": 1.0, "finf": 0.0}
    solve_path = os.path.join(args.out, "problem_forced.json")
    reporting.atomic_write_text(solve_path, json.dumps(solve_problem, indent=2, sort_keys=True) + "\n")
    ns2 = argparse.Namespace(problem=solve_path, out=args.out, seed=args.seed, lam=1.0)
    cmd_solve(ns2)
    # one short branch of the crossing nonlinearity.
    ns3 = argparse.Namespace(problem=problem_path, out=args.out, seed=args.seed,
                             k="0", sign="+", from_infinity=False, eps_seed=args.eps_seed)
    cmd_branch(ns3)
    print("selftest complete")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mpsl", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, problem=True):
        if problem:
            p.add_argument("problem", help="problem JSON file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--format", choices=["json", "csv", "svg"], default="csv")

    p = sub.add_parser("validate", help="validate a problem file")
    common(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("spectrum", help="scan the spectrum")
    common(p)
    p.add_argument("--lambda-max", dest="lambda_max", type=float, default=30.0)
    p.add_argument("--reference", choices=["dirichlet", "neumann", "mixed"], default=None)
    p.add_argument("--count", type=int, default=21, help="indices for --reference")
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("classify", help="classify eigenfunctions or a trace file")
    p.add_argument("problem", nargs="?", default=None)
    p.add_argument("--out", default=".")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--format", choices=["json", "csv", "svg"], default="json")
    p.add_argument("--k", default="0..3")
    p.add_argument("--trace", default=None, help="CSV trace with columns x,u,uprime")
    p.add_argument("--from", dest="from_spectrum", default=None,
                   help="re-ingest a spectrum.csv and verify verdicts")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("predict", help="theorem-dispatch table")
    common(p)
    p.add_argument("--k", default="0..10")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("solve", help="solve -u'' = f(u) + h")
    common(p)
    p.add_argument("--lam", type=float, default=1.0)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("branch", help="trace a bifurcation branch")
    common(p)
    p.add_argument("--k", default="0")
    p.add_argument("--sign", choices=["+", "-"], default=None)
    p.add_argument("--from-infinity", dest="from_infinity", action="store_true")
    p.add_argument("--eps-seed", dest="eps_seed", type=float, default=1e-3)
    p.set_defaults(fn=cmd_branch)

    p = sub.add_parser("nodal-solve", help="nodal solutions at lambda = 1")
    common(p)
    p.add_argument("--k", default="0")
    p.add_argument("--eps-seed", dest="eps_seed", type=float, default=1e-3)
    p.set_defaults(fn=cmd_nodal_solve)

    p = sub.add_parser("selftest", help="deterministic end-to-end smoke run")
    common(p, problem=False)
    p.add_argument("--eps-seed", dest="eps_seed", type=float, default=1e-3)
    p.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if hasattr(args, "tol"):
            _check_tol(args.tol)
        return args.fn(args)
    except (ProblemDataError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except HypothesisError as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MpslError as exc:  # pragma: no cover - catch-all
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

"""Batch front door: rate / verify / sweep / simulate.

Every code path here is a thin composition of the library modules; no
numerical logic lives in the CLI.  Output is deterministic for a fixed
seed.  Exit codes: 0 success, 2 configuration error, 3 infeasible SDP,
4 numerical trouble, 5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import certify, certsearch, oracle
from .polyform import as_fraction
from .scenarios import (
    METRIC_FOR_KIND,
    AlgorithmSpec,
    FunctionClass,
    ScenarioError,
    build_scenario,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4
EXIT_VERIFY = 5

ALG_NAMES = {
    "gd-constant": "gd_constant",
    "gd-els": "gd_els",
    "gd-armijo": "gd_armijo",
    "gd-goldstein": "gd_goldstein",
    "gd-wolfe": "gd_wolfe",
    "pgm-constant": "pgm_constant",
    "pgm-els": "pgm_els",
}

PARAM_FLAGS = ("mu", "L", "gamma", "eps", "eta", "delta", "c1", "c2", "kappa")


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    """Floats with 9 significant digits (rationals print as p/q elsewhere)."""
    return f"{float(x):.9g}"


def _parse_range(text: str) -> list[Fraction]:
    """'start:stop[:count]' -> inclusive rational grid; plain values give
    a single-point list."""
    parts = text.split(":")
    if len(parts) == 1:
        return [as_fraction(parts[0])]
    if len(parts) not in (2, 3):
        raise ConfigError(f"bad range {text!r}; expected start:stop[:count]")
    start, stop = as_fraction(parts[0]), as_fraction(parts[1])
    count = int(parts[2]) if len(parts) == 3 else 20
    if count < 2:
        raise ConfigError("range needs count >= 2")
    step = (stop - start) / (count - 1)
    return [start + i * step for i in range(count)]


def _read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"bad config line {raw!r}; expected key = value")
            key, val = (part.strip() for part in line.split("=", 1))
            out[key] = val
    return out


def _merged_params(args) -> dict[str, str]:
    """Config-file values with command-line flags taking precedence."""
    merged: dict[str, str] = {}
    if args.config:
        cfg = _read_config(args.config)
        alias = {"class.mu": "mu", "class.L": "L", "alg.kind": "alg"}
        for key, val in cfg.items():
            name = alias.get(key, key.split(".")[-1])
            merged[name] = val
    for flag in ("alg",) + PARAM_FLAGS:
        val = getattr(args, flag if flag != "L" else "L_", None)
        if val is not None:
            merged[flag] = val
    return merged


def _build_spec(params: dict, kind: str, overrides: dict | None = None) -> tuple[FunctionClass, AlgorithmSpec]:
    vals = dict(params)
    if overrides:
        vals.update(overrides)
    if "kappa" in vals and "L" not in vals:
        vals["mu"] = vals.get("mu", "1")
        vals["L"] = as_fraction(vals["kappa"]) * as_fraction(vals["mu"])
    if "mu" not in vals or "L" not in vals:
        raise ConfigError("need --mu and --L (or --kappa)")
    fclass = FunctionClass(as_fraction(vals["mu"]), as_fraction(vals["L"]), composite=kind.startswith("pgm"))
    alg = AlgorithmSpec(
        kind,
        gamma=vals.get("gamma"),
        epsilon=vals.get("eps"),
        eta=vals.get("eta"),
        delta=vals.get("delta", 0),
        c1=vals.get("c1"),
        c2=vals.get("c2"),
    )
    return fclass, alg


def _alg_kind(params: dict) -> str:
    name = params.get("alg")
    if not name:
        raise ConfigError("--alg is required")
    if name not in ALG_NAMES:
        raise ConfigError(f"unknown --alg {name!r}; choose from {sorted(ALG_NAMES)}")
    return ALG_NAMES[name]


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_rate(args) -> int:
    params = _merged_params(args)
    kind = _alg_kind(params)
    fclass, alg = _build_spec(params, kind)
    problem = build_scenario(fclass, alg, args.metric)
    result = certsearch.solve_rate(certsearch.build_sos_sdp(problem), tol=args.tol)
    if result.solver_status == "infeasible":
        _emit(args, f"status infeasible  # no degree-1 certificate for {kind}")
        return EXIT_INFEASIBLE
    if result.solver_status != "optimal":
        _emit(args, "status numerical_trouble")
        return EXIT_NUMERICAL
    t_formula = certify.rate_formula(kind, fclass, alg)
    gap = abs(result.t - float(t_formula))
    if args.format == "json-lines":
        _emit(args, json.dumps({
            "alg": kind, "t_sdp": result.t,
            "t_formula": f"{t_formula.numerator}/{t_formula.denominator}",
            "t_formula_float": float(t_formula), "gap": gap,
        }, sort_keys=True))
    elif args.format == "csv":
        _emit(args, "alg,t_sdp,t_formula,gap\n"
              f"{kind},{_fmt(result.t)},{_fmt(float(t_formula))},{_fmt(gap)}")
    else:
        _emit(args, "\n".join([
            f"alg {kind}",
            f"t_sdp {_fmt(result.t)}",
            f"t_formula {t_formula.numerator}/{t_formula.denominator} = {_fmt(float(t_formula))}",
            f"gap {_fmt(gap)}",
        ]))
    return EXIT_OK


def cmd_verify(args) -> int:
    params = _merged_params(args)
    kind = _alg_kind(params)
    fclass, alg = _build_spec(params, kind)
    problem = build_scenario(fclass, alg, args.metric)
    report = certify.verification_report(problem)
    _emit(args, report)
    ok = "identity PASS" in report and "FAIL" not in report
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_sweep(args) -> int:
    params = _merged_params(args)
    kind = _alg_kind(params)
    ranged = [(name, _parse_range(params[name])) for name in PARAM_FLAGS
              if name in params and ":" in str(params[name])]
    if not ranged:
        raise ConfigError("sweep needs at least one ranged flag like --kappa 2:50")
    ranged_names = {name for name, _ in ranged}
    fixed = {k: v for k, v in params.items() if k != "alg" and k not in ranged_names}

    grids: list[dict] = [dict()]
    for name, values in ranged:
        grids = [dict(g, **{name: v}) for g in grids for v in values]

    is_armijo = kind == "gd_armijo"
    header = [name for name, _ in ranged] + ["t_sdp", "t_formula"]
    if is_armijo:
        header += ["t_ly", "t_nemi"]

    def solve_point(point: dict) -> tuple[str, list[str]]:
        fclass, alg = _build_spec(fixed, kind, overrides=point)
        problem = build_scenario(fclass, alg, args.metric)
        result = certsearch.solve_rate(certsearch.build_sos_sdp(problem), tol=args.tol)
        if not result.ok:
            return result.solver_status, []
        t_formula = certify.rate_formula(kind, fclass, alg)
        row = [_fmt(float(point[name])) for name, _ in ranged]
        row += [_fmt(result.t), _fmt(float(t_formula))]
        if is_armijo:
            comp = certify.compare_armijo(alg.epsilon, alg.eta, fclass.kappa)
            row.append(_fmt(float(comp.t_ly)) if comp.t_ly is not None else "")
            row.append(_fmt(float(comp.t_nemi)) if comp.t_nemi is not None else "")
        return "optimal", row

    # grid points solve independently; rows stay in grid order regardless
    # of completion order
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=min(4, len(grids))) as pool:
        outcomes = list(pool.map(solve_point, grids))
    rows = []
    for status, row in outcomes:
        if status != "optimal":
            return EXIT_INFEASIBLE if status == "infeasible" else EXIT_NUMERICAL
        rows.append(row)
    if args.format == "json-lines":
        text = "\n".join(json.dumps(dict(zip(header, row)), sort_keys=True) for row in rows)
    else:
        text = ",".join(header) + "\n" + "\n".join(",".join(row) for row in rows)
    _emit(args, text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = _merged_params(args)
    kind = _alg_kind(params)
    fclass, alg = _build_spec(params, kind)
    metric = METRIC_FOR_KIND[kind]
    if kind.startswith("pgm"):
        lam = as_fraction(params.get("lam", "1/2"))
        func = oracle.TestFunction("composite", (fclass.mu, fclass.L), (Fraction(1), Fraction(-1)), lam=lam)
        x0 = (Fraction(3), Fraction(2))
    else:
        func, x0 = oracle.zigzag_quadratic(fclass.mu, fclass.L)
        if kind == "gd_constant":
            func, x0 = oracle.worst_curvature_quadratic(fclass.mu, fclass.L, alg.gamma)
    trace = oracle.run(alg, func, x0, args.steps, seed=args.seed)
    bound = certify.rate_formula(kind, fclass, alg)
    report = oracle.check_against_bound(trace, float(bound), metric)
    problem = build_scenario(fclass, alg)
    audit = oracle.constraint_audit(trace, problem, tol=args.tol if args.tol > 1e-9 else 1e-9)
    lines = [
        f"alg {kind}",
        f"metric {metric}",
        f"steps {trace.steps}",
        f"bound {bound.numerator}/{bound.denominator} = {_fmt(float(bound))}",
        f"max_ratio {_fmt(report.max_ratio) if report.max_ratio is not None else 'n/a'}",
        f"bound_check {'PASS' if report.passed else 'FAIL'}",
        f"constraint_audit {'PASS' if audit.clean else 'FAIL'} ({audit.n_pairs} pairs)",
    ]
    _emit(args, "\n".join(lines))
    if args.trace_csv:
        with open(args.trace_csv, "w") as fh:
            fh.write(oracle.trace_to_csv(trace, metric) + "\n")
    return EXIT_OK if (report.passed and audit.clean) else EXIT_VERIFY


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alg", help="algorithm: " + ", ".join(sorted(ALG_NAMES)))
    p.add_argument("--mu", help="strong convexity modulus (rational, e.g. 1 or 1/2)")
    p.add_argument("--L", dest="L_", help="smoothness constant (rational)")
    p.add_argument("--gamma", help="constant step size")
    p.add_argument("--eps", help="Armijo/Goldstein parameter epsilon")
    p.add_argument("--eta", help="Armijo backtracking factor")
    p.add_argument("--delta", help="relative gradient noise level")
    p.add_argument("--c1", help="Wolfe sufficient-decrease parameter")
    p.add_argument("--c2", help="Wolfe curvature parameter")
    p.add_argument("--kappa", help="condition number (with mu defaulting to 1); ranges as start:stop[:count]")
    p.add_argument("--metric", default=None, help="performance metric (defaults per algorithm)")
    p.add_argument("--config", default=None, help="key = value config file; flags override")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", default=None, help="write output to this path instead of stdout")
    p.add_argument("--format", default="text", choices=("text", "csv", "json-lines"))


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratecert",
        description="Compute, verify, sweep, and simulate one-step contraction factors.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, fn in (("rate", cmd_rate), ("verify", cmd_verify), ("sweep", cmd_sweep), ("simulate", cmd_simulate)):
        p = sub.add_parser(verb)
        _add_common(p)
        if verb == "simulate":
            p.add_argument("--steps", type=int, default=20)
            p.add_argument("--lam", help="ell-1 weight for composite simulations")
            p.add_argument("--trace-csv", default=None, help="also write the trace as CSV here")
        p.set_defaults(func=fn)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScenarioError, certify.CertificateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

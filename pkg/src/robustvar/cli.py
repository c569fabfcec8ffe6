"""Command-line interface: simulate, fit, experiment, diagnose, check-stability.

Exit codes: 0 success, 1 runtime failure, 2 usage error.  Every run that
writes output files also writes a ``.provenance.json`` next to them with the
resolved parameters, seed, and RNG identifier.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from ._seeds import derive_seed
from . import diagnostics as diag
from .experiments import (
    CALIBRATED_C,
    emit_csv,
    run_experiment,
    spec_from_dict,
    write_provenance,
)
from .losses import RobustConfig
from .optimizer import OptimizerConfig
from .penalties import Penalty
from .simulate import (
    ArchVarDgp,
    BekkVarDgp,
    GaussianNoise,
    IntervalPartition,
    RcVarDgp,
    ScaleMixtureNoise,
    SignPartition,
    StudentTNoise,
    ThresholdVarDgp,
    UnivariateArchDgp,
    VarTDgp,
    gen_er_transition,
    simulate,
    write_series_csv,
    read_series_csv,
)
from .svgplot import emit_svg_lines
from .var import (
    FitConfig,
    VarModel,
    companion_matrix,
    fit_var,
    read_var_model_csv,
    spectral_radius,
    theory_lambda,
    write_var_model_csv,
)

RNG_ID = "numpy PCG64; streams derived by splitmix64 over (seed, cell, rep)"


def _noise_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "student_t":
        return StudentTNoise(df=float(d["df"]))
    if kind == "gaussian":
        sd = d.get("sd", 1.0)
        return GaussianNoise(sd=tuple(sd) if isinstance(sd, list) else float(sd))
    if kind == "scale_mixture":
        return ScaleMixtureNoise(components=tuple((float(w), float(s)) for w, s in d["components"]))
    raise ValueError(f"unknown noise kind {kind!r}")


def _partition_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "sign":
        return SignPartition()
    if kind == "interval":
        return IntervalPartition(axis=int(d["axis"]), breakpoints=tuple(d["breakpoints"]))
    raise ValueError(f"unknown partition kind {kind!r}")


def dgp_from_dict(d: dict):
    """Build a process spec from a JSON-compatible dict (see README for schemas)."""
    kind = d.get("kind")
    noise = _noise_from_dict(d["noise"]) if "noise" in d else GaussianNoise(1.0)
    if kind == "var_t":
        coeffs = tuple(np.asarray(c, dtype=np.float64) for c in d["coeffs"])
        return VarTDgp(model=VarModel(coeffs), noise=noise)
    if kind == "arch_var":
        return ArchVarDgp(
            b=np.asarray(d["b"], dtype=np.float64),
            f=tuple(float(v) for v in d["f"]),
            f_mats=tuple(np.asarray(m, dtype=np.float64) for m in d["f_mats"]),
            noise=noise,
        )
    if kind == "univariate_arch":
        return UnivariateArchDgp(
            b=tuple(float(v) for v in d["b"]),
            d0=float(d["d0"]),
            d=tuple(float(v) for v in d["d"]),
            noise=noise,
        )
    if kind == "bekk_var":
        return BekkVarDgp(
            b=np.asarray(d["b"], dtype=np.float64),
            c=np.asarray(d["c"], dtype=np.float64),
            f=np.asarray(d["f"], dtype=np.float64),
            noise=noise,
        )
    if kind == "threshold_var":
        return ThresholdVarDgp(
            models=tuple(np.asarray(m, dtype=np.float64) for m in d["models"]),
            partition=_partition_from_dict(d.get("partition", {"kind": "sign"})),
            noise=noise,
        )
    if kind == "rc_var":
        return RcVarDgp(
            b=np.asarray(d["b"], dtype=np.float64),
            gamma_sd=float(d["gamma_sd"]),
            noise=noise,
        )
    raise ValueError(f"unknown process kind {kind!r}")


def _write_provenance_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_simulate(args) -> int:
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec_doc = json.load(fh)
        dgp = dgp_from_dict(spec_doc)
    else:
        if args.model:
            model = read_var_model_csv(args.model)
        else:
            b = gen_er_transition(args.p, args.density, args.rho, derive_seed(args.seed, 0))
            model = VarModel((b,))
        spec_doc = {
            "kind": "var_t",
            "coeffs": [c.tolist() for c in model.coeffs],
            "noise": {"kind": "student_t", "df": args.df},
        }
        dgp = VarTDgp(model=model, noise=StudentTNoise(args.df))
    data = simulate(dgp, args.n, args.burn_in, derive_seed(args.seed, 1))
    write_series_csv(data, args.out)
    _write_provenance_json(
        args.out + ".provenance.json",
        {"tool": "robustvar simulate", "dgp": spec_doc, "n": args.n,
         "burn_in": args.burn_in, "seed": args.seed, "rng": RNG_ID,
         "outputs": [args.out]},
    )
    print(f"wrote {args.out} ({data.shape[0]} rows, {data.shape[1]} columns)")
    return 0


def _cmd_fit(args) -> int:
    data = read_series_csv(args.input)
    robust = RobustConfig(tau=args.tau, b=args.b, weight_form=args.weight_form)
    fit = FitConfig(
        robust=robust,
        penalty=Penalty("l1"),
        lambda_mode=args.lambda_mode,
        lam=args.lam,
        c=args.c,
        opt=OptimizerConfig(step=args.step, tol=args.tol, max_iter=args.max_iter, seed=args.seed),
    )
    est, results = fit_var(data, args.lag, fit)
    write_var_model_csv(est, args.out)
    n_reg = data.shape[0] - args.lag
    lam = (
        theory_lambda(est.p, args.lag, n_reg, robust, args.c)
        if args.lambda_mode == "theory"
        else args.lam
    )
    _write_provenance_json(
        args.out + ".provenance.json",
        {"tool": "robustvar fit", "input": args.input, "lag": args.lag,
         "tau": args.tau, "b": args.b, "weight_form": args.weight_form,
         "lambda_mode": args.lambda_mode, "lambda": lam, "c": args.c,
         "step": args.step, "tol": args.tol, "max_iter": args.max_iter,
         "seed": args.seed, "rng": RNG_ID, "outputs": [args.out]},
    )
    converged = sum(r.converged for r in results)
    print(
        f"wrote {args.out}: p={est.p} d={est.d} lambda={lam:.6g} "
        f"columns_converged={converged}/{est.p}"
    )
    return 0


def _cmd_experiment(args) -> int:
    with open(args.spec, "r", encoding="utf-8") as fh:
        spec = spec_from_dict(json.load(fh))
    rows = run_experiment(spec, workers=args.workers)
    os.makedirs(spec.output_dir, exist_ok=True)
    base = os.path.join(spec.output_dir, spec.case)
    csv_path, svg_path = base + ".csv", base + ".svg"
    emit_csv(rows, csv_path)
    x_field = "df" if spec.case == "case1_df_sweep" else "n"
    emit_svg_lines(rows, x_field, "tau", svg_path)
    write_provenance(base + ".provenance.json", spec, [csv_path, svg_path])
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def _cmd_diagnose(args) -> int:
    with open(args.spec, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    p = int(doc.get("p", 10))
    n = int(doc.get("n", 30))
    df = float(doc.get("df", 3.0))
    tau = float(doc.get("tau", 1.0))
    b = float(doc.get("b", 3.0))
    reps = int(doc.get("replications", 200))
    seed = int(doc.get("seed", 0))
    density = float(doc.get("density", 0.05))
    rho = float(doc.get("rho_target", 0.5))
    burn_in = int(doc.get("burn_in", 500))
    n_directions = int(doc.get("n_directions", 200))
    include_re = bool(doc.get("include_re", True))
    c = doc.get("c")
    lam_fixed = doc.get("lambda")

    if lam_fixed is not None:
        c_eff = float(lam_fixed) / theory_lambda(p, 1, n - 1, RobustConfig(tau=tau, b=b), 1.0)
    else:
        c_eff = float(c) if c is not None else CALIBRATED_C
    reports = diag.run_deviation_experiment(
        p, n, df, tau, b, c_eff, reps, seed,
        density=density, rho_target=rho, burn_in=burn_in,
        column=int(doc.get("column", 0)), n_directions=n_directions,
        include_re=include_re,
    )
    diag.write_reports_csv(reports, args.out)
    _write_provenance_json(
        args.out + ".provenance.json",
        {"tool": "robustvar diagnose", "spec": doc, "seed": seed,
         "rng": RNG_ID, "outputs": [args.out]},
    )
    rate = sum(r.deviation_pass for r in reports) / len(reports)
    print(f"wrote {args.out}: deviation pass rate {rate:.3f} over {reps} replications")
    return 0


def _cmd_check_stability(args) -> int:
    model = read_var_model_csv(args.model)
    radius = spectral_radius(companion_matrix(model))
    stable = radius < 1.0
    print(f"p={model.p} d={model.d} spectral_radius={radius:.10g} stable={str(stable).lower()}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustvar",
        description="Robust sparse VAR estimation under heavy-tailed noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="generate a heavy-tailed VAR path as CSV")
    ps.add_argument("--spec", help="JSON process spec (overrides the quick flags)")
    ps.add_argument("--model", help="varmodel CSV to simulate from")
    ps.add_argument("--p", type=int, default=10)
    ps.add_argument("--df", type=float, default=3.0)
    ps.add_argument("--density", type=float, default=0.05)
    ps.add_argument("--rho", type=float, default=0.5)
    ps.add_argument("--n", type=int, required=True)
    ps.add_argument("--burn-in", type=int, default=500, dest="burn_in")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", required=True)
    ps.set_defaults(func=_cmd_simulate)

    pf = sub.add_parser("fit", help="estimate a transition matrix from a series CSV")
    pf.add_argument("--input", required=True)
    pf.add_argument("--lag", type=int, default=1)
    pf.add_argument("--tau", type=float, required=True)
    pf.add_argument("--b", type=float, default=3.0)
    pf.add_argument("--weight-form", default="linear", choices=["linear", "quadratic"],
                    dest="weight_form")
    pf.add_argument("--lambda-mode", default="theory", choices=["theory", "explicit"],
                    dest="lambda_mode")
    pf.add_argument("--c", type=float, default=1.0)
    pf.add_argument("--lambda", type=float, default=0.0, dest="lam")
    pf.add_argument("--step", type=float, default=0.9)
    pf.add_argument("--tol", type=float, default=1e-4)
    pf.add_argument("--max-iter", type=int, default=10000, dest="max_iter")
    pf.add_argument("--seed", type=int, default=0)
    pf.add_argument("--out", default="bhat.csv")
    pf.set_defaults(func=_cmd_fit)

    pe = sub.add_parser("experiment", help="run a replicated sweep from a JSON spec")
    pe.add_argument("--spec", required=True)
    pe.add_argument("--workers", type=int, default=None)
    pe.set_defaults(func=_cmd_experiment)

    pd = sub.add_parser("diagnose", help="deviation/curvature diagnostics from a JSON spec")
    pd.add_argument("--spec", required=True)
    pd.add_argument("--out", default="diagnostics.csv")
    pd.set_defaults(func=_cmd_diagnose)

    pc = sub.add_parser("check-stability", help="report the companion spectral radius")
    pc.add_argument("--model", required=True)
    pc.set_defaults(func=_cmd_check_stability)
    return parser


def cli_main(argv=None) -> int:
    """Entry point returning an exit code instead of raising SystemExit."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

"""Command line entry point: roots, certify, sample, experiment, selftest.

Exit codes: 0 success with every certificate satisfied, 1 certificate
violation or solver failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, bounds
from .counting import count_annulus, count_sector
from .errors import UnitclustError
from .experiments import ExperimentConfig, default_workers, emit_report, exhaustive_expectation, run_experiment
from .poly import Polynomial, make_polynomial, pairs_to_coeffs
from .rootfind import SolveOptions, find_roots
from .samplers import _VARIANT_NAMES, model_from_dict, model_to_dict, sample_polynomial

log = logging.getLogger("unitclust")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
MODEL_NAMES = sorted(_VARIANT_NAMES.values())


class UsageError(Exception):
    pass


def parse_rho_grid(text: str) -> list[float]:
    """``"0.01:0.5:0.01"`` (inclusive range) or ``"0.1,0.2,0.3"``."""
    try:
        if ":" in text:
            lo, hi, step = (float(x) for x in text.split(":"))
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            grid = [round(lo + i * step, 12) for i in range(count)]
        else:
            grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rho grid {text!r}") from None
    if not grid or not all(0.0 < r < 1.0 for r in grid):
        raise argparse.ArgumentTypeError("rho values must lie in (0, 1)")
    return grid


def parse_et_constant(text: str) -> float:
    if text in bounds.ET_CONSTANTS:
        return bounds.ET_CONSTANTS[text]
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a number or one of {sorted(bounds.ET_CONSTANTS)}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("constant must be positive")
    return value


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--max-iterations", type=int, default=SolveOptions.max_iterations)
    g.add_argument("--residual-tol", type=float, default=SolveOptions.residual_tol)
    g.add_argument("--seed-radius-mode", choices=["cauchy-bound", "geometric-mean"],
                   default=SolveOptions.seed_radius_mode)
    g.add_argument("--perturbation-seed", type=int, default=0)


def _add_model_flags(p: argparse.ArgumentParser, required: bool) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--model", required=required,
                   help=f"one of {', '.join(MODEL_NAMES)}, inline JSON, or @file.json")
    g.add_argument("--p", type=float, default=None, help="rademacher probability of +1")
    g.add_argument("--sigma", type=float, default=None, help="positive_cauchy exponent")
    g.add_argument("--dist", default=None, help="iid_generic distribution name")


def _solve_options(args) -> SolveOptions:
    try:
        return SolveOptions(args.max_iterations, args.residual_tol, args.seed_radius_mode,
                            args.perturbation_seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _model(args):
    text = args.model
    if text.startswith("@"):
        spec = json.loads(Path(text[1:]).read_text())
    elif text.lstrip().startswith("{"):
        spec = json.loads(text)
    else:
        spec = {"variant": text}
        if args.p is not None:
            spec["p"] = args.p
        if args.sigma is not None:
            spec["sigma"] = args.sigma
        if args.dist is not None:
            spec["dist"] = args.dist
    return model_from_dict(spec)


def _read_polynomial(source: str) -> Polynomial:
    text = sys.stdin.read() if source == "-" else Path(source).read_text()
    try:
        return make_polynomial(pairs_to_coeffs(json.loads(text)))
    except (json.JSONDecodeError, TypeError) as exc:
        raise UsageError(f"cannot parse polynomial JSON: {exc}") from None


def _out_dir(args) -> Path | None:
    if getattr(args, "out_dir", None) is None:
        return None
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_roots(args) -> int:
    p = _read_polynomial(args.input)
    rs = find_roots(p, _solve_options(args))
    text = rs.to_json()
    out = _out_dir(args)
    if out:
        (out / "roots.json").write_text(text + "\n")
    print(text)
    return EXIT_OK if rs.converged else EXIT_VIOLATION


def cmd_sample(args) -> int:
    p = sample_polynomial(_model(args), args.n, args.seed, args.trial)
    text = p.to_json()
    out = _out_dir(args)
    if out:
        (out / "polynomial.json").write_text(text + "\n")
    print(text)
    return EXIT_OK


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_certify(args) -> int:
    if args.input is not None:
        p = _read_polynomial(args.input)
    elif args.model is not None:
        if args.n is None:
            raise UsageError("--model needs --n")
        p = sample_polynomial(_model(args), args.n, args.seed, args.trial)
    else:
        raise UsageError("give --input or --model")
    rs = find_roots(p, _solve_options(args))
    if not rs.converged:
        log.error("root solver did not converge (max residual %.3e); refusing to certify",
                  float(np.max(rs.residuals)))
        return EXIT_VIOLATION
    b = bounds.certify_all(p, rs, args.rho_grid, args.sector_grid, args.et_constant, args.jensen_nodes)
    bundle = b.to_dict()
    bundle["degree"] = p.degree
    bundle["et_constant"] = args.et_constant
    text = json.dumps(bundle)
    out = _out_dir(args)
    if out:
        (out / "certificate.json").write_text(text + "\n")
        (out / "certificate_summary.csv").write_text(_csv_text(
            ["degree", "L_N", "annulus_ok", "sector_ok", "minorization_ok", "max_sector_discrepancy",
             "jensen_residual", "jensen_warning", "max_residual", "satisfied"],
            [[p.degree, b.log_height.value, all(c.satisfied for c in b.annulus),
              all(d.satisfied for d in b.sectors), b.minorization_ok, b.max_sector_discrepancy,
              b.jensen_residual, b.jensen_warning, b.max_residual, b.satisfied]]))
        annulus = [count_annulus(rs, r) for r in args.rho_grid]
        (out / "annulus_counts.csv").write_text(_csv_text(
            ["rho", "inner", "annulus", "outer"], [[c.rho, c.inner, c.annulus, c.outer] for c in annulus]))
        sectors = [count_sector(rs, t, f) for t, f in bounds.sector_pairs(args.sector_grid)]
        (out / "sector_counts.csv").write_text(_csv_text(
            ["theta", "phi", "count"], [[c.theta, c.phi, c.count] for c in sectors]))
    print(text)
    if not b.satisfied:
        log.error("certificate violated: the computed roots are inconsistent with the bounds")
        return EXIT_VIOLATION
    return EXIT_OK


def _experiment_config(args) -> ExperimentConfig:
    if args.config:
        cfg_dict = json.loads(Path(args.config).read_text())
    else:
        if not args.model:
            raise UsageError("give --config or --model")
        cfg_dict = {}
    if args.model:
        cfg_dict["model"] = model_to_dict(_model(args))
    overrides = {
        "degrees": args.degrees, "trials": args.trials, "alpha_schedule": args.alpha,
        "seed": args.seed, "workers": args.workers, "rho": args.rho, "sector_grid": args.sector_grid,
        "et_constant": args.et_constant, "jensen_nodes": args.jensen_nodes,
    }
    cfg_dict.update({k: v for k, v in overrides.items() if v is not None})
    cfg_dict.setdefault("workers", default_workers())
    try:
        return ExperimentConfig.from_dict(cfg_dict)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad experiment config: {exc}") from None


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    res = run_experiment(cfg)
    out = _out_dir(args)
    emit_report(res, out)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
    for d in res.degrees:
        log.info("N=%d alpha=%.3f mean_deficit=%.4f bound=%.4f pass_rate=%.3f unconverged=%d",
                 d.degree, d.alpha, d.mean_deficit, d.certified_bound, d.pass_rate, d.unconverged)
    if res.pass_rate < 1.0:
        log.error("certificate pass rate %.4f < 1 on converged trials", res.pass_rate)
        return EXIT_VIOLATION
    return EXIT_OK


# ------------------------------------------------------------------ selftest

# Exact E[nu(0.1)]/N and E[nu(0.5, 2.5)]/N over the 512 sign polynomials of degree 8;
# reproduced independently with companion-matrix eigenvalues.
SELFTEST_ENUM_ANNULUS = Fraction(175, 512)
SELFTEST_ENUM_SECTOR = Fraction(153, 512)


def selftest_fixtures(solve: SolveOptions):
    def unity():
        n = 64
        c = np.zeros(n + 1)
        c[0], c[-1] = -1.0, 1.0
        rs = find_roots(make_polynomial(c), solve)
        exact = np.exp(2j * np.pi * np.arange(n) / n)
        err = max(float(np.min(np.abs(exact - z))) for z in rs.roots)
        return err < 1e-12, f"max error {err:.2e}"

    def quadratic():
        rs = find_roots(make_polynomial([1, -3, 2]), solve)
        got = np.sort_complex(rs.roots)
        err = float(np.max(np.abs(got - np.array([0.5, 1.0]))))
        return err < 1e-12, f"max error {err:.2e}"

    def jensen_inside():
        p = make_polynomial([-1, 0, 4])
        r = bounds.jensen_residual(p, find_roots(p, solve), 4096)
        return r < 1e-8, f"residual {r:.2e}"

    def jensen_outside():
        p = make_polynomial([6, -5, 1])
        r = bounds.jensen_residual(p, find_roots(p, solve), 4096)
        return r < 1e-8, f"residual {r:.2e}"

    def annulus_certificate():
        c = np.zeros(65)
        c[0], c[-1] = -1.0, 1.0
        p = make_polynomial(c)
        rs = find_roots(p, solve)
        if not rs.converged:
            return False, "unconverged"
        cert = bounds.certify_annulus(p, rs, 0.1)
        return cert.satisfied and cert.lhs_total == 0.0, f"rhs_total {cert.rhs_total:.4f}"

    def enumeration():
        full = exhaustive_expectation(8, 0.1, 0.0, 2 * math.pi, solve)
        e = exhaustive_expectation(8, 0.1, 0.5, 2.5, solve)
        ok = (full.sector_fraction == 1 and e.annulus_fraction == SELFTEST_ENUM_ANNULUS
              and e.sector_fraction == SELFTEST_ENUM_SECTOR)
        return ok, f"E[nu(0.1)]/N = {e.annulus_fraction}, E[nu(0.5,2.5)]/N = {e.sector_fraction}"

    return [("roots_of_unity_64", unity), ("quadratic_oracle", quadratic),
            ("jensen_roots_inside", jensen_inside), ("jensen_roots_outside", jensen_outside),
            ("annulus_certificate_unity", annulus_certificate), ("enumeration_n8", enumeration)]


def selftest(solve: SolveOptions | None = None, stream=None) -> int:
    stream = stream or sys.stdout
    solve = solve or SolveOptions()
    failed = 0
    for name, fixture in selftest_fixtures(solve):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                ok, detail = fixture()
            except UnitclustError as exc:
                ok, detail = False, f"{type(exc).__name__}: {exc}"
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name:<28} {detail}", file=stream)
    print(f"{'all fixtures passed' if not failed else f'{failed} fixture(s) failed'}", file=stream)
    return EXIT_OK if not failed else EXIT_VIOLATION


def cmd_selftest(args) -> int:
    return selftest(_solve_options(args))


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unitclust", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"unitclust {__version__}")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roots", help="compute all zeros of a polynomial")
    p.add_argument("--input", required=True, help="polynomial JSON file, or - for stdin")
    p.add_argument("--out-dir")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("certify", help="certify the clustering inequalities on one polynomial")
    p.add_argument("--input", help="polynomial JSON file, or - for stdin")
    _add_model_flags(p, required=False)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--rho-grid", type=parse_rho_grid, default=bounds.default_rho_grid())
    p.add_argument("--sector-grid", type=int, default=12)
    p.add_argument("--et-constant", type=parse_et_constant, default=bounds.DEFAULT_ET_CONSTANT)
    p.add_argument("--jensen-nodes", type=int, default=bounds.DEFAULT_JENSEN_NODES)
    p.add_argument("--out-dir")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("sample", help="draw one polynomial from a coefficient model")
    _add_model_flags(p, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("experiment", help="run a Monte Carlo clustering experiment")
    p.add_argument("--config", help="ExperimentConfig JSON file")
    _add_model_flags(p, required=False)
    p.add_argument("--degrees", type=int, nargs="+")
    p.add_argument("--trials", type=int)
    p.add_argument("--alpha", choices=["log_squared", "sqrt_height", "fixed_rho"])
    p.add_argument("--rho", type=float, help="annulus width for --alpha fixed_rho")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--sector-grid", type=int)
    p.add_argument("--et-constant", type=parse_et_constant)
    p.add_argument("--jensen-nodes", type=int)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("selftest", help="run the embedded fixture suite")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, UnitclustError, ValueError, OSError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

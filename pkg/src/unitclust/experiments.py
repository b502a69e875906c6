"""Monte Carlo harness: sample -> solve -> count -> certify, aggregated per degree.

Trials are independent tasks. Each returns a record keyed by its trial
index and the records are aggregated in index order, so results do not
depend on the worker count.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from . import bounds
from .counting import TWO_PI, annulus_counts_from_moduli, arguments, check_sector, sector_histogram
from .errors import BadSchedule, DegreeTooLargeForEnumeration, DidNotConverge, UnconvergedRoots
from .poly import make_polynomial
from .rootfind import SolveOptions, find_roots
from .samplers import Rademacher, model_from_dict, model_to_dict, sample_polynomial

SCHEDULES = ("log_squared", "sqrt_height", "fixed_rho")
MODULUS_EDGES = tuple(np.round(np.linspace(0.0, 2.0, 41), 10)) + (math.inf,)
WORKERS_ENV = "UNITCLUST_WORKERS"


def alpha_of(schedule: str, n: int, mean_height: float | None = None, rho: float | None = None) -> float:
    """Annulus width multiplier alpha_N; the counted annulus uses rho = alpha_N / N."""
    if n < 2:
        raise BadSchedule(f"need N >= 2, got {n}")
    if schedule == "log_squared":
        return min(float(n), math.log(n) ** 2)
    if schedule == "sqrt_height":
        if mean_height is None or not mean_height >= math.log(2.0) - 1e-12:
            raise BadSchedule("sqrt_height needs mean_height >= log 2")
        return n * min(1.0, math.sqrt(mean_height / n))
    if schedule == "fixed_rho":
        if rho is None or not 0.0 < rho < 1.0:
            raise BadSchedule("fixed_rho needs 0 < rho < 1")
        return rho * n
    raise BadSchedule(f"unknown schedule {schedule!r}")


@dataclass
class ExperimentConfig:
    model: object = field(default_factory=Rademacher)
    degrees: tuple[int, ...] = (100,)
    trials: int = 100
    alpha_schedule: str = "log_squared"
    rho: float = 0.1
    sector_grid: int = 8
    et_grid: int = 12
    et_constant: float = bounds.DEFAULT_ET_CONSTANT
    seed: int = 0
    jensen_nodes: int = bounds.DEFAULT_JENSEN_NODES
    workers: int = 1
    rho_grid: tuple[float, ...] = tuple(bounds.default_rho_grid())
    markov_eps: tuple[float, ...] = (0.05, 0.1, 0.2, 0.3, 0.5)
    solve: SolveOptions = field(default_factory=SolveOptions)

    def __post_init__(self):
        self.degrees = tuple(int(d) for d in self.degrees)
        if not self.degrees or min(self.degrees) < 2:
            raise ValueError("degrees must be nonempty and >= 2")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.alpha_schedule not in SCHEDULES:
            raise BadSchedule(f"unknown schedule {self.alpha_schedule!r}")
        if self.alpha_schedule == "fixed_rho":
            alpha_of("fixed_rho", 2, rho=self.rho)
        if self.sector_grid < 1 or self.et_grid < 1:
            raise ValueError("sector grids must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = model_to_dict(self.model)
        d["solve"] = asdict(self.solve)
        d["degrees"] = list(self.degrees)
        d["rho_grid"] = list(self.rho_grid)
        d["markov_eps"] = list(self.markov_eps)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "model" in d:
            d["model"] = model_from_dict(d["model"])
        if "solve" in d:
            d["solve"] = SolveOptions(**d["solve"])
        for key in ("degrees", "rho_grid", "markov_eps"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass
class DegreeRecord:
    degree: int
    trials: int
    converged: int
    unconverged: int
    alpha: float
    rho: float
    mean_LN: float
    mean_LN_over_N: float
    std_LN_over_N: float
    mean_nu_frac: float
    mean_deficit: float
    max_deficit: float
    certified_bound: float
    sector_disc_mean: float
    sector_disc_max: float
    pass_rate: float
    jensen_max: float
    sector_freq: list = field(default_factory=list)
    annulus_curve: list = field(default_factory=list)
    markov: list = field(default_factory=list)
    hist_modulus: list = field(default_factory=list)
    hist_arg: list = field(default_factory=list)


SUMMARY_COLUMNS = [
    "degree", "trials", "converged", "unconverged", "alpha", "rho", "mean_LN",
    "mean_LN_over_N", "std_LN_over_N", "mean_nu_frac", "mean_deficit", "max_deficit",
    "certified_bound", "sector_disc_mean", "sector_disc_max", "pass_rate", "jensen_max",
]


@dataclass
class ExperimentResult:
    config: ExperimentConfig | None
    degrees: list[DegreeRecord] = field(default_factory=list)
    trials: list[dict] = field(default_factory=list)
    sample_roots: dict = field(default_factory=dict)

    @property
    def pass_rate(self) -> float:
        ok = [t["certified"] for t in self.trials if t["converged"]]
        return 1.0 if not ok else sum(ok) / len(ok)

    @property
    def failures(self) -> int:
        return sum(not t["converged"] for t in self.trials)


def _trial_task(args):
    cfg, n, trial, sampler = args
    if sampler is None:
        p = sample_polynomial(cfg.model, n, cfg.seed, trial)
    else:
        p = sampler(n, trial)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DidNotConverge)
        rs = find_roots(p, cfg.solve)
    rec = {
        "degree": n,
        "trial": trial,
        "key": [cfg.seed, n, trial],
        "L_N": bounds.log_height(p).value,
        "converged": rs.converged,
        "iterations": rs.iterations,
        "max_residual": float(np.max(rs.residuals)),
    }
    if rs.converged:
        b = bounds.certify_all(p, rs, cfg.rho_grid, cfg.et_grid, cfg.et_constant, cfg.jensen_nodes)
        moduli = np.abs(rs.roots)
        rec.update(
            certified=b.satisfied,
            annulus_ok=all(c.satisfied for c in b.annulus),
            sector_ok=all(d.satisfied for d in b.sectors),
            minorization_ok=b.minorization_ok,
            sector_disc_sup=b.max_sector_discrepancy,
            jensen_residual=b.jensen_residual,
            jensen_warning=b.jensen_warning,
            annulus_grid=[annulus_counts_from_moduli(moduli, r)[2] for r in cfg.rho_grid],
            sector_counts=[int(c) for c in sector_histogram(rs, cfg.sector_grid)],
        )
    else:
        rec.update(certified=False)
    return rec, (rs.roots if rs.converged else None)


def _counts_at(moduli: np.ndarray, rho: float) -> tuple[int, int, int]:
    # rho >= 1: the closed annulus [0, inf] holds every root
    if rho >= 1.0:
        return 0, 0, len(moduli)
    return annulus_counts_from_moduli(moduli, rho)


def _mean(xs) -> float:
    return float(np.mean(xs)) if len(xs) else float("nan")


def _aggregate(cfg: ExperimentConfig, n: int, records: list[dict], roots: list) -> DegreeRecord:
    heights = np.array([r["L_N"] for r in records])
    alpha = alpha_of(cfg.alpha_schedule, n, mean_height=float(heights.mean()), rho=cfg.rho)
    rho = alpha / n
    good = [(r, z) for r, z in zip(records, roots) if r["converged"]]
    deficits = []
    for r, z in good:
        inner, outer, annulus = _counts_at(np.abs(z), rho)
        r.update(rho=rho, alpha=alpha, inner=inner, outer=outer, annulus=annulus,
                 deficit=1.0 - annulus / n, trial_bound=2.0 * r["L_N"] / alpha)
        deficits.append(1.0 - annulus / n)
    deficits = np.array(deficits)
    good_heights = np.array([r["L_N"] for r, _ in good])
    bound = 2.0 * _mean(good_heights) / alpha
    markov = []
    for eps in cfg.markov_eps:
        emp = _mean(deficits > eps)
        se = math.sqrt(emp * (1.0 - emp) / len(deficits)) if len(deficits) else float("nan")
        markov.append({"eps": eps, "empirical": emp, "bound": bound / eps, "se": se})
    m = cfg.sector_grid
    sector_freq = (np.sum([r["sector_counts"] for r, _ in good], axis=0) / (n * len(good))).tolist() \
        if good else [float("nan")] * m
    curve = (np.sum([r["annulus_grid"] for r, _ in good], axis=0) / (n * len(good))).tolist() \
        if good else []
    all_roots = np.concatenate([z for _, z in good]) if good else np.zeros(0, complex)
    hist_mod = np.histogram(np.abs(all_roots), bins=np.array(MODULUS_EDGES))[0].tolist()
    hist_arg = sector_histogram(all_roots, m).tolist()
    jensen_clean = [r["jensen_residual"] for r, _ in good if not r["jensen_warning"]]
    return DegreeRecord(
        degree=n,
        trials=len(records),
        converged=len(good),
        unconverged=len(records) - len(good),
        alpha=alpha,
        rho=rho,
        mean_LN=float(heights.mean()),
        mean_LN_over_N=float(heights.mean() / n),
        std_LN_over_N=float(heights.std() / n),
        mean_nu_frac=1.0 - _mean(deficits),
        mean_deficit=_mean(deficits),
        max_deficit=float(deficits.max()) if len(deficits) else float("nan"),
        certified_bound=bound,
        sector_disc_mean=_mean([r["sector_disc_sup"] for r, _ in good]),
        sector_disc_max=max((r["sector_disc_sup"] for r, _ in good), default=float("nan")),
        pass_rate=_mean([r["certified"] for r, _ in good]) if good else 1.0,
        jensen_max=max(jensen_clean, default=float("nan")),
        sector_freq=sector_freq,
        annulus_curve=curve,
        markov=markov,
        hist_modulus=hist_mod,
        hist_arg=hist_arg,
    )


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def run_experiment(cfg: ExperimentConfig, sampler: Callable | None = None) -> ExperimentResult:
    """Run every (degree, trial) task and aggregate per degree.

    ``sampler(n, trial) -> Polynomial`` replaces the configured model; it must
    be picklable when ``cfg.workers > 1``.
    """
    tasks = [(cfg, n, t, sampler) for n in cfg.degrees for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outputs = list(pool.map(_trial_task, tasks, chunksize=max(1, cfg.trials // (4 * cfg.workers))))
    else:
        outputs = [_trial_task(t) for t in tasks]
    result = ExperimentResult(cfg)
    for n in cfg.degrees:
        block = [o for o in outputs if o[0]["degree"] == n]
        records = [o[0] for o in block]
        roots = [o[1] for o in block]
        result.degrees.append(_aggregate(cfg, n, records, roots))
        result.trials.extend(records)
        first = next((z for z in roots if z is not None), None)
        if first is not None:
            result.sample_roots[n] = first
    return result


# ------------------------------------------------------------------ oracles


class CountExpectation(NamedTuple):
    annulus_fraction: Fraction | float
    sector_fraction: Fraction | float
    samples: int
    annulus_se: float = 0.0
    sector_se: float = 0.0


def _fractions_for(coeffs, rho, theta, phi, solve):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DidNotConverge)
        rs = find_roots(make_polynomial(coeffs), solve)
    if not rs.converged:
        raise UnconvergedRoots(f"solver failed on {list(coeffs)}")
    annulus = annulus_counts_from_moduli(np.abs(rs.roots), rho)[2]
    a = arguments(rs.roots)
    sector = int(np.count_nonzero((a >= theta) & (a < phi)))
    return annulus, sector


def exhaustive_expectation(n: int, rho: float, theta: float, phi: float,
                           solve: SolveOptions | None = None) -> CountExpectation:
    """Exact E[nu(rho)]/N and E[nu(theta, phi)]/N over all 2^(N+1) sign vectors."""
    if n > 12:
        raise DegreeTooLargeForEnumeration(f"N = {n} exceeds the enumeration limit 12")
    bounds.check_rho(rho)
    check_sector(theta, phi)
    solve = solve or SolveOptions()
    tot_a = tot_s = 0
    count = 0
    for signs in itertools.product((1.0, -1.0), repeat=n + 1):
        a, s = _fractions_for(signs, rho, theta, phi, solve)
        tot_a += a
        tot_s += s
        count += 1
    return CountExpectation(Fraction(tot_a, count * n), Fraction(tot_s, count * n), count)


def monte_carlo_expectation(model, n: int, trials: int, seed: int, rho: float, theta: float,
                            phi: float, solve: SolveOptions | None = None) -> CountExpectation:
    """Sample means of nu(rho)/N and nu(theta, phi)/N with standard errors."""
    bounds.check_rho(rho)
    check_sector(theta, phi)
    solve = solve or SolveOptions()
    fa, fs = [], []
    for t in range(trials):
        p = sample_polynomial(model, n, seed, t)
        a, s = _fractions_for(p.coeffs, rho, theta, phi, solve)
        fa.append(a / n)
        fs.append(s / n)
    fa, fs = np.array(fa), np.array(fs)
    return CountExpectation(float(fa.mean()), float(fs.mean()), trials,
                            float(fa.std(ddof=1) / math.sqrt(trials)),
                            float(fs.std(ddof=1) / math.sqrt(trials)))


# ------------------------------------------------------------------ reports


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def trial_jsonl(res: ExperimentResult) -> str:
    return "".join(json.dumps(t, sort_keys=True) + "\n" for t in res.trials)


def roots_svg(roots: np.ndarray, rho: float | None, size: int = 480) -> str:
    """Static scatter of roots with the unit circle and the counted annulus."""
    roots = np.asarray(roots)
    extent = max(1.6, float(np.max(np.abs(roots))) * 1.05 if len(roots) else 1.6)
    if rho is not None and rho < 1.0:
        extent = max(extent, min(1.05 / (1.0 - rho), 4.0))
    scale = size / (2.0 * extent)
    c = size / 2.0

    def xy(z):
        return c + z.real * scale, c - z.imag * scale

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>',
             f'<circle class="unit" cx="{c}" cy="{c}" r="{scale:.4f}" fill="none" stroke="#888" stroke-dasharray="4 3"/>']
    if rho is not None and rho < 1.0:
        for r in (1.0 - rho, 1.0 / (1.0 - rho)):
            parts.append(f'<circle class="annulus" cx="{c}" cy="{c}" r="{r * scale:.4f}" '
                         f'fill="none" stroke="#2a6fdb"/>')
    for z in roots:
        x, y = xy(z)
        parts.append(f'<circle class="root" cx="{x:.3f}" cy="{y:.3f}" r="1.8" fill="#c0392b"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_report(res: ExperimentResult, path) -> dict[str, Path]:
    """Write summary.csv, trials.jsonl, markov.csv, clustering_curve.csv,
    hist_modulus.csv, hist_arg.csv and (if any trial converged) roots_sample.svg."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    files["summary"] = out / "summary.csv"
    _write_csv(files["summary"], SUMMARY_COLUMNS,
               ([getattr(d, c) for c in SUMMARY_COLUMNS] for d in res.degrees))
    files["trials"] = out / "trials.jsonl"
    files["trials"].write_text(trial_jsonl(res))
    files["markov"] = out / "markov.csv"
    _write_csv(files["markov"], ["degree", "eps", "empirical", "bound", "se"],
               ([d.degree, m["eps"], m["empirical"], m["bound"], m["se"]] for d in res.degrees for m in d.markov))
    files["clustering_curve"] = out / "clustering_curve.csv"
    rho_grid = res.config.rho_grid if res.config else ()
    _write_csv(files["clustering_curve"], ["degree", "rho", "mean_nu_frac"],
               ([d.degree, r, v] for d in res.degrees for r, v in zip(rho_grid, d.annulus_curve)))
    files["hist_modulus"] = out / "hist_modulus.csv"
    _write_csv(files["hist_modulus"], ["degree", "bin_lo", "bin_hi", "count", "mass"],
               ([d.degree, MODULUS_EDGES[i], MODULUS_EDGES[i + 1], c, c / max(1, sum(d.hist_modulus))]
                for d in res.degrees for i, c in enumerate(d.hist_modulus)))
    files["hist_arg"] = out / "hist_arg.csv"
    _write_csv(files["hist_arg"], ["degree", "bin_lo", "bin_hi", "count", "mass"],
               ([d.degree, TWO_PI * i / len(d.hist_arg), TWO_PI * (i + 1) / len(d.hist_arg), c,
                 c / max(1, sum(d.hist_arg))]
                for d in res.degrees for i, c in enumerate(d.hist_arg)))
    if res.sample_roots:
        n = max(res.sample_roots)
        rho = next((d.rho for d in res.degrees if d.degree == n), None)
        files["svg"] = out / "roots_sample.svg"
        files["svg"].write_text(roots_svg(res.sample_roots[n], rho))
    return files

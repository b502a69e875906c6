"""Simultaneous computation of all zeros by Aberth-Ehrlich iteration.

Each sweep updates the roots in place (Gauss-Seidel ordering). Outside the
unit disc the polynomial is evaluated through its reversal ``Q(y) = y^N P(1/y)``
at ``y = 1/z``, so no power of ``|z| > 1`` is ever formed and high degrees do
not overflow. Coefficients are pre-scaled by ``1 / max|a_k|``, which leaves the
zeros unchanged.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numba
import numpy as np

from .errors import DidNotConverge, MismatchedDegree, NonFiniteCoefficient
from .poly import Polynomial, coeffs_to_pairs, pairs_to_coeffs

# Angular offset of the starting circle; any irrational multiple of 2*pi works.
_ANGLE_OFFSET = 0.5 * (math.sqrt(5.0) - 1.0)
# Largest coefficient magnitude ratio the solver accepts after pre-scaling.
_MAX_DYNAMIC_RANGE = 1e300


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 200
    residual_tol: float = 1e-10
    seed_radius_mode: Literal["cauchy-bound", "geometric-mean"] = "geometric-mean"
    perturbation_seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.seed_radius_mode not in ("cauchy-bound", "geometric-mean"):
            raise ValueError(f"unknown seed_radius_mode {self.seed_radius_mode!r}")


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: bool
    residual_tol: float = field(default=1e-10, compare=False)

    @property
    def degree(self) -> int:
        return len(self.roots)

    def to_dict(self) -> dict:
        return {
            "roots": coeffs_to_pairs(self.roots),
            "residuals": [float(r) for r in self.residuals],
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "RootSet":
        return cls(
            roots=pairs_to_coeffs(d["roots"]),
            residuals=np.asarray(d["residuals"], dtype=float),
            iterations=int(d.get("iterations", 0)),
            converged=bool(d["converged"]),
        )


@numba.njit(cache=True)
def _horner_ratio(c, z):
    """Return P/P' at z for ascending coeffs c (inf at a stationary point)."""
    n = c.shape[0] - 1
    if abs(z) <= 1.0:
        p = c[n]
        dp = 0.0 + 0.0j
        for k in range(n - 1, -1, -1):
            dp = dp * z + p
            p = p * z + c[k]
        if p == 0:
            return 0.0 + 0.0j
        if dp == 0:
            return complex(np.inf)
        return p / dp
    y = 1.0 / z
    q = c[0]
    dq = 0.0 + 0.0j
    for k in range(1, n + 1):
        dq = dq * y + q
        q = q * y + c[k]
    if q == 0:
        return 0.0 + 0.0j
    # P'/P = y (N - y Q'/Q)
    denom = y * (n - y * dq / q)
    if denom == 0:
        return complex(np.inf)
    return 1.0 / denom


@numba.njit(cache=True)
def _aberth(c, z, max_iterations):
    # A root is frozen only once its correction stalls at rounding level. Freezing
    # on a small residual instead lets roots of badly scaled polynomials stop far
    # from their limit and then repel their still-moving neighbours.
    n = z.shape[0]
    tiny = 2.0 * 2.220446049250313e-16
    done = np.zeros(n, dtype=np.bool_)
    it = 0
    while it < max_iterations:
        it += 1
        active = 0
        for i in range(n):
            if done[i]:
                continue
            w = _horner_ratio(c, z[i])
            if w == 0:
                done[i] = True
                continue
            active += 1
            s = 0.0 + 0.0j
            zi = z[i]
            for j in range(n):
                if j != i:
                    d = zi - z[j]
                    if d != 0:
                        s += 1.0 / d
            if not np.isfinite(w.real) or not np.isfinite(w.imag):
                # stationary point of P: nudge off it
                z[i] = zi * (1.0 + 1e-7) + 1e-7
                continue
            den = 1.0 - w * s
            step = w if den == 0 else w / den
            z[i] = zi - step
            if abs(step) <= tiny * abs(z[i]):
                done[i] = True
        if active == 0:
            break
    return it


def _initial_guesses(c: np.ndarray, opts: SolveOptions) -> np.ndarray:
    n = len(c) - 1
    absc = np.abs(c)
    if opts.seed_radius_mode == "geometric-mean":
        radius = math.exp((math.log(absc[0]) - math.log(absc[-1])) / n)
    else:
        radius = 1.0 + float(np.max(absc[:-1]) / absc[-1])
    rng = np.random.default_rng(opts.perturbation_seed)
    jitter = 1.0 + 1e-2 * (rng.random(n) - 0.5)
    angles = 2.0 * np.pi * np.arange(n) / n + _ANGLE_OFFSET
    return radius * jitter * np.exp(1j * angles)


def _normalized(p: Polynomial) -> np.ndarray:
    c = np.asarray(p.coeffs, dtype=np.complex128)
    if not np.all(np.isfinite(c)):
        raise NonFiniteCoefficient("coefficients must be finite")
    absc = np.abs(c)
    top = absc.max()
    if math.log(top) - math.log(absc[absc > 0].min()) > math.log(_MAX_DYNAMIC_RANGE):
        raise NonFiniteCoefficient("coefficient dynamic range exceeds double precision")
    return c / top


def find_roots(p: Polynomial, opts: SolveOptions | None = None) -> RootSet:
    """All N zeros of ``p`` with per-root normalized residuals.

    On failure the best iterate is returned with ``converged=False`` and a
    :class:`DidNotConverge` warning is issued.
    """
    opts = opts or SolveOptions()
    c = _normalized(p)
    n = p.degree
    if n == 1:
        z = np.array([-c[0] / c[1]])
        iterations = 0
    else:
        z = _initial_guesses(c, opts)
        iterations = int(_aberth(c, z, opts.max_iterations))
    residuals = _residuals(c, z)
    converged = bool(np.all(residuals <= opts.residual_tol))
    if not converged:
        warnings.warn(
            f"root solver did not converge for degree {n} "
            f"(max residual {float(np.max(residuals)):.3e})",
            DidNotConverge,
            stacklevel=2,
        )
    return RootSet(z, residuals, iterations, converged, opts.residual_tol)


def _residuals(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    # |P(z)| / (l1 * max(1,|z|)^N): outside the disc this is |Q(1/z)| / l1.
    z = np.asarray(z, dtype=np.complex128)
    inside = np.abs(z) <= 1.0
    x = np.where(inside, z, 1.0 / np.where(inside, 1.0, z))
    forward = np.full(z.shape, c[-1], dtype=np.complex128)
    backward = np.full(z.shape, c[0], dtype=np.complex128)
    for k in range(len(c) - 2, -1, -1):
        forward = forward * x + c[k]
        backward = backward * x + c[len(c) - 1 - k]
    vals = np.where(inside, forward, backward)
    return np.abs(vals) / np.sum(np.abs(c))


def certify_roots(p: Polynomial, rs: RootSet) -> np.ndarray:
    """Normalized backward residuals ``|P(z_i)| / (sum|a_k| * max(1,|z_i|)^N)``."""
    if rs.degree != p.degree:
        raise MismatchedDegree(f"RootSet has {rs.degree} roots, polynomial degree {p.degree}")
    c = np.asarray(p.coeffs, dtype=np.complex128)
    return _residuals(c / np.max(np.abs(c)), rs.roots)

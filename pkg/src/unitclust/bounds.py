"""Log-height and per-instance certification of the clustering inequalities.

Every certificate here checks a theorem on computed roots: the inequalities
hold for exact zeros, so a failed certificate means the roots are wrong.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .counting import TWO_PI, check_rho, check_sector, count_annulus, count_sector
from .errors import MismatchedDegree, RootOnCircle, UnconvergedRoots
from .poly import Polynomial

DEFAULT_ET_CONSTANT = 16.0
RESIDUAL_SLACK = 1e-9
DEFAULT_JENSEN_NODES = 4096
ROOT_ON_CIRCLE_TOL = 1e-6
_CATALAN = 0.915965594177219015054603514932

# Constants for the squared sector-discrepancy bound disc^2 <= C * L_N / N.
# Erdos-Turan's original 16 bounds the unsquared discrepancy, hence 16^2;
# Ganelius sharpened the unsquared constant to sqrt(2*pi/Catalan).
ET_CONSTANTS = {
    "default": DEFAULT_ET_CONSTANT,
    "erdos-turan-1950": 256.0,
    "ganelius-1954": 2.0 * math.pi / _CATALAN,
}


@dataclass(frozen=True)
class LogHeight:
    l1_log: float
    log_a0: float
    log_aN: float
    value: float


@dataclass(frozen=True)
class ClusterCertificate:
    rho: float
    lhs_inner: float
    rhs_inner: float
    lhs_outer: float
    rhs_outer: float
    lhs_total: float
    rhs_total: float
    satisfied: bool
    residual_slack: float = RESIDUAL_SLACK

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DiscrepancyRecord:
    theta: float
    phi: float
    discrepancy: float
    bound: float
    C: float
    satisfied: bool

    def to_dict(self) -> dict:
        return asdict(self)


def log_height(p: Polynomial) -> LogHeight:
    a = np.abs(p.coeffs)
    l1_log = math.log(float(np.sum(a)))
    log_a0 = math.log(float(a[0]))
    log_aN = math.log(float(a[-1]))
    return LogHeight(l1_log, log_a0, log_aN, l1_log - 0.5 * log_a0 - 0.5 * log_aN)


def _require_converged(p: Polynomial, rs) -> None:
    if len(rs.roots) != p.degree:
        raise MismatchedDegree(f"RootSet has {len(rs.roots)} roots, degree is {p.degree}")
    if not rs.converged:
        raise UnconvergedRoots("refusing to certify an unconverged RootSet")


def certify_annulus(p: Polynomial, rs, rho: float, residual_slack: float = RESIDUAL_SLACK) -> ClusterCertificate:
    """Inner, outer and total annulus inequalities at width ``rho``."""
    check_rho(rho)
    _require_converged(p, rs)
    n = p.degree
    h = log_height(p)
    counts = count_annulus(rs, rho)
    lhs_inner = counts.inner / n
    rhs_inner = (h.l1_log - h.log_a0) / (n * rho)
    lhs_outer = counts.outer / n
    rhs_outer = (h.l1_log - h.log_aN) / (n * rho)
    lhs_total = 1.0 - counts.annulus / n
    rhs_total = 2.0 * h.value / (n * rho)
    ok = (
        lhs_inner <= rhs_inner + residual_slack
        and lhs_outer <= rhs_outer + residual_slack
        and lhs_total <= rhs_total + residual_slack
    )
    return ClusterCertificate(rho, lhs_inner, rhs_inner, lhs_outer, rhs_outer,
                              lhs_total, rhs_total, bool(ok), residual_slack)


def certify_sector(p: Polynomial, rs, theta: float, phi: float,
                   C: float = DEFAULT_ET_CONSTANT) -> DiscrepancyRecord:
    """Squared sector discrepancy against ``C * L_N / N``."""
    check_sector(theta, phi)
    if not C > 0:
        raise ValueError("C must be positive")
    _require_converged(p, rs)
    n = p.degree
    L = log_height(p).value
    disc = abs(count_sector(rs, theta, phi).count / n - (phi - theta) / TWO_PI)
    limit = C * L / n
    return DiscrepancyRecord(theta, phi, disc, math.sqrt(limit), C, bool(disc * disc <= limit))


def circle_values(p: Polynomial, nodes: int) -> np.ndarray:
    """``P`` scaled by ``1/max|a_k|`` at ``exp(i*(2*pi*j + pi)/nodes)``, j < nodes.

    The half-step shift keeps the grid off roots of unity. Coefficients beyond
    ``nodes`` are folded (exact aliasing), so any degree is allowed.
    """
    c = np.asarray(p.coeffs, dtype=np.complex128)
    c = c / np.max(np.abs(c))
    k = np.arange(len(c))
    twisted = c * np.exp(1j * np.pi * k / nodes)
    folded = np.zeros(nodes, dtype=np.complex128)
    np.add.at(folded, k % nodes, twisted)
    return np.fft.ifft(folded) * nodes


def jensen_terms(p: Polynomial, rs, nodes: int = DEFAULT_JENSEN_NODES) -> tuple[float, float]:
    """(mean of log|P| on the circle minus log|P(0)|, sum over |z|<1 of log 1/|z|)."""
    if nodes < 64:
        raise ValueError("nodes must be >= 64")
    c0 = abs(p.coeffs[0]) / np.max(np.abs(p.coeffs))
    with np.errstate(divide="ignore"):
        lhs = float(np.mean(np.log(np.abs(circle_values(p, nodes))))) - math.log(c0)
    mod = np.abs(np.asarray(rs.roots))
    rhs = float(np.sum(-np.log(mod[mod < 1.0])))
    return lhs, rhs


def jensen_residual(p: Polynomial, rs, nodes: int = DEFAULT_JENSEN_NODES) -> float:
    """Absolute gap between the two sides of Jensen's formula.

    Warns with :class:`RootOnCircle` when a root is within 1e-6 of ``|z| = 1``;
    the quadrature then only converges slowly and the residual is looser.
    """
    if roots_near_circle(rs):
        warnings.warn("root within 1e-6 of the unit circle; Jensen quadrature degraded",
                      RootOnCircle, stacklevel=2)
    lhs, rhs = jensen_terms(p, rs, nodes)
    return abs(lhs - rhs)


def roots_near_circle(rs, tol: float = ROOT_ON_CIRCLE_TOL) -> bool:
    return bool(np.any(np.abs(np.abs(np.asarray(rs.roots)) - 1.0) < tol))


def minorization_check(rs, rho: float) -> tuple[float, float]:
    """(sum over |z|<1-rho of log 1/|z|, rho * inner count); first >= second."""
    check_rho(rho)
    mod = np.abs(np.asarray(getattr(rs, "roots", rs)))
    inside = mod[mod < 1.0 - rho]
    return float(np.sum(-np.log(inside))), rho * len(inside)


def default_rho_grid() -> list[float]:
    return [round(0.01 * j, 2) for j in range(1, 51)]


def sector_pairs(m: int) -> list[tuple[float, float]]:
    """All ``theta < phi`` drawn from an ``m x m`` grid of multiples of ``2*pi/m``."""
    thetas = [TWO_PI * i / m for i in range(m)]
    phis = [TWO_PI * j / m for j in range(1, m + 1)]
    return [(t, f) for t in thetas for f in phis if t < f]


@dataclass
class CertificateBundle:
    log_height: LogHeight
    annulus: list[ClusterCertificate]
    sectors: list[DiscrepancyRecord]
    jensen_residual: float
    jensen_warning: bool
    minorization_ok: bool
    max_residual: float
    extra: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return (all(c.satisfied for c in self.annulus)
                and all(d.satisfied for d in self.sectors)
                and self.minorization_ok)

    @property
    def max_sector_discrepancy(self) -> float:
        return max((d.discrepancy for d in self.sectors), default=0.0)

    def to_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "log_height": asdict(self.log_height),
            "max_residual": self.max_residual,
            "jensen_residual": self.jensen_residual,
            "jensen_warning": self.jensen_warning,
            "minorization_ok": self.minorization_ok,
            "annulus": [c.to_dict() for c in self.annulus],
            "sectors": [d.to_dict() for d in self.sectors],
            **self.extra,
        }


def certify_all(p: Polynomial, rs, rho_grid=None, sector_grid: int = 12,
                C: float = DEFAULT_ET_CONSTANT, jensen_nodes: int = DEFAULT_JENSEN_NODES,
                residual_slack: float = RESIDUAL_SLACK) -> CertificateBundle:
    """Run every certificate on one instance."""
    rho_grid = default_rho_grid() if rho_grid is None else list(rho_grid)
    annulus = [certify_annulus(p, rs, r, residual_slack) for r in rho_grid]
    sectors = [certify_sector(p, rs, t, f, C) for t, f in sector_pairs(sector_grid)]
    minor_ok = True
    for r in rho_grid:
        first, second = minorization_check(rs, r)
        minor_ok &= first >= second
    warn = roots_near_circle(rs)
    lhs, rhs = jensen_terms(p, rs, jensen_nodes)
    return CertificateBundle(log_height(p), annulus, sectors, abs(lhs - rhs), warn,
                             bool(minor_ok), float(np.max(rs.residuals)))

"""Annulus and sector counts over a computed root set.

Conventions: the annulus ``1-rho <= |z| <= 1/(1-rho)`` is closed, the inner
and outer counts use strict inequalities so the three counts partition the
roots, and sectors are half-open ``[theta, phi)`` with ``arg`` taken in
``[0, 2*pi)``. No tolerance band is applied at boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadSector, RhoOutOfRange

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AnnulusCount:
    rho: float
    inner: int
    outer: int
    annulus: int

    @property
    def total(self) -> int:
        return self.inner + self.outer + self.annulus


@dataclass(frozen=True)
class SectorCount:
    theta: float
    phi: float
    count: int


def _roots_of(rs) -> np.ndarray:
    return np.asarray(getattr(rs, "roots", rs), dtype=np.complex128)


def check_rho(rho: float) -> None:
    if not 0.0 < rho < 1.0:
        raise RhoOutOfRange(f"rho must lie in (0, 1), got {rho}")


def check_sector(theta: float, phi: float) -> None:
    if not 0.0 <= theta < phi <= TWO_PI:
        raise BadSector(f"need 0 <= theta < phi <= 2*pi, got ({theta}, {phi})")


def arguments(roots) -> np.ndarray:
    """Arguments folded into ``[0, 2*pi)``."""
    a = np.angle(_roots_of(roots))
    a = np.where(a < 0, a + TWO_PI, a)
    # -tiny + 2*pi can round up to exactly 2*pi
    return np.where(a >= TWO_PI, 0.0, a)


def annulus_counts_from_moduli(moduli: np.ndarray, rho: float) -> tuple[int, int, int]:
    lo = 1.0 - rho
    hi = 1.0 / lo
    inner = int(np.count_nonzero(moduli < lo))
    outer = int(np.count_nonzero(moduli > hi))
    return inner, outer, len(moduli) - inner - outer


def count_annulus(rs, rho: float) -> AnnulusCount:
    check_rho(rho)
    inner, outer, annulus = annulus_counts_from_moduli(np.abs(_roots_of(rs)), rho)
    return AnnulusCount(rho, inner, outer, annulus)


def count_sector(rs, theta: float, phi: float) -> SectorCount:
    check_sector(theta, phi)
    a = arguments(rs)
    return SectorCount(theta, phi, int(np.count_nonzero((a >= theta) & (a < phi))))


def sector_histogram(rs, m: int) -> np.ndarray:
    """Counts in the ``m`` equal sectors ``[2*pi*j/m, 2*pi*(j+1)/m)``."""
    edges = TWO_PI * np.arange(m + 1) / m
    a = arguments(rs)
    # searchsorted on the same edges as count_sector keeps the partition exact
    idx = np.searchsorted(edges, a, side="right") - 1
    return np.bincount(np.clip(idx, 0, m - 1), minlength=m)

"""Dense complex polynomials in ascending power order.

The coefficient vector ``a_0 .. a_N`` is stored as an immutable complex128
array. Construction enforces ``a_0 != 0`` and ``a_N != 0``; the degree is
structural (``len(coeffs) - 1``) so no deflation logic exists anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegreeTooSmall, NonFiniteCoefficient, ZeroEndpointCoefficient


@dataclass(frozen=True, eq=False)
class Polynomial:
    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self) -> int:
        return hash(self.coeffs.tobytes())

    def scaled(self, lam: complex) -> "Polynomial":
        return make_polynomial(np.asarray(self.coeffs) * lam)

    def to_json(self) -> str:
        return json.dumps(coeffs_to_pairs(self.coeffs))

    @classmethod
    def from_json(cls, text: str) -> "Polynomial":
        return make_polynomial(pairs_to_coeffs(json.loads(text)))


def make_polynomial(coeffs: Sequence[complex] | np.ndarray) -> Polynomial:
    """Build a validated Polynomial from ``a_0, ..., a_N``."""
    arr = np.array(coeffs, dtype=np.complex128).ravel()
    if arr.size < 2:
        raise DegreeTooSmall(f"need at least 2 coefficients, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteCoefficient("coefficients must be finite")
    if arr[0] == 0 or arr[-1] == 0:
        raise ZeroEndpointCoefficient("a_0 and a_N must both be nonzero")
    arr.setflags(write=False)
    return Polynomial(arr)


def evaluate(p: Polynomial, z):
    """Horner evaluation of ``sum a_k z^k``; ``z`` may be a scalar or an array."""
    zz = np.asarray(z, dtype=np.complex128)
    acc = np.full(zz.shape, p.coeffs[-1], dtype=np.complex128)
    with np.errstate(over="ignore", invalid="ignore"):
        for a in p.coeffs[-2::-1]:
            acc = acc * zz + a
    return acc[()] if acc.ndim == 0 else acc


def reverse(p: Polynomial) -> Polynomial:
    """The reciprocal polynomial ``Z^N P(1/Z)``; its zeros are the inverses of p's."""
    return make_polynomial(p.coeffs[::-1])


def coefficient_l1(p: Polynomial) -> float:
    """``sum |a_k|``, an upper bound for ``|P|`` on the unit circle."""
    return float(np.sum(np.abs(p.coeffs)))


def coeffs_to_pairs(coeffs) -> list[list[float]]:
    return [[float(c.real), float(c.imag)] for c in np.asarray(coeffs, dtype=np.complex128)]


def pairs_to_coeffs(pairs) -> np.ndarray:
    """Decode ``[[re, im], ...]``; bare real numbers are accepted too."""
    out = []
    for item in pairs:
        if isinstance(item, (list, tuple)):
            if len(item) != 2:
                raise ValueError(f"expected [re, im] pair, got {item!r}")
            out.append(complex(float(item[0]), float(item[1])))
        else:
            out.append(complex(float(item)))
    return np.array(out, dtype=np.complex128)

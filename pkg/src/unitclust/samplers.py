"""Random coefficient models and their moment diagnostics.

Every draw comes from a Philox stream keyed by ``(seed, N, trial)``; row
``k`` of the uniform block belongs to coefficient ``a_{N,k}``. Nothing is
shared between trials, so trials can be sampled in any order or in parallel.
Zero endpoint coefficients are replaced from a fresh stream keyed by
``(seed, N, trial, k, attempt)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import gamma, ndtri

from .errors import BadModelParameters, MomentDiverges
from .poly import Polynomial, make_polynomial

_UNIFORMS_PER_COEFF = 2
_MAX_REJECTIONS = 64
IID_DISTRIBUTIONS = ("normal", "complex_normal", "uniform", "lognormal", "constant")
SCALE_DISTRIBUTIONS = ("fixed", "log10_uniform", "lognormal")


@dataclass(frozen=True)
class CauchyScaled:
    """a_{N,k} symmetric Cauchy with scale N(k+1)."""

    def scales(self, n: int) -> np.ndarray:
        return n * (np.arange(n + 1) + 1.0)


@dataclass(frozen=True)
class SignedUniformInt:
    """a_{N,k} uniform on {+-1, ..., +-N}."""


@dataclass(frozen=True)
class Rademacher:
    p: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise BadModelParameters(f"rademacher p must lie in (0, 1), got {self.p}")


@dataclass(frozen=True)
class PositiveCauchy:
    """a_k half-Cauchy on (0, inf) with scale (k+1)^-sigma."""

    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise BadModelParameters(f"positive_cauchy sigma must be > 0, got {self.sigma}")

    def scales(self, n: int) -> np.ndarray:
        return (np.arange(n + 1) + 1.0) ** (-self.sigma)


@dataclass(frozen=True)
class IIDGeneric:
    """One named scalar law applied independently to every coefficient.

    ``params`` by distribution: normal / complex_normal ``loc, scale``;
    uniform ``low, high``; lognormal ``mean, sigma``; constant ``value``.
    """

    dist: str = "normal"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dist not in IID_DISTRIBUTIONS:
            raise BadModelParameters(f"unknown iid distribution {self.dist!r}")
        p = self.params
        if self.dist in ("normal", "complex_normal") and p.get("scale", 1.0) <= 0:
            raise BadModelParameters("scale must be > 0")
        if self.dist == "uniform" and not p.get("low", -1.0) < p.get("high", 1.0):
            raise BadModelParameters("uniform needs low < high")
        if self.dist == "lognormal" and p.get("sigma", 1.0) <= 0:
            raise BadModelParameters("lognormal sigma must be > 0")
        if self.dist == "constant" and p.get("value", 1.0) == 0:
            raise BadModelParameters("constant value must be nonzero")

    def __hash__(self):
        return hash((self.dist, tuple(sorted(self.params.items()))))


@dataclass(frozen=True)
class CommonScale:
    """A base sample multiplied by one shared random factor lambda != 0.

    ``scale_dist``: ``{"kind": "fixed", "value": v}``,
    ``{"kind": "log10_uniform", "low": a, "high": b}`` (lambda = 10**U) or
    ``{"kind": "lognormal", "sigma": s}``.
    """

    base: object
    scale_dist: dict = field(default_factory=lambda: {"kind": "log10_uniform", "low": -3.0, "high": 3.0})

    def __post_init__(self):
        kind = self.scale_dist.get("kind")
        if kind not in SCALE_DISTRIBUTIONS:
            raise BadModelParameters(f"unknown scale distribution {kind!r}")
        if kind == "fixed" and self.scale_dist.get("value", 0) == 0:
            raise BadModelParameters("fixed scale must be nonzero")
        if isinstance(self.base, CommonScale):
            raise BadModelParameters("nested common_scale is not supported")

    def __hash__(self):
        return hash((self.base, tuple(sorted(self.scale_dist.items()))))


CoefficientModel = CauchyScaled | SignedUniformInt | Rademacher | PositiveCauchy | IIDGeneric | CommonScale

_VARIANT_NAMES = {
    CauchyScaled: "cauchy_scaled",
    SignedUniformInt: "signed_uniform_int",
    Rademacher: "rademacher",
    PositiveCauchy: "positive_cauchy",
    IIDGeneric: "iid_generic",
    CommonScale: "common_scale",
}


def model_to_dict(model) -> dict:
    name = _VARIANT_NAMES[type(model)]
    if isinstance(model, Rademacher):
        return {"variant": name, "p": model.p}
    if isinstance(model, PositiveCauchy):
        return {"variant": name, "sigma": model.sigma}
    if isinstance(model, IIDGeneric):
        return {"variant": name, "dist": model.dist, "params": dict(model.params)}
    if isinstance(model, CommonScale):
        return {"variant": name, "base": model_to_dict(model.base), "scale_dist": dict(model.scale_dist)}
    return {"variant": name}


def model_from_dict(d: dict):
    """Inverse of :func:`model_to_dict`; unknown variants or keys are rejected."""
    d = dict(d)
    variant = d.pop("variant", None)
    try:
        if variant == "cauchy_scaled":
            model = CauchyScaled(**d)
        elif variant == "signed_uniform_int":
            model = SignedUniformInt(**d)
        elif variant == "rademacher":
            model = Rademacher(**d)
        elif variant == "positive_cauchy":
            model = PositiveCauchy(**d)
        elif variant == "iid_generic":
            model = IIDGeneric(dist=d.pop("dist", "normal"), params=dict(d.pop("params", {})), **d)
        elif variant == "common_scale":
            base = model_from_dict(d.pop("base"))
            model = CommonScale(base, **d)
        else:
            raise BadModelParameters(f"unknown model variant {variant!r}")
    except TypeError as exc:
        raise BadModelParameters(str(exc)) from None
    return model


def _stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def _open_uniforms(rng: np.random.Generator, shape) -> np.ndarray:
    # 53-bit grid shifted by half a step: strictly inside (0, 1)
    return (rng.integers(0, 2**53, size=shape, dtype=np.int64) + 0.5) / 2.0**53


def _from_uniforms(model, u: np.ndarray, ks: np.ndarray, n: int) -> np.ndarray:
    """Map rows of uniforms to coefficients at indices ``ks`` for degree ``n``."""
    u0, u1 = u[:, 0], u[:, 1]
    if isinstance(model, CauchyScaled):
        return n * (ks + 1.0) * np.tan(np.pi * (u0 - 0.5))
    if isinstance(model, SignedUniformInt):
        mag = np.minimum(np.floor(u0 * n), n - 1) + 1.0
        return np.where(u1 < 0.5, -mag, mag)
    if isinstance(model, Rademacher):
        return np.where(u0 < model.p, 1.0, -1.0)
    if isinstance(model, PositiveCauchy):
        return (ks + 1.0) ** (-model.sigma) * np.tan(0.5 * np.pi * u0)
    if isinstance(model, IIDGeneric):
        p = model.params
        if model.dist == "normal":
            return p.get("loc", 0.0) + p.get("scale", 1.0) * ndtri(u0)
        if model.dist == "complex_normal":
            s = p.get("scale", 1.0) / math.sqrt(2.0)
            return p.get("loc", 0.0) + s * (ndtri(u0) + 1j * ndtri(u1))
        if model.dist == "uniform":
            lo, hi = p.get("low", -1.0), p.get("high", 1.0)
            return lo + (hi - lo) * u0
        if model.dist == "lognormal":
            return np.exp(p.get("mean", 0.0) + p.get("sigma", 1.0) * ndtri(u0))
        return np.full(len(ks), complex(p.get("value", 1.0)))
    raise BadModelParameters(f"not a base model: {model!r}")


def _draw_scale(scale_dist: dict, rng: np.random.Generator) -> float:
    kind = scale_dist["kind"]
    if kind == "fixed":
        return float(scale_dist["value"])
    u = _open_uniforms(rng, (1,))[0]
    if kind == "log10_uniform":
        lo, hi = scale_dist.get("low", -3.0), scale_dist.get("high", 3.0)
        return 10.0 ** (lo + (hi - lo) * u)
    return math.exp(scale_dist.get("sigma", 1.0) * float(ndtri(u)))


def sample_coefficients(model, n: int, seed: int, trial: int) -> np.ndarray:
    if n < 1:
        raise BadModelParameters(f"degree must be >= 1, got {n}")
    if isinstance(model, CommonScale):
        base = sample_coefficients(model.base, n, seed, trial)
        # stream tag 1 keeps the scale draw disjoint from the base block
        return base * _draw_scale(model.scale_dist, _stream(seed, n, trial, 1))
    ks = np.arange(n + 1)
    u = _open_uniforms(_stream(seed, n, trial), (n + 1, _UNIFORMS_PER_COEFF))
    a = np.asarray(_from_uniforms(model, u, ks, n), dtype=np.complex128)
    for k in (0, n):
        attempt = 0
        while a[k] == 0:
            attempt += 1
            if attempt > _MAX_REJECTIONS:
                raise BadModelParameters(f"model keeps producing a_{k} = 0")
            uk = _open_uniforms(_stream(seed, n, trial, 2, k, attempt), (1, _UNIFORMS_PER_COEFF))
            a[k] = _from_uniforms(model, uk, np.array([k]), n)[0]
    return a


def sample_polynomial(model, n: int, seed: int, trial: int = 0) -> Polynomial:
    """Deterministic draw of a degree-``n`` polynomial for ``(model, n, seed, trial)``."""
    return make_polynomial(sample_coefficients(model, n, seed, trial))


# ---------------------------------------------------------------- moments


def cauchy_fractional_moment(n: int, k: int, s: float) -> float:
    """``E|a_{N,k}|^s`` for a Cauchy law of scale ``N(k+1)``, ``0 <= s < 1``."""
    if not 0.0 <= s < 1.0:
        raise MomentDiverges(f"Cauchy moment of order {s} is infinite (need 0 <= s < 1)")
    return float((n * (k + 1.0)) ** s * gamma(0.5 + 0.5 * s) * gamma(0.5 - 0.5 * s) / math.pi)


def _abs_cauchy_moment(scale: np.ndarray, q: float) -> np.ndarray:
    # E|X|^q = scale^q / cos(pi q / 2) for |q| < 1; |X| of a half-Cauchy has the same law
    if not -1.0 < q < 1.0:
        raise MomentDiverges(f"Cauchy moment of order {q} is infinite (need |q| < 1)")
    return scale**q / math.cos(0.5 * math.pi * q)


class MomentDiagnostics(NamedTuple):
    s: float
    t: float
    lambda_k: np.ndarray
    xi_k: np.ndarray
    growth_rate_lambda: float
    growth_rate_xi: float
    lambda_se: np.ndarray
    xi_se: np.ndarray


def _check_negative_order(model, t: float) -> None:
    # laws with a positive density (or atom) at 0 have E|a|^-t = inf from t >= dim
    if isinstance(model, IIDGeneric):
        if model.dist in ("normal", "uniform") and t >= 1.0:
            lo, hi = model.params.get("low", -1.0), model.params.get("high", 1.0)
            if model.dist == "normal" or lo <= 0.0 <= hi:
                raise MomentDiverges(f"E|a|^-{t} is infinite for {model.dist}")
        if model.dist == "complex_normal" and t >= 2.0:
            raise MomentDiverges(f"E|a|^-{t} is infinite for complex_normal")
    if isinstance(model, CommonScale):
        _check_negative_order(model.base, t)


def _closed_form_moments(model, n: int, s: float, t: float):
    ks = np.arange(n + 1, dtype=float)
    if isinstance(model, Rademacher):
        return np.ones(n + 1), np.ones(n + 1)
    if isinstance(model, SignedUniformInt):
        m = np.arange(1, n + 1, dtype=float)
        return np.full(n + 1, np.mean(m**s)), np.full(n + 1, np.mean(m ** (-t)))
    if isinstance(model, (CauchyScaled, PositiveCauchy)):
        scale = model.scales(n) if isinstance(model, PositiveCauchy) else n * (ks + 1.0)
        return _abs_cauchy_moment(scale, s), _abs_cauchy_moment(scale, -t)
    if isinstance(model, IIDGeneric) and model.dist == "constant":
        v = abs(complex(model.params.get("value", 1.0)))
        return np.full(n + 1, v**s), np.full(n + 1, v ** (-t))
    return None


def _growth_rate(values: np.ndarray) -> float:
    n = len(values) - 1
    ks = np.arange(max(1, int(math.ceil(n / 2))), n + 1)
    if len(ks) == 0:
        return float("nan")
    return float(np.max(values[ks] ** (1.0 / ks)))


def moment_diagnostics(model, n: int, s: float, t: float, mc_samples: int = 10_000,
                       seed: int = 0) -> MomentDiagnostics:
    """Fractional moments ``E|a_k|^s`` and negative moments ``E|a_k|^-t``, k = 0..N.

    Closed forms where the law allows; otherwise Monte Carlo over
    ``mc_samples`` sampled coefficient vectors, with standard errors.
    Growth rates are ``max_{k >= N/2} value_k^(1/k)``.
    """
    if not (s > 0 and t > 0):
        raise ValueError("orders s and t must be positive")
    _check_negative_order(model, t)
    closed = _closed_form_moments(model, n, s, t)
    if closed is not None:
        lam, xi = closed
        lam_se = np.zeros(n + 1)
        xi_se = np.zeros(n + 1)
    else:
        if mc_samples < 1000:
            raise ValueError("mc_samples must be >= 1000 without a closed form")
        draws = np.abs(np.stack([sample_coefficients(model, n, seed, i) for i in range(mc_samples)]))
        pos = draws**s
        neg = draws ** (-t)
        lam, xi = pos.mean(axis=0), neg.mean(axis=0)
        lam_se = pos.std(axis=0, ddof=1) / math.sqrt(mc_samples)
        xi_se = neg.std(axis=0, ddof=1) / math.sqrt(mc_samples)
    return MomentDiagnostics(s, t, lam, xi, _growth_rate(lam), _growth_rate(xi), lam_se, xi_se)


class ConcavityCheck(NamedTuple):
    lhs: float
    rhs: float
    lhs_se: float


def concavity_bound_check(model, n: int, s: float, mc_samples: int = 10_000,
                          seed: int = 0) -> ConcavityCheck:
    """Monte Carlo ``E[log sum|a_k|]`` against ``(1/s) log sum E|a_k|^s``."""
    if not 0.0 < s <= 1.0:
        raise ValueError("need 0 < s <= 1")
    # order 1/2 for the negative moment is finite for every shipped law
    lam = moment_diagnostics(model, n, s, 0.5, max(mc_samples, 1000), seed).lambda_k
    rhs = math.log(float(np.sum(lam))) / s
    logs = np.array([math.log(float(np.sum(np.abs(sample_coefficients(model, n, seed + 1, i)))))
                     for i in range(mc_samples)])
    se = float(logs.std(ddof=1) / math.sqrt(mc_samples)) if mc_samples > 1 else 0.0
    return ConcavityCheck(float(logs.mean()), rhs, se)


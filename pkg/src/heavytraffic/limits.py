"""Limit distributions of the scaled supremum: Mittag-Leffler, exponential,
and an empirical reference for stable limits with no closed form.

``ml_cdf`` evaluates ``F(x) = 1 - E_alpha(-x**alpha)``.  The alternating
power series is used while its largest term stays below ``1e3`` (so double
precision keeps ~1e-12 absolute accuracy), the divergent tail expansion is used
once its smallest term is below ``1e-13``, and the real integral

    1 - F(x) = sin(pi a) / (pi a) * int_0^inf exp(-x v**(1/a)) / (v**2 + 2 v cos(pi a) + 1) dv

bridges the gap between the two.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, special

from .errors import DomainError
from .models import LevyModel

__all__ = [
    "ml_cdf",
    "ml_sample",
    "stable_sample",
    "standard_stable_scale",
    "laplace_unit_scale",
    "MittagLeffler",
    "Exponential",
    "EmpiricalReference",
    "select_limit_law",
    "law_from_dict",
]

_SERIES_MAX_TERM = 10.0
_TAIL_MIN_TERM = 1e-17


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha <= 1:
        raise DomainError(f"Mittag-Leffler alpha must lie in (0, 1], got {alpha}")


def _series_sf(alpha: float, x: np.ndarray) -> np.ndarray:
    """``E_alpha(-x**alpha)`` by the power series, vectorized over ``x``."""
    z = x**alpha
    logz = np.log(np.where(z > 0, z, 1.0))
    total = np.ones_like(x)
    k0 = 1
    while True:
        k = np.arange(k0, k0 + 64)
        logt = k[None, :] * logz[:, None] - special.gammaln(1 + alpha * k)[None, :]
        terms = np.where(k % 2 == 1, -1.0, 1.0)[None, :] * np.exp(logt)
        terms[z == 0] = 0.0
        total += terms.sum(axis=1)
        if np.all(np.abs(terms[:, -1]) < 1e-18) and np.all(np.diff(logt[:, -2:], axis=1) < 0):
            break
        k0 += 64
    return total


def _series_max_log_term(alpha: float, x: float) -> float:
    z = x**alpha
    if z == 0:
        return -np.inf
    # largest term sits near alpha k = x
    k = np.arange(1, int(2 * x / alpha) + 64)
    return float(np.max(k * math.log(z) - special.gammaln(1 + alpha * k)))


_TAIL_TERMS: dict[float, tuple[np.ndarray, np.ndarray]] = {}


def _tail_coefficients(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Powers ``k`` and signed coefficients ``(-1)**(k+1) / Gamma(1 - alpha k)``, poles dropped."""
    if alpha not in _TAIL_TERMS:
        k = np.arange(1, 400)
        coef = np.where(k % 2 == 1, 1.0, -1.0) * special.rgamma(1 - alpha * k)
        keep = coef != 0
        _TAIL_TERMS[alpha] = (k[keep].astype(float), coef[keep])
    return _TAIL_TERMS[alpha]


def _tail_sf(alpha: float, x, min_terms: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Asymptotic ``E_alpha(-z) ~ sum_k (-1)**(k+1) z**-k / Gamma(1 - alpha k)``, vectorized.

    Returns ``(value, error estimate)``; summation stops at the smallest term.
    The estimate is the larger of the last used and the first omitted term, so
    a coefficient that merely passes near a pole of Gamma does not pass for
    convergence.  ``exp(-x)`` is added to it for the exponentially small part.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k, coef = _tail_coefficients(alpha)
    logz = alpha * np.log(x)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        terms = coef[None, :] * np.exp(-k[None, :] * logz[:, None])
    mag = np.abs(terms)
    bad = ~np.isfinite(terms)
    grow = np.zeros_like(bad)
    grow[:, min_terms:] = mag[:, min_terms:] > mag[:, min_terms - 1 : -1]
    stop = bad | grow
    stop[:, :min_terms] &= bad[:, :min_terms]
    # number of terms used: index of the first stop, or all of them
    used = np.where(stop.any(axis=1), stop.argmax(axis=1), k.size)
    cols = np.arange(k.size)[None, :]
    total = np.where(cols < used[:, None], np.where(bad, 0.0, terms), 0.0).sum(axis=1)
    rows = np.arange(x.size)
    last = mag[rows, np.maximum(used - 1, 0)]
    nxt = np.where(used < k.size, mag[rows, np.minimum(used, k.size - 1)], 0.0)
    nxt = np.where(np.isfinite(nxt), nxt, 0.0)
    # the expansion also omits a term of order exp(-x), which dominates as alpha -> 1
    return total, np.maximum(np.maximum(last, nxt), np.exp(-x))


def _integral_sf(alpha: float, x: float) -> float:
    """``E_alpha(-x**alpha)`` from its integral representation.

    The kernel ``pref / ((v - 1)**2 + s**2 v)``, ``s = 2 cos(pi alpha / 2)``, has unit
    mass and spikes at ``v = 1`` as alpha -> 1.  Its mass times ``exp(-x)`` is taken
    out exactly, leaving an integrand that vanishes at the spike.
    """
    s = 2 * math.cos(0.5 * math.pi * alpha)
    pref = math.sin(math.pi * alpha) / (math.pi * alpha)
    inv = 1 / alpha
    g1 = math.exp(-x)

    def f(v):
        return (math.exp(-x * v**inv) - g1) / ((v - 1) ** 2 + s * s * v)

    # away from the spike the integrand behaves like 1/(v - 1); in u = log|v - 1| it is smooth
    w = min(0.5, 10 * s)
    tol = 1e-16 / pref  # errors are scaled down by pref, which vanishes with the spike width
    opts = dict(epsabs=tol, epsrel=1e-12, limit=400)
    lw = math.log(w)
    v_mass = x ** (-alpha)
    left_pts = [math.log1p(-v_mass)] if v_mass < 1 - w and math.log1p(-v_mass) > lw else None
    head = integrate.quad(lambda u: f(1 - math.exp(u)) * math.exp(u), lw, 0.0, points=left_pts, **opts)[0]
    if w > 1e-6:
        # for narrower spikes the odd part cancels and the rest is O(pref w), below rounding
        head += integrate.quad(f, 1 - w, 1, **opts)[0] + integrate.quad(f, 1, 1 + w, **opts)[0]
    head += integrate.quad(lambda u: f(1 + math.exp(u)) * math.exp(u), lw, 0.0, **opts)[0]
    rest = integrate.quad(f, 2, np.inf, **opts)[0]
    return g1 + pref * (head + rest)


def ml_cdf(alpha: float, x):
    """CDF of the Mittag-Leffler law with LST ``1 / (1 + s**alpha)``."""
    _check_alpha(alpha)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(np.isnan(xa)):
        raise DomainError("ml_cdf needs x >= 0")
    flat = xa.ravel()
    if alpha == 1:
        out = -np.expm1(-flat)
        return out.reshape(xa.shape) if xa.ndim else float(out[0])

    sf = np.empty_like(flat)
    # the series is safe where its largest term is small; find the cut-off once
    x_cut = _series_cutoff(alpha)
    use_series = flat <= x_cut
    if np.any(use_series):
        sf[use_series] = _series_sf(alpha, flat[use_series])
    rest = np.nonzero(~use_series)[0]
    if rest.size:
        vals = flat[rest]
        uniq, inv = np.unique(vals, return_inverse=True)
        res = np.zeros_like(uniq)
        lo_b, hi_b, bridge = _bridge(alpha)
        inside = uniq <= hi_b
        res[inside] = bridge(np.log(uniq[inside]))
        for lo in range(0, uniq.size, 4096):
            idx = np.nonzero(~inside[lo : lo + 4096] & np.isfinite(uniq[lo : lo + 4096]))[0] + lo
            if idx.size == 0:
                continue
            tail, err = _tail_sf(alpha, uniq[idx])
            res[idx] = tail
            for j in idx[err >= _TAIL_MIN_TERM]:
                res[j] = _integral_sf(alpha, uniq[j])
        sf[rest] = res[inv]
    out = np.clip(1.0 - sf, 0.0, 1.0)
    return out.reshape(xa.shape) if xa.ndim else float(out[0])


_BRIDGES: dict[float, tuple] = {}


def _bridge(alpha: float):
    """Chebyshev interpolant in ``log x`` of the integral form between the series and tail regimes.

    Covers ``[series cut-off, x_hi]`` where ``x_hi`` is past the last point of a
    log grid at which the tail expansion misses ``_TAIL_MIN_TERM``.
    """
    if alpha not in _BRIDGES:
        lo = _series_cutoff(alpha)
        grid = np.logspace(math.log10(lo), 300, 6000)
        _, err = _tail_sf(alpha, grid)
        bad = grid[err >= _TAIL_MIN_TERM]
        hi = float(bad.max()) * 1.1 if bad.size else lo * 1.1
        u_lo, u_hi = math.log(lo), math.log(hi)

        def f(u):
            return np.array([_integral_sf(alpha, math.exp(v)) for v in np.atleast_1d(u)])

        check = np.linspace(u_lo, u_hi, 41)[1:-1:2]
        ref = f(check)
        for deg in (32, 64, 128, 256, 512):
            cheb = np.polynomial.Chebyshev.interpolate(f, deg, domain=[u_lo, u_hi])
            if np.max(np.abs(cheb(check) - ref)) < 1e-14:
                break
        _BRIDGES[alpha] = (lo, hi, cheb)
    return _BRIDGES[alpha]


_CUTOFFS: dict[float, float] = {}


def _series_cutoff(alpha: float) -> float:
    """Largest ``x`` whose series has maximal term below ``_SERIES_MAX_TERM``."""
    if alpha not in _CUTOFFS:
        lo, hi = 0.0, 1.0
        target = math.log(_SERIES_MAX_TERM)
        while _series_max_log_term(alpha, hi) < target:
            lo, hi = hi, 2 * hi
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _series_max_log_term(alpha, mid) < target:
                lo = mid
            else:
                hi = mid
        _CUTOFFS[alpha] = lo
    return _CUTOFFS[alpha]


def stable_sample(alpha: float, beta: float, scale: float, rng: np.random.Generator, size=None):
    """Draws from ``S_alpha(scale, beta, 0)`` by the Chambers-Mallows-Stuck method.

    ``alpha = 2`` gives a centred Gaussian with variance ``2 * scale**2``.
    """
    if not 0 < alpha <= 2:
        raise DomainError(f"stable alpha must lie in (0, 2], got {alpha}")
    if not -1 <= beta <= 1:
        raise DomainError(f"stable beta must lie in [-1, 1], got {beta}")
    if not scale > 0:
        raise DomainError(f"stable scale must be positive, got {scale}")
    v = (rng.random(size) - 0.5) * np.pi
    w = rng.standard_exponential(size)
    if alpha == 1:
        half = np.pi / 2 + beta * v
        x = 2 / np.pi * (half * np.tan(v) - beta * np.log(np.pi / 2 * w * np.cos(v) / half))
        x = scale * x + 2 / np.pi * beta * scale * math.log(scale)
    else:
        t = beta * math.tan(np.pi * alpha / 2)
        b = math.atan(t) / alpha
        s = (1 + t * t) ** (1 / (2 * alpha))
        x = (
            s
            * np.sin(alpha * (v + b))
            / np.cos(v) ** (1 / alpha)
            * (np.cos(v - alpha * (v + b)) / w) ** ((1 - alpha) / alpha)
        )
        x = scale * x
    return x if size is not None else float(x)


def ml_sample(alpha: float, rng: np.random.Generator, size=None):
    """Mittag-Leffler draws as ``E**(1/alpha) * S`` with ``E ~ Exp(1)`` and ``E exp(-s S) = exp(-s**alpha)``."""
    _check_alpha(alpha)
    if alpha == 1:
        return rng.standard_exponential(size) if size is not None else float(rng.standard_exponential())
    s = stable_sample(alpha, 1.0, math.cos(math.pi * alpha / 2) ** (1 / alpha), rng, size)
    e = rng.standard_exponential(size)
    out = e ** (1 / alpha) * s
    return out if size is not None else float(out)


def _kappa(alpha: float) -> float:
    """Laplace constant of the V-normalized one-sided stable law: ``(2 - alpha) Gamma(-alpha)``."""
    if alpha == 2:
        return 0.5
    return (2 - alpha) * special.gamma(-alpha)


def standard_stable_scale(alpha: float) -> float:
    """Scale of the stable law normalized so that its ``V(x) = x**(2 - alpha)``.

    This is the limit of ``X_n / d(n)`` when ``d(n)`` is computed from ``V``; at
    ``alpha = 2`` it is ``1 / sqrt(2)``, i.e. standard Brownian motion.
    """
    if not 0 < alpha <= 2 or alpha == 1:
        raise DomainError(f"alpha must lie in (0, 1) or (1, 2], got {alpha}")
    if alpha == 2:
        return 1 / math.sqrt(2)
    return ((2 - alpha) * -special.gamma(-alpha) * math.cos(math.pi * alpha / 2)) ** (1 / alpha)


def laplace_unit_scale(alpha: float) -> float:
    """Scale of the spectrally positive stable law with ``E exp(-s L_1) = exp(s**alpha)``."""
    if not 1 < alpha < 2:
        raise DomainError(f"alpha must lie in (1, 2), got {alpha}")
    return abs(math.cos(math.pi * alpha / 2)) ** (1 / alpha)


@dataclass(frozen=True)
class MittagLeffler:
    """Law of ``scale * ML_alpha``."""

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.scale > 0:
            raise DomainError("scale must be positive")

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return ml_cdf(self.alpha, x / self.scale)

    def sample(self, rng, size=None):
        return self.scale * ml_sample(self.alpha, rng, size)

    def to_dict(self) -> dict:
        return {"kind": "ml", "alpha": self.alpha, "scale": self.scale}


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError("rate must be positive")

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        out = -np.expm1(-self.rate * x)
        return out if out.ndim else float(out)

    def sample(self, rng, size=None):
        return rng.standard_exponential(size) / self.rate

    def to_dict(self) -> dict:
        return {"kind": "exp", "rate": self.rate}


@dataclass(frozen=True, eq=False)
class EmpiricalReference:
    """Simulated law of ``sup_t (L_t - t)`` for a V-normalized stable ``L``."""

    samples: np.ndarray = field(repr=False)
    alpha: float
    beta: float

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float))
        if s.size == 0:
            raise DomainError("empirical reference needs at least one sample")
        object.__setattr__(self, "samples", s)

    def cdf(self, x):
        out = np.searchsorted(self.samples, np.asarray(x, dtype=float), side="right") / self.samples.size
        return out if np.ndim(out) else float(out)

    def to_dict(self) -> dict:
        return {"kind": "empirical", "alpha": self.alpha, "beta": self.beta, "n": int(self.samples.size)}

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            for v in self.samples:
                fh.write(f"{v:.17g}\n")

    @classmethod
    def load_csv(cls, path, alpha: float, beta: float) -> "EmpiricalReference":
        with open(path, newline="") as fh:
            vals = [float(row[0]) for row in csv.reader(fh) if row]
        return cls(np.array(vals), alpha, beta)


def law_from_dict(d: dict, reference_path: str | Path | None = None):
    kind = d.get("kind")
    if kind == "ml":
        return MittagLeffler(d["alpha"], d.get("scale", 1.0))
    if kind == "exp":
        return Exponential(d["rate"])
    if kind == "empirical":
        if reference_path is None:
            raise ValueError("an empirical law needs its sample file")
        return EmpiricalReference.load_csv(reference_path, d["alpha"], d["beta"])
    raise ValueError(f"unknown law kind {kind!r}")


def select_limit_law(
    model: LevyModel,
    alpha: float,
    seed: int | None = None,
    n_reference: int = 100_000,
    horizon: float = 64.0,
    step: float = 1 / 256,
    workers: int = 1,
):
    """Limit of the scaled supremum for ``model``.

    Compound Poisson (spectrally positive) input pairs with the contraction
    normalization and gives ``ML(alpha - 1)``.  Every other model pairs with
    ``solve_defna``, whose limit is ``sup_t (L_t - t)`` for the V-normalized
    stable ``L``: exponential for Gaussian and spectrally negative input, a
    scaled Mittag-Leffler for spectrally positive stable input, and a simulated
    :class:`EmpiricalReference` otherwise (``seed`` is then required).
    """
    if not 1 < alpha <= 2:
        raise DomainError(f"limit law needs alpha in (1, 2], got {alpha}")
    if model.has_jumps:
        return MittagLeffler(alpha - 1)
    if model.is_gaussian:
        return Exponential(2.0)
    kappa = _kappa(alpha)
    beta = model.stable.beta
    if beta == 1:
        return MittagLeffler(alpha - 1, kappa ** (1 / (alpha - 1)))
    if beta == -1:
        return Exponential(kappa ** (-1 / (alpha - 1)))
    if seed is None:
        raise ValueError("an empirical reference law needs an explicit seed")
    from .simulate import stable_sup_functional_batch

    samples = stable_sup_functional_batch(
        alpha, beta, n_reference, seed, horizon=horizon, step=step, workers=workers
    )
    return EmpiricalReference(samples, alpha, beta)

"""Supported Lévy process families and their analytic functionals.

A :class:`LevyModel` is a drift plus an optional Gaussian part plus either a
compound Poisson jump part (Pareto or exponential jumps, always positive) or a
strictly stable part.  The functions at the bottom of the module compute the
mean, the Lévy tail ``nu(x, inf)``, the truncated second moment ``V(x)`` and
the cumulant integral ``r(s) = int (exp(-s x) - 1 + s x) nu(dx)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Union

import numpy as np
from scipy import integrate, special

from .errors import DomainError, InfiniteMean, Unsupported

__all__ = [
    "ParetoJumps",
    "ExponentialJumps",
    "StablePart",
    "LevyModel",
    "HeavyTrafficFamily",
    "mean",
    "levy_tail",
    "truncated_second_moment",
    "cumulant_r",
    "model_from_dict",
]


@dataclass(frozen=True)
class ParetoJumps:
    """Pareto jumps with ``P(J > x) = (x / x_min) ** -alpha`` for ``x >= x_min``."""

    alpha: float
    x_min: float = 1.0
    kind: str = field(default="pareto", init=False, repr=False)

    def __post_init__(self):
        if not (self.alpha > 0 and self.x_min > 0):
            raise DomainError(f"Pareto jumps need alpha > 0 and x_min > 0, got {self}")

    def mean(self) -> float:
        if self.alpha <= 1:
            raise InfiniteMean(f"Pareto tail index {self.alpha} <= 1 has no mean")
        return self.alpha * self.x_min / (self.alpha - 1)

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        ratio = np.maximum(x, self.x_min) / self.x_min
        return ratio ** -self.alpha

    def second_moment_below(self, x):
        """``E[J**2; J <= x]``."""
        x = np.asarray(x, dtype=float)
        a, m = self.alpha, self.x_min
        xx = np.maximum(x, m)
        if a == 2:
            val = 2 * m**2 * np.log(xx / m)
        else:
            val = a * m**a * (xx ** (2 - a) - m ** (2 - a)) / (2 - a)
        return np.where(x < m, 0.0, val)

    def sample(self, rng: np.random.Generator, size):
        u = 1.0 - rng.random(size)
        return self.x_min * u ** (-1.0 / self.alpha)

    def integrated_tail_ppf(self, u):
        """Inverse CDF of the stationary-excess law with density ``P(J > x) / E J``.

        The CDF is ``x / E J`` below ``x_min`` and ``1 - (x / x_min)**(1 - alpha) / alpha``
        above it.
        """
        u = np.asarray(u, dtype=float)
        a, m = self.alpha, self.x_min
        knee = (a - 1) / a
        below = u * self.mean()
        with np.errstate(divide="ignore"):
            above = m * (a * (1.0 - np.maximum(u, knee))) ** (-1.0 / (a - 1))
        return np.where(u <= knee, below, above)

    def to_dict(self) -> dict:
        return {"kind": "pareto", "alpha": self.alpha, "x_min": self.x_min}


@dataclass(frozen=True)
class ExponentialJumps:
    rate: float
    kind: str = field(default="exponential", init=False, repr=False)

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError(f"exponential jump rate must be positive, got {self.rate}")

    def mean(self) -> float:
        return 1.0 / self.rate

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-self.rate * np.maximum(x, 0.0))

    def second_moment_below(self, x):
        x = np.asarray(x, dtype=float)
        # E[J^2; J <= x] = (2 / rate^2) * P(Gamma(3, rate) <= x)
        return 2.0 / self.rate**2 * special.gammainc(3, self.rate * np.maximum(x, 0.0))

    def sample(self, rng: np.random.Generator, size):
        return rng.standard_exponential(size) / self.rate

    def integrated_tail_ppf(self, u):
        u = np.asarray(u, dtype=float)
        return -np.log1p(-u) / self.rate

    def to_dict(self) -> dict:
        return {"kind": "exponential", "rate": self.rate}


JumpLaw = Union[ParetoJumps, ExponentialJumps]


@dataclass(frozen=True)
class StablePart:
    """Stable law ``S_alpha(scale, beta, 0)`` in the Samorodnitsky-Taqqu convention.

    ``alpha = 2`` is the Gaussian with variance ``2 * scale**2``.
    """

    alpha: float
    beta: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not (0 < self.alpha <= 2):
            raise DomainError(f"stable alpha must lie in (0, 2], got {self.alpha}")
        if not (-1 <= self.beta <= 1):
            raise DomainError(f"stable beta must lie in [-1, 1], got {self.beta}")
        if not self.scale > 0:
            raise DomainError(f"stable scale must be positive, got {self.scale}")

    def levy_density_constants(self) -> tuple[float, float]:
        """``(c_plus, c_minus)`` with Lévy density ``c_pm |x|**(-1 - alpha)`` on each half line."""
        a = self.alpha
        if a == 2:
            return 0.0, 0.0
        if a == 1:
            total = 2 * self.scale / math.pi
        else:
            total = self.scale**a / (-special.gamma(-a) * math.cos(math.pi * a / 2))
        return total * (1 + self.beta) / 2, total * (1 - self.beta) / 2

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "scale": self.scale}


@dataclass(frozen=True)
class LevyModel:
    """Drift + Gaussian part + (compound Poisson jumps | stable part)."""

    drift: float = 0.0
    sigma2: float = 0.0
    jump_intensity: float = 0.0
    jump: JumpLaw | None = None
    stable: StablePart | None = None

    def __post_init__(self):
        if self.sigma2 < 0:
            raise DomainError(f"sigma2 must be nonnegative, got {self.sigma2}")
        if self.jump_intensity < 0:
            raise DomainError(f"jump intensity must be nonnegative, got {self.jump_intensity}")
        if self.jump_intensity > 0 and self.jump is None:
            raise DomainError("positive jump intensity requires a jump law")
        if self.has_jumps and self.stable is not None:
            raise DomainError("a model carries either a compound Poisson part or a stable part, not both")
        if not (self.sigma2 > 0 or self.has_jumps or self.stable is not None):
            raise DomainError("model is deterministic: need sigma2 > 0, jumps, or a stable part")

    @property
    def has_jumps(self) -> bool:
        return self.jump is not None and self.jump_intensity > 0

    @property
    def is_gaussian(self) -> bool:
        """Brownian motion with drift, including the alpha = 2 stable case."""
        if self.has_jumps:
            return False
        return self.stable is None or self.stable.alpha == 2

    @property
    def gaussian_variance(self) -> float:
        """Variance per unit time of the continuous Gaussian component."""
        extra = 2 * self.stable.scale**2 if self.stable is not None and self.stable.alpha == 2 else 0.0
        return self.sigma2 + extra

    @property
    def is_compound_poisson(self) -> bool:
        """Pure drift plus compound Poisson jumps (no Gaussian, no stable part)."""
        return self.has_jumps and self.sigma2 == 0

    @property
    def is_spectrally_positive(self) -> bool:
        if self.stable is not None:
            return self.stable.alpha < 2 and self.stable.beta == 1
        return self.has_jumps

    @property
    def is_spectrally_negative(self) -> bool:
        if self.stable is not None:
            return self.stable.alpha == 2 or self.stable.beta == -1
        return not self.has_jumps

    def with_drain(self, a: float) -> "LevyModel":
        """The process ``X_t - a t``."""
        return replace(self, drift=self.drift - a)

    def centered(self) -> "LevyModel":
        return replace(self, drift=self.drift - mean(self))

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "drift": self.drift,
            "sigma2": self.sigma2,
            "lambda": self.jump_intensity,
        }
        if self.jump is not None:
            out["jump"] = self.jump.to_dict()
        if self.stable is not None:
            out["stable"] = self.stable.to_dict()
        return out


def _jump_from_dict(d: dict) -> JumpLaw:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind == "pareto":
        return ParetoJumps(alpha=float(d.pop("alpha")), x_min=float(d.pop("x_min", 1.0)))
    if kind == "exponential":
        return ExponentialJumps(rate=float(d.pop("rate")))
    raise DomainError(f"unknown jump kind {kind!r}")


def model_from_dict(d: dict) -> LevyModel:
    """Build a model from its JSON object; unknown keys raise ``KeyError``."""
    allowed = {"drift", "sigma2", "lambda", "jump", "stable"}
    unknown = set(d) - allowed
    if unknown:
        raise KeyError(f"unknown model field(s): {sorted(unknown)}")
    jump = _jump_from_dict(d["jump"]) if d.get("jump") is not None else None
    stable = StablePart(**d["stable"]) if d.get("stable") is not None else None
    return LevyModel(
        drift=float(d.get("drift", 0.0)),
        sigma2=float(d.get("sigma2", 0.0)),
        jump_intensity=float(d.get("lambda", 0.0)),
        jump=jump,
        stable=stable,
    )


@dataclass(frozen=True)
class HeavyTrafficFamily:
    """The family ``X_t - a t`` indexed by the drain rate ``a``.

    With a base mean ``mu > 0`` the family is indexed by ``rho = mu / a``; with a
    centred base it is indexed by ``a`` itself and ``a -> 0`` is heavy traffic.
    """

    base: LevyModel

    def __post_init__(self):
        mu = mean(self.base)
        if mu < 0:
            raise DomainError(f"base model must have nonnegative mean, got {mu}")

    @property
    def mu(self) -> float:
        return mean(self.base)

    @property
    def parameterization(self) -> str:
        return "rho" if self.mu > 0 else "a"

    def drain_for(self, param: float) -> float:
        """Drain rate ``a`` for a traffic parameter (``rho`` or ``a``)."""
        if self.parameterization == "rho":
            if not 0 < param < 1:
                raise DomainError(f"traffic intensity must lie in (0, 1), got {param}")
            return self.mu / param
        if not param > 0:
            raise DomainError(f"drain rate must be positive, got {param}")
        return param

    def rho(self, a: float) -> float:
        return self.mu / a

    def drained(self, a: float) -> LevyModel:
        return self.base.with_drain(a)


def mean(model: LevyModel) -> float:
    """``E X_1``; stable parts are centred by convention."""
    mu = model.drift
    if model.has_jumps:
        mu += model.jump_intensity * model.jump.mean()
    if model.stable is not None and model.stable.alpha <= 1:
        raise InfiniteMean(f"stable alpha {model.stable.alpha} <= 1 has no mean")
    return mu


def levy_tail(model: LevyModel, x):
    """``nu(x, inf)`` for the compound Poisson part."""
    if model.stable is not None and model.stable.alpha < 2:
        raise Unsupported("stable Lévy tails are only available asymptotically")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("levy_tail needs x > 0")
    if not model.has_jumps:
        out = np.zeros_like(x)
    else:
        out = model.jump_intensity * model.jump.tail(x)
    return out if out.ndim else float(out)


def truncated_second_moment(model: LevyModel, x, include_gaussian: bool = False):
    """``V(x) = int_{|y| <= x} y**2 nu(dy)``, optionally plus the Gaussian variance."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("truncated_second_moment needs x > 0")
    out = np.zeros_like(x)
    if model.has_jumps:
        out = out + model.jump_intensity * model.jump.second_moment_below(x)
    if model.stable is not None and model.stable.alpha < 2:
        cp, cm = model.stable.levy_density_constants()
        a = model.stable.alpha
        out = out + (cp + cm) * x ** (2 - a) / (2 - a)
    if include_gaussian:
        out = out + model.gaussian_variance
    return out if out.ndim else float(out)


_PHI_SERIES = np.array([(-1.0) ** k / math.factorial(k) for k in range(2, 15)])


def _g(u):
    """``2 (exp(-u) - 1 + u) / u**2``, free of cancellation for small ``u``."""
    u = np.asarray(u, dtype=float)
    small = u < 0.1
    us = np.where(small, u, 0.0)
    series = 2 * np.polyval(_PHI_SERIES[::-1], us)
    ub = np.where(small, 1.0, u)
    direct = 2 * (np.expm1(-ub) + ub) / ub**2
    return np.where(small, series, direct)


def _pareto_r(s: float, lam: float, jump: ParetoJumps) -> float:
    # substitute u = s x: r(s) = lam alpha m^alpha s^alpha int_{s m}^inf phi(u) u^(-alpha-1) du
    a, m = jump.alpha, jump.x_min
    low = s * m
    total = 0.0
    if low < 1:
        if a < 2:
            # v = u^(2 - a) removes the u^(1 - a) endpoint behaviour
            p = 2 - a
            val, _ = integrate.quad(
                lambda v: float(_g(v ** (1 / p))), low**p, 1.0, epsabs=0, epsrel=1e-13, limit=200
            )
            total += val / (2 * p)
        else:
            val, _ = integrate.quad(
                lambda w: float(_g(math.exp(w))) / 2 * math.exp((2 - a) * w),
                math.log(low), 0.0, epsabs=0, epsrel=1e-13, limit=200,
            )
            total += val
        low = 1.0
    tail, _ = integrate.quad(
        lambda u: math.exp(-u) * u ** (-a - 1), low, np.inf, epsabs=0, epsrel=1e-13, limit=200
    )
    total += tail + low ** (1 - a) / (a - 1) - low ** (-a) / a
    return lam * a * m**a * s**a * total


def cumulant_r(model: LevyModel, s: float) -> float:
    """``r(s) = int_0^inf (exp(-s x) - 1 + s x) nu(dx)`` for positive jumps."""
    if model.stable is not None and model.stable.alpha < 2:
        raise Unsupported("cumulant_r is defined for compound Poisson models only")
    if s < 0:
        raise DomainError(f"cumulant_r needs s >= 0, got {s}")
    if not model.has_jumps or s == 0:
        return 0.0
    lam, jump = model.jump_intensity, model.jump
    if isinstance(jump, ExponentialJumps):
        th = jump.rate
        return lam * s * s / (th * (th + s))
    jump.mean()  # raises InfiniteMean for alpha <= 1
    return _pareto_r(float(s), lam, jump)

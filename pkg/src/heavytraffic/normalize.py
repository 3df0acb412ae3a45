"""Solvers for the two normalization equations of the heavy-traffic limits.

``solve_contraction`` finds ``d`` with ``r(d) / d = ((1 - rho) / rho) mu**alpha``
(spectrally positive input, limit Mittag-Leffler) and ``solve_defna`` finds
``n`` with ``a n = d(n)`` (centred input in a stable domain of attraction).
Both treat the asymptotic relations as exact equalities at finite parameters
and solve them by bisection in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketFailure, DomainError, NonMonotone, Unsupported
from .models import (
    ExponentialJumps,
    LevyModel,
    ParetoJumps,
    cumulant_r,
    mean,
    truncated_second_moment,
)

__all__ = ["NormalizationSolution", "solve_contraction", "d_of_n", "solve_defna", "tail_index"]

D_BRACKET = (1e-12, 1e6)
T_GRID = np.logspace(-12, 12, 24 * 50 + 1)


@dataclass(frozen=True)
class NormalizationSolution:
    param: float
    d: float
    delta: float
    residual: float
    iterations: int
    bracket: tuple[float, float]
    # n(a) for solve_defna, None for solve_contraction
    n: float | None = None

    def to_dict(self) -> dict:
        return {
            "param": self.param,
            "d": self.d,
            "delta": self.delta,
            "residual": self.residual,
            "iterations": self.iterations,
        }


def tail_index(model: LevyModel) -> float:
    """Index of the stable domain of attraction of ``X_1`` (2 for finite variance)."""
    if model.stable is not None:
        return model.stable.alpha
    if model.has_jumps and isinstance(model.jump, ParetoJumps) and model.jump.alpha < 2:
        return model.jump.alpha
    return 2.0


def _log_bisect(fn, lo: float, hi: float, done, max_iter: int = 400):
    """Root of an increasing ``fn`` on ``[lo, hi]``; ``done(x, f)`` ends early."""
    iters = 0
    x = math.sqrt(lo * hi)
    fx = fn(x)
    while iters < max_iter:
        iters += 1
        x = math.sqrt(lo * hi)
        fx = fn(x)
        if done(x, fx):
            break
        if fx < 0:
            lo = x
        else:
            hi = x
        if hi / lo - 1 < 4e-16:
            break
    return x, fx, iters


def solve_contraction(model: LevyModel, rho: float, tol: float = 1e-10) -> NormalizationSolution:
    """Solve ``r(d) / d = ((1 - rho) / rho) mu**alpha`` for ``d``; ``delta = d / mu``."""
    if not 0 < rho < 1:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    if not (model.is_compound_poisson and model.is_spectrally_positive):
        raise Unsupported("contraction normalization needs a spectrally positive compound Poisson model")
    if not isinstance(model.jump, (ParetoJumps, ExponentialJumps)):
        raise Unsupported(f"unsupported jump law {model.jump!r}")
    mu = mean(model)
    if not mu > 0:
        raise DomainError(f"input mean must be positive, got {mu}")
    alpha = tail_index(model)
    target = (1 - rho) / rho * mu**alpha

    def ratio(d):
        return cumulant_r(model, d) / d

    lo, hi = D_BRACKET
    probe = np.geomspace(lo, hi, 10)
    vals = [ratio(p) for p in probe]
    if any(b < a * (1 - 1e-9) for a, b in zip(vals, vals[1:])):
        raise NonMonotone("d -> r(d)/d is not nondecreasing on the bracket")
    if not (vals[0] < target < vals[-1]):
        raise BracketFailure(
            f"no root of r(d)/d = {target:.6g} in [{lo:g}, {hi:g}] "
            f"(range {vals[0]:.3g} .. {vals[-1]:.3g})"
        )
    d, fd, iters = _log_bisect(
        lambda x: ratio(x) - target, lo, hi, lambda x, f: abs(f) / target <= tol * 0.1
    )
    residual = fd / target
    return NormalizationSolution(rho, d, d / mu, residual, iters, (lo, hi))


def d_of_n(model: LevyModel, n: float) -> float:
    """``d(n)``: smallest ``t`` beyond which ``V_eff(s) <= s**2 / n`` for all ``s >= t``.

    ``V_eff = sigma2 + V`` so the Gaussian case gives ``d(n) = sigma sqrt(n)``.
    """
    if not n > 0:
        raise DomainError(f"n must be positive, got {n}")
    level = 1.0 / n
    g = truncated_second_moment(model, T_GRID, include_gaussian=True) / T_GRID**2
    above = np.nonzero(g > level)[0]
    if above.size == 0:
        raise BracketFailure(f"V_eff(t) <= t^2/n on the whole grid for n={n:g}; no positive d(n)")
    i = above[-1]
    if i == T_GRID.size - 1:
        raise BracketFailure(f"V_eff(t) > t^2/n for all t <= {T_GRID[-1]:g}")
    lo, hi = float(T_GRID[i]), float(T_GRID[i + 1])

    def excess(t):
        # increasing in t on [lo, hi] once past the last crossing
        return level - truncated_second_moment(model, t, include_gaussian=True) / t**2

    t, _, _ = _log_bisect(excess, lo, hi, lambda x, f: f == 0)
    return t


def solve_defna(model: LevyModel, a: float, tol: float = 1e-10) -> NormalizationSolution:
    """Solve ``a n = d(n)`` for ``n``; ``d = d(n(a))`` and ``delta = 1 / d``."""
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    mu = mean(model)
    if abs(mu) > 1e-9 * max(1.0, abs(model.drift)):
        raise DomainError(f"defna normalization needs a centred model, mean is {mu}")

    def h(n):
        return d_of_n(model, n) / (n * a) - 1.0

    def h_safe(n):
        try:
            return h(n)
        except BracketFailure:
            return None

    lo = 1.0
    val = h_safe(lo)
    while val is None and lo < 1e30:
        lo *= 10
        val = h_safe(lo)
    while val is not None and val < 0 and lo > 1e-12:
        nxt = h_safe(lo / 10)
        if nxt is None:
            break
        lo, val = lo / 10, nxt
    if val is None or val < 0:
        raise BracketFailure(f"no n with d(n)/n > a={a:g}")
    hi = lo
    while h(hi) > 0:
        hi *= 10
        if hi > 1e40:
            raise BracketFailure(f"d(n)/n stays above a={a:g} for all n <= 1e40")
    n, fn, iters = _log_bisect(lambda x: -h(x), lo, hi, lambda x, f: abs(f) <= tol * 0.1)
    d = d_of_n(model, n)
    residual = (d / n - a) / a
    return NormalizationSolution(a, d, 1.0 / d, residual, iters, (lo, hi), n=n)

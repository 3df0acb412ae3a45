"""Convergence experiments: heavy-traffic sweeps, walk/path equivalence, Pruitt and HTIP checks."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, HeavyTrafficError, Unsupported
from .limits import EmpiricalReference, select_limit_law
from .models import HeavyTrafficFamily, LevyModel, mean, truncated_second_moment
from .normalize import NormalizationSolution, solve_contraction, solve_defna, tail_index
from .parallel import sample_chunks
from .rng import stream
from .simulate import (
    _cpp_path_sup,
    coupled_path_and_skeleton,
    exact_supremum,
    levy_sup_grid,
    rw_supremum_sample,
    stopping_level,
)

__all__ = [
    "EmpiricalDistribution",
    "ks_distance",
    "ks_two_sample",
    "ks_to_law",
    "ReportRow",
    "ConvergenceReport",
    "normalization_for",
    "sweep_heavy_traffic",
    "rw_levy_equivalence",
    "PruittTable",
    "pruitt_check",
    "HtipTable",
    "htip_condition_check",
    "gaussian_htip_family",
    "truncated_variance_htip_family",
]

ROW_COLUMNS = ("param", "delta", "n", "ks", "drift", "seconds")
MIN_HITS = 20


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _dump_json(obj) -> str:
    # repr of a Python float is the shortest round-tripping form, which is deterministic
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- KS machinery


class EmpiricalDistribution:
    """Sorted sample with a right-continuous ECDF."""

    def __init__(self, samples):
        s = np.sort(np.asarray(samples, dtype=float).ravel())
        if s.size == 0:
            raise DomainError("an empirical distribution needs at least one sample")
        if np.isnan(s).any():
            raise DomainError("samples contain NaN")
        self.samples = s

    @property
    def count(self) -> int:
        return int(self.samples.size)

    def ecdf(self, x):
        out = np.searchsorted(self.samples, np.asarray(x, dtype=float), side="right") / self.count
        return out if np.ndim(out) else float(out)

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.samples, q))


def _as_emp(x) -> EmpiricalDistribution:
    return x if isinstance(x, EmpiricalDistribution) else EmpiricalDistribution(x)


def ks_distance(emp, cdf: Callable) -> float:
    """``sup_x |F_n(x) - F(x)|`` evaluated on both sides of every jump of ``F_n``."""
    e = _as_emp(emp)
    x = e.samples
    f = np.asarray(cdf(x), dtype=float)
    n = e.count
    # ECDF just after each point counts ties; just before excludes them
    hi = np.searchsorted(x, x, side="right") / n
    lo = np.searchsorted(x, x, side="left") / n
    return float(min(1.0, max(np.max(hi - f), np.max(f - lo), 0.0)))


def ks_two_sample(a, b) -> float:
    """Two-sample KS statistic ``sup_x |F_a(x) - F_b(x)|``."""
    ea, eb = _as_emp(a), _as_emp(b)
    pts = np.concatenate((ea.samples, eb.samples))
    return float(np.max(np.abs(ea.ecdf(pts) - eb.ecdf(pts))))


def ks_to_law(samples, law) -> float:
    if isinstance(law, EmpiricalReference):
        return ks_two_sample(samples, law.samples)
    return ks_distance(samples, law.cdf)


# ---------------------------------------------------------------- reports


@dataclass
class ReportRow:
    param: float
    delta: float = math.nan
    n: int = 0
    ks: float = math.nan
    drift: float = math.nan
    seconds: float = math.nan
    status: str = "ok"
    error: str | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self, timings: bool = False) -> dict:
        out = {
            "param": self.param,
            "delta": self.delta,
            "n": self.n,
            "ks": self.ks,
            "drift": self.drift,
            "seconds": self.seconds if timings else None,
            "status": self.status,
        }
        if self.error is not None:
            out["error"] = self.error
        out.update(self.extras)
        return out


@dataclass
class ConvergenceReport:
    """Rows ordered toward heavy traffic, plus run metadata.

    Wall times are measured for every row but written only on request, so
    report files are byte-identical across runs.
    """

    rows: list[ReportRow]
    metadata: dict

    def to_dict(self, timings: bool = False) -> dict:
        return {"metadata": self.metadata, "rows": [r.to_dict(timings) for r in self.rows]}

    def to_json(self, timings: bool = False) -> str:
        return _dump_json(self.to_dict(timings))

    def to_csv(self, timings: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ROW_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(r.param), _fmt(r.delta), _fmt(r.n), _fmt(r.ks), _fmt(r.drift),
                        _fmt(r.seconds) if timings else ""])
        return buf.getvalue()

    def ks_values(self) -> list[float]:
        return [r.ks for r in self.rows]


# ---------------------------------------------------------------- normalization choice


def _ladder_available(model: LevyModel) -> bool:
    return model.is_compound_poisson and model.is_spectrally_positive


def normalization_for(model: LevyModel, a: float, tol: float = 1e-10) -> NormalizationSolution:
    """Contraction for spectrally positive compound Poisson input, ``defna`` otherwise.

    The ``defna`` route runs on the centred model at net drift ``a - mean``;
    ``solution.n`` then carries ``n(a)``.
    """
    mu = mean(model)
    if _ladder_available(model):
        if not a > mu:
            raise DomainError(f"drain rate {a} must exceed the mean {mu}")
        return solve_contraction(model, mu / a, tol)
    return solve_defna(model.centered(), a - mu, tol)


def _horizon_n(model: LevyModel, a: float, sol: NormalizationSolution, tol: float) -> float:
    if sol.n is not None:
        return sol.n
    return solve_defna(model.centered(), a - mean(model), tol).n


def _default_step(model: LevyModel, n_a: float) -> float:
    # refinement engines afford the unit grid; brute-force paths use 256 points per n(a)
    if model.is_gaussian:
        return 1.0
    return n_a / 256


def _grid_chunk(model, a, horizon, step, rng, size):
    one, two = levy_sup_grid(model, a, horizon, step, rng, size, doubled=True)
    return np.column_stack((one.value, two.value))


def _ladder_chunk(model, a, rng, size):
    return exact_supremum(model, a, rng, size).value


def _walk_chunk(model, kappa, eps, rng, size):
    return rw_supremum_sample(model, rng, eps, size, kappa=kappa).value


def _q99_drift(first: np.ndarray, second: np.ndarray) -> float:
    q1, q2 = np.quantile(first, 0.99), np.quantile(second, 0.99)
    return 0.0 if q2 == 0 else float(abs(q2 - q1) / q2)


def _failed(row: ReportRow, exc: Exception, t0: float) -> ReportRow:
    row.status = "failed"
    row.error = f"{type(exc).__name__}: {exc}"
    row.seconds = time.perf_counter() - t0
    return row


# ---------------------------------------------------------------- experiments


def sweep_heavy_traffic(
    family: HeavyTrafficFamily,
    params: Sequence[float],
    n_samples: int,
    seed: int,
    workers: int = 1,
    tol: float = 1e-10,
    c_horizon: float = 64.0,
    step: float | None = None,
    limit=None,
    n_reference: int = 100_000,
    log: Callable[[str], None] | None = None,
) -> ConvergenceReport:
    """KS distance of ``delta * sup`` to the limit law along ``params`` (``rho`` or ``a``).

    Spectrally positive compound Poisson families use exact ladder draws; all
    others use grid maxima over ``c_horizon * n(a)`` and report the relative
    change of the 99th percentile when the horizon is doubled.
    """
    base = family.base
    alpha = tail_index(base)
    if limit is None:
        limit = select_limit_law(base, alpha, seed=seed, n_reference=n_reference, workers=workers)
    meta = {
        "kind": "sweep",
        "model": base.to_dict(),
        "parameterization": family.parameterization,
        "alpha": alpha,
        "limit": limit.to_dict(),
        "seed": seed,
        "n_samples": n_samples,
        "c_horizon": c_horizon,
        "tol": tol,
    }
    rows = []
    for i, p in enumerate(params):
        t0 = time.perf_counter()
        row = ReportRow(param=p, n=n_samples)
        try:
            a = family.drain_for(p)
            sol = normalization_for(base, a, tol)
            row.delta = sol.delta
            row.extras.update(a=a, d=sol.d, residual=sol.residual)
            if abs(sol.residual) > tol:
                raise DomainError(f"normalization residual {sol.residual} exceeds tol {tol}")
            if _ladder_available(base):
                sampler = partial(_ladder_chunk, base, a)
                values = sample_chunks(sampler, n_samples, seed, (1, i), workers)
                row.drift = 0.0
                row.extras.update(method="ladder")
            else:
                n_a = _horizon_n(base, a, sol, tol)
                h = step if step is not None else _default_step(base, n_a)
                horizon = math.ceil(c_horizon * n_a / h) * h
                sampler = partial(_grid_chunk, base, a, horizon, h)
                both = sample_chunks(sampler, n_samples, seed, (1, i), workers).reshape(-1, 2)
                values = both[:, 0]
                row.drift = _q99_drift(both[:, 0], both[:, 1])
                row.extras.update(method="grid", horizon=horizon, step=h, n_a=n_a)
            row.ks = ks_to_law(sol.delta * values, limit)
            row.seconds = time.perf_counter() - t0
        except HeavyTrafficError as exc:
            _failed(row, exc, t0)
        rows.append(row)
        if log is not None:
            log(f"param={p:g} status={row.status} ks={row.ks:.4g} seconds={row.seconds:.1f}")
    return ConvergenceReport(rows, meta)


def pathwise_dominance(model: LevyModel, a: float, n_paths: int, seed: int, horizon: float = 1000.0) -> int:
    """Number of coupled paths whose skeleton maximum exceeds the path supremum (always 0)."""
    sups, skel = coupled_path_and_skeleton(model, a, horizon, stream(seed, 3), n_paths)
    return int(np.count_nonzero(skel > sups))


def rw_levy_equivalence(
    model: LevyModel,
    a_list: Sequence[float],
    n_samples: int,
    seed: int,
    eps: float = 1e-4,
    workers: int = 1,
    tol: float = 1e-10,
    dominance_paths: int = 0,
    log: Callable[[str], None] | None = None,
) -> ConvergenceReport:
    """Two-sample KS between ``delta * (unit-step walk maximum)`` and ``delta * (path supremum)``.

    Both sides are also compared with the limit law (``ks_walk``, ``ks_sup``).
    """
    if not (_ladder_available(model) or model.is_gaussian):
        raise Unsupported("the equivalence experiment needs an exact path-supremum sampler")
    alpha = tail_index(model)
    limit = select_limit_law(model, alpha)
    meta = {
        "kind": "equivalence",
        "model": model.to_dict(),
        "alpha": alpha,
        "limit": limit.to_dict(),
        "seed": seed,
        "n_samples": n_samples,
        "eps": eps,
        "tol": tol,
    }
    rows = []
    for i, a in enumerate(a_list):
        t0 = time.perf_counter()
        row = ReportRow(param=a, n=n_samples, drift=0.0)
        try:
            sol = normalization_for(model, a, tol)
            row.delta = sol.delta
            inc = model.with_drain(a)
            kappa = stopping_level(inc, eps, stream(seed, 2, i, 1 << 20))
            walk = sample_chunks(partial(_walk_chunk, inc, kappa, eps), n_samples, seed, (2, i, 0), workers)
            sup = sample_chunks(partial(_ladder_chunk, model, a), n_samples, seed, (2, i, 1), workers)
            row.ks = ks_two_sample(sol.delta * walk, sol.delta * sup)
            row.extras.update(
                d=sol.d,
                residual=sol.residual,
                kappa=kappa,
                ks_walk=ks_to_law(sol.delta * walk, limit),
                ks_sup=ks_to_law(sol.delta * sup, limit),
            )
            if dominance_paths and _ladder_available(model):
                row.extras["dominance_paths"] = dominance_paths
                row.extras["dominance_violations"] = pathwise_dominance(model, a, dominance_paths, seed)
            row.seconds = time.perf_counter() - t0
        except HeavyTrafficError as exc:
            _failed(row, exc, t0)
        rows.append(row)
        if log is not None:
            log(f"a={a:g} status={row.status} ks={row.ks:.4g} seconds={row.seconds:.1f}")
    return ConvergenceReport(rows, meta)


# ---------------------------------------------------------------- Pruitt bound


@dataclass
class PruittTable:
    """Cells ``{t, x, n, hits, p_hat, ratio, flagged}`` with ``ratio = p_hat x^2 / (t V(x))``."""

    cells: list[dict]
    metadata: dict

    @property
    def max_ratio(self) -> float:
        vals = [c["ratio"] for c in self.cells if not c["flagged"]]
        return max(vals) if vals else math.nan

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "cells": self.cells, "max_ratio": self.max_ratio}

    def to_json(self, timings: bool = False) -> str:
        return _dump_json(self.to_dict())

    def to_csv(self, timings: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ("t", "x", "n", "hits", "p_hat", "ratio", "flagged")
        w.writerow(cols)
        for c in self.cells:
            w.writerow([_fmt(c[k]) for k in cols])
        return buf.getvalue()


def _pruitt_chunk(model, t, rng, size):
    _, sup = _cpp_path_sup(model, t, size, rng, False)
    return sup


def pruitt_check(
    model: LevyModel,
    t_grid: Sequence[float],
    x_grid: Sequence[float],
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> PruittTable:
    """Monte Carlo ``P(sup_{s <= t} X_s >= x)`` against ``t V(x) / x^2`` for a centred model.

    Cells with fewer than 20 hits are flagged (``InsufficientHits``) and kept in
    the table but excluded from ``max_ratio``.
    """
    mu = mean(model)
    if abs(mu) > 1e-9 * max(1.0, abs(model.drift)):
        raise DomainError(f"the Pruitt check needs a centred model, mean is {mu}")
    if not model.is_compound_poisson:
        raise Unsupported("the Pruitt check simulates compound Poisson paths exactly")
    if any(t <= 0 for t in t_grid) or any(x <= 0 for x in x_grid):
        raise DomainError("grids must be positive")
    cells = []
    for i, t in enumerate(t_grid):
        sup = np.sort(sample_chunks(partial(_pruitt_chunk, model, t), n_samples, seed, (4, i), workers))
        for x in x_grid:
            hits = int(sup.size - np.searchsorted(sup, x, side="left"))
            p_hat = hits / n_samples
            v = float(truncated_second_moment(model, x))
            ratio = p_hat * x * x / (t * v) if v > 0 else math.inf
            flagged = hits < MIN_HITS or not math.isfinite(ratio)
            cell = {"t": t, "x": x, "n": n_samples, "hits": hits, "p_hat": p_hat, "ratio": ratio, "flagged": flagged}
            if flagged:
                cell["flag"] = "InsufficientHits" if hits < MIN_HITS else "ZeroV"
            cells.append(cell)
    meta = {"kind": "pruitt", "model": model.to_dict(), "seed": seed, "n_samples": n_samples, "min_hits": MIN_HITS}
    return PruittTable(cells, meta)


# ---------------------------------------------------------------- heavy-traffic invariance principle


@dataclass
class HtipTable:
    """Rows ``{a, mu, d, delta, product}`` with ``product = d delta |mu|``."""

    rows: list[dict]
    beta_hat: float | None
    drift: float | None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "rows": self.rows, "beta_hat": self.beta_hat, "drift": self.drift}

    def to_json(self, timings: bool = False) -> str:
        return _dump_json(self.to_dict())

    def to_csv(self, timings: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ("a", "mu", "d", "delta", "product")
        w.writerow(cols)
        for r in self.rows:
            w.writerow([_fmt(r[k]) for k in cols])
        return buf.getvalue()


def htip_condition_check(
    mu_fn: Callable[[float], float],
    d_fn: Callable[[float], float],
    delta_fn: Callable[[float], float],
    a_list: Sequence[float],
) -> HtipTable:
    """``d(a) delta(a) |mu(a)|`` along ``a_list``.

    ``beta_hat`` is the last value; ``drift = |last - second last| / last``.
    """
    rows = []
    for a in a_list:
        mu, d, delta = mu_fn(a), d_fn(a), delta_fn(a)
        rows.append({"a": a, "mu": mu, "d": d, "delta": delta, "product": d * delta * abs(mu)})
    beta_hat = rows[-1]["product"] if rows else None
    drift = abs(rows[-1]["product"] - rows[-2]["product"]) / rows[-1]["product"] if len(rows) > 1 else None
    return HtipTable(rows, beta_hat, drift)


def gaussian_htip_family(sigma2: float = 1.0):
    """``(mu, d, delta)`` for Brownian motion: ``mu = -a``, ``d = sigma2 / a^2``, ``delta = a / sigma2``."""
    return (lambda a: -a), (lambda a: sigma2 / a**2), (lambda a: a / sigma2)


def truncated_variance_htip_family(model: LevyModel, tol: float = 1e-10):
    """``(mu, d, delta)`` with ``d(a) = n(a)`` and ``delta(a) = 1 / d(n(a))`` for a centred model."""
    cache: dict[float, NormalizationSolution] = {}

    def sol(a):
        if a not in cache:
            cache[a] = solve_defna(model, a, tol)
        return cache[a]

    return (lambda a: -a), (lambda a: sol(a).n), (lambda a: sol(a).delta)

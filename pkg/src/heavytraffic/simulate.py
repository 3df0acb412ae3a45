"""Samplers for all-time suprema of Lévy processes and maxima of random walks.

Three families of methods:

* ``ladder``: exact draws of ``sup_t (X_t - a t)`` from the geometric sum of
  integrated-tail ladder heights (spectrally positive compound Poisson input),
  or from the exponential law for Brownian motion with drift.
* ``rw_truncated``: the maximum of the unit-step random walk, simulated until
  the walk sits ``kappa`` below its running maximum.
* ``grid``: the maximum over the time grid ``{0, h, ..., T}``; for compound
  Poisson input the exact path supremum over ``[0, T]`` is returned instead.

Brownian and exponential-jump compound Poisson paths are drawn coarse-first and
refined by exact bridge splitting (Gaussian bridge, or binomial/beta split of
the jump count and jump sum).  Subintervals that cannot beat the running
maximum are never refined: for compound Poisson the bound ``start + jump sum``
is deterministic, for Brownian motion an interval is dropped only when its
bridge exceeds the running maximum with probability below ``exp(-41)``.  The
result has the law of the fine-grid maximum.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .errors import DomainError, HorizonExceeded, Unsupported, UnstableSystem
from .limits import stable_sample, standard_stable_scale
from .models import ExponentialJumps, LevyModel, StablePart, mean
from .normalize import solve_defna
from .parallel import sample_chunks

__all__ = [
    "SupSample",
    "mg1_supremum_exact",
    "brownian_supremum_exact",
    "exact_supremum",
    "pk_lst",
    "stopping_level",
    "rw_supremum_sample",
    "levy_sup_grid",
    "default_horizon",
    "stable_sup_functional_sample",
    "stable_sup_functional_batch",
    "coupled_refinement_max",
    "coupled_path_and_skeleton",
    "format_samples_csv",
    "write_samples_csv",
    "read_samples_csv",
]

# log of the per-interval probability below which a Brownian bridge is not refined
_LOG_PRUNE = -41.0
_BLOCK = 64
_MAX_PADDED = 1 << 22
DEFAULT_MAX_STEPS = 1 << 27


@dataclass(frozen=True)
class SupSample:
    """One draw (``value`` a float) or a batch (``value`` an array) of suprema."""

    value: float | np.ndarray
    method: str
    horizon: float | None = None
    truncation_error_bound: float = 0.0


def format_samples_csv(sample: SupSample) -> str:
    """Sample batch as CSV text with header ``value,method,horizon,err_bound``."""
    values = np.atleast_1d(sample.value)
    horizon = "" if sample.horizon is None else f"{sample.horizon:.17g}"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["value", "method", "horizon", "err_bound"])
    for v in values:
        w.writerow([f"{v:.17g}", sample.method, horizon, f"{sample.truncation_error_bound:.17g}"])
    return buf.getvalue()


def write_samples_csv(path, sample: SupSample) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_samples_csv(sample))


def read_samples_csv(path) -> SupSample:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no samples")
    horizon = rows[0]["horizon"]
    return SupSample(
        np.array([float(r["value"]) for r in rows]),
        rows[0]["method"],
        float(horizon) if horizon else None,
        float(rows[0]["err_bound"]),
    )


def _wrap(values: np.ndarray, size, method, horizon=None, err=0.0) -> SupSample:
    v = values if size is not None else float(values[0])
    return SupSample(v, method, horizon, err)


# ---------------------------------------------------------------- exact laws


def _ladder_rho(model: LevyModel, a: float) -> float:
    if not (model.is_compound_poisson and model.is_spectrally_positive):
        raise Unsupported("ladder sampling needs a spectrally positive compound Poisson model without Gaussian part")
    drain = a - model.drift
    if drain <= 0:
        raise UnstableSystem(f"drain rate {a} does not exceed the drift {model.drift}")
    rho = model.jump_intensity * model.jump.mean() / drain
    if rho >= 1:
        raise UnstableSystem(f"traffic intensity {rho} >= 1")
    return rho


def _ladder_draw(rho: float, jump, n: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(n)
    if rho == 0:
        return np.zeros(n)
    k = np.floor(np.log1p(-u) / math.log(rho)).astype(np.int64)
    out = np.zeros(n)
    start = 0
    cum = np.cumsum(k)
    while start < n:
        base = cum[start - 1] if start else 0
        stop = int(np.searchsorted(cum, base + _MAX_PADDED, side="right"))
        stop = max(stop, start + 1)
        kk = k[start:stop]
        total = int(kk.sum())
        if total:
            heights = jump.integrated_tail_ppf(rng.random(total))
            nz = np.nonzero(kk)[0]
            offsets = np.concatenate(([0], np.cumsum(kk)[:-1]))[nz]
            out[start + nz] = np.add.reduceat(heights, offsets)
        start = stop
    return out


def mg1_supremum_exact(model: LevyModel, a: float, rng: np.random.Generator, size=None) -> SupSample:
    """Exact ``sup_t (X_t - a t)``: a geometric(rho) number of integrated-tail ladder heights."""
    rho = _ladder_rho(model, a)
    n = 1 if size is None else int(size)
    return _wrap(_ladder_draw(rho, model.jump, n, rng), size, "ladder", None, 0.0)


def brownian_supremum_exact(model: LevyModel, a: float, rng: np.random.Generator, size=None) -> SupSample:
    """Exact supremum of Brownian motion with drift: exponential with rate ``2 |drift| / variance``."""
    if not model.is_gaussian:
        raise Unsupported("exact Brownian supremum needs a Gaussian model")
    drift = model.drift - a
    if drift >= 0:
        raise UnstableSystem(f"net drift {drift} is not negative")
    rate = 2 * -drift / model.gaussian_variance
    n = 1 if size is None else int(size)
    return _wrap(rng.standard_exponential(n) / rate, size, "ladder", None, 0.0)


def exact_supremum(model: LevyModel, a: float, rng: np.random.Generator, size=None) -> SupSample:
    if model.is_gaussian:
        return brownian_supremum_exact(model, a, rng, size)
    return mg1_supremum_exact(model, a, rng, size)


def pk_lst(model: LevyModel, a: float, s: float) -> float:
    """``E exp(-s sup_t (X_t - a t)) = s (a - mu) / (s (a - mu) + r(s))``."""
    from .models import cumulant_r

    if not (model.is_compound_poisson and model.is_spectrally_positive):
        raise Unsupported("pk_lst needs a spectrally positive compound Poisson model without Gaussian part")
    mu = mean(model)
    if a <= mu:
        raise UnstableSystem(f"drain rate {a} does not exceed the mean {mu}")
    if not s > 0:
        raise DomainError(f"pk_lst needs s > 0, got {s}")
    lin = s * (a - mu)
    return lin / (lin + cumulant_r(model, s))


# ---------------------------------------------------------------- increments


def _increments(model: LevyModel, rng: np.random.Generator, shape, dt: float) -> np.ndarray:
    """Independent increments of ``model`` over time ``dt``."""
    out = np.full(shape, model.drift * dt)
    var = model.gaussian_variance
    if var > 0:
        out += math.sqrt(var * dt) * rng.standard_normal(shape)
    if model.has_jumps:
        counts = rng.poisson(model.jump_intensity * dt, shape)
        if isinstance(model.jump, ExponentialJumps):
            out += rng.gamma(counts, 1.0 / model.jump.rate)
        else:
            flat = counts.ravel()
            total = int(flat.sum())
            if total:
                jumps = model.jump.sample(rng, total)
                nz = np.nonzero(flat)[0]
                offsets = np.concatenate(([0], np.cumsum(flat)[:-1]))[nz]
                sums = np.zeros(flat.size)
                sums[nz] = np.add.reduceat(jumps, offsets)
                out += sums.reshape(counts.shape)
    st = model.stable
    if st is not None and st.alpha < 2:
        if st.alpha == 1 and st.beta != 0:
            raise Unsupported("alpha = 1 with beta != 0 is not strictly stable")
        out += stable_sample(st.alpha, st.beta, st.scale * dt ** (1 / st.alpha), rng, shape)
    return out


def _engine(model: LevyModel) -> str:
    if model.is_gaussian:
        return "gauss"
    if model.is_compound_poisson and isinstance(model.jump, ExponentialJumps):
        return "cpp_exp"
    return "brute"


# ---------------------------------------------------------------- bridge refinement


def _coarse_increments(kind, model, rng, shape, dt):
    """Coarse increments plus the (count, jump sum) pairs the refinement needs."""
    if kind == "gauss":
        z = rng.standard_normal(shape)
        return model.drift * dt + np.sqrt(model.gaussian_variance * dt) * z, None, None
    k = rng.poisson(model.jump_intensity * dt, shape)
    s = rng.gamma(k, 1.0 / model.jump.rate)
    return s + model.drift * dt, k, s


def _refine(kind, model, h, rng, sid, x0, x1, ln, k, s, half, best_half, best_all):
    """Split intervals down to single grid steps, updating per-sample maxima in place.

    ``ln`` counts grid steps; ``half`` marks intervals inside the first horizon,
    whose maximum is tracked separately in ``best_half``.
    """
    drift = model.drift
    var = model.gaussian_variance if kind == "gauss" else 0.0
    up = max(drift, 0.0)
    while sid.size:
        thr = np.where(half, best_half[sid], best_all[sid])
        if kind == "gauss":
            with np.errstate(divide="ignore", invalid="ignore"):
                logp = -2.0 * (thr - x0) * (thr - x1) / (var * ln * h)
            keep = (ln > 1) & (logp > _LOG_PRUNE)
        else:
            keep = (ln > 1) & (x0 + s + up * ln * h > thr)
        if not keep.any():
            break
        sid, x0, x1, ln, half = sid[keep], x0[keep], x1[keep], ln[keep], half[keep]
        if kind != "gauss":
            k, s = k[keep], s[keep]
        m = ln // 2
        f = m / ln
        if kind == "gauss":
            mid = x0 + f * (x1 - x0) + np.sqrt(var * h * ln * f * (1 - f)) * rng.standard_normal(sid.size)
        else:
            j = rng.binomial(k, f)
            b = rng.beta(np.maximum(j, 1), np.maximum(k - j, 1))
            frac = np.where(j == 0, 0.0, np.where(j == k, 1.0, b))
            s1 = s * frac
            mid = x0 + s1 + drift * h * m
        np.maximum.at(best_all, sid, mid)
        if half.any():
            np.maximum.at(best_half, sid[half], mid[half])
        sid = np.concatenate((sid, sid))
        x0, x1 = np.concatenate((x0, mid)), np.concatenate((mid, x1))
        ln = np.concatenate((m, ln - m))
        half = np.concatenate((half, half))
        if kind != "gauss":
            k = np.concatenate((j, k - j))
            s = np.concatenate((s1, s - s1))


def _coarse_size(n_steps: float) -> int:
    c = 2 ** int(round(math.log2(max(1.0, math.sqrt(n_steps)))))
    return int(min(max(c, 1), 1 << 14))


def _refined_grid_max(kind, model, h, n_steps, n, rng, doubled, coarse=None):
    """Maxima of ``n`` paths over ``n_steps`` grid steps (and ``2 n_steps`` if doubled)."""
    total = 2 * n_steps if doubled else n_steps
    c = coarse if coarse is not None else _coarse_size(total)
    lengths = [c] * (n_steps // c) + ([n_steps % c] if n_steps % c else [])
    first = len(lengths)
    if doubled:
        lengths = lengths + lengths
    lengths = np.array(lengths, dtype=np.int64)
    dt = lengths * h
    best_half = np.empty(n)
    best_all = np.empty(n)
    block = max(1, _MAX_PADDED // lengths.size)
    for lo in range(0, n, block):
        m = min(block, n - lo)
        inc, k, s = _coarse_increments(kind, model, rng, (m, lengths.size), dt[None, :])
        path = np.cumsum(inc, axis=1)
        start = np.concatenate((np.zeros((m, 1)), path[:, :-1]), axis=1)
        bh = np.maximum(0.0, path[:, :first].max(axis=1))
        ba = np.maximum(0.0, path.max(axis=1))
        sid = np.repeat(np.arange(m), lengths.size)
        half = np.tile(np.arange(lengths.size) < first, m)
        _refine(
            kind, model, h, rng, sid, start.ravel(), path.ravel(), np.tile(lengths, m),
            None if k is None else k.ravel(), None if s is None else s.ravel(),
            half, bh, ba,
        )
        best_half[lo:lo + m] = bh
        best_all[lo:lo + m] = ba
    return best_half, best_all


def _refined_walk_max(kind, model, kappa, n, rng, max_steps):
    """Unit-step walk maxima with the ``kappa`` stopping rule, refined from a coarse walk."""
    mu = mean(model)
    c = _coarse_size(2 * kappa / abs(mu) + 1)
    pos = np.zeros(n)
    best = np.zeros(n)
    active = np.arange(n)
    steps = 0
    blocks = []
    while active.size:
        if steps >= max_steps:
            raise HorizonExceeded(f"{active.size} walks did not stop within {max_steps} steps")
        inc, k, s = _coarse_increments(kind, model, rng, (active.size, _BLOCK), float(c))
        path = pos[active, None] + np.cumsum(inc, axis=1)
        run = np.maximum(best[active, None], np.maximum.accumulate(path, axis=1))
        hit = path <= run - kappa
        stopped = hit.any(axis=1)
        upto = np.where(stopped, hit.argmax(axis=1), _BLOCK - 1)
        cols = np.arange(_BLOCK)[None, :] <= upto[:, None]
        start = np.concatenate((pos[active, None], path[:, :-1]), axis=1)
        rows, cidx = np.nonzero(cols)
        blocks.append((active[rows], start[rows, cidx], path[rows, cidx], k[rows, cidx] if k is not None else None,
                       s[rows, cidx] if s is not None else None))
        best[active] = run[np.arange(active.size), upto]
        pos[active] = path[:, -1]
        active = active[~stopped]
        steps += _BLOCK * c
    sid = np.concatenate([b[0] for b in blocks])
    x0 = np.concatenate([b[1] for b in blocks])
    x1 = np.concatenate([b[2] for b in blocks])
    kk = np.concatenate([b[3] for b in blocks]) if kind != "gauss" else None
    ss = np.concatenate([b[4] for b in blocks]) if kind != "gauss" else None
    ln = np.full(sid.size, c, dtype=np.int64)
    half = np.zeros(sid.size, dtype=bool)
    _refine(kind, model, 1.0, rng, sid, x0, x1, ln, kk, ss, half, best.copy(), best)
    return best


# ---------------------------------------------------------------- brute force


def _brute_grid_max(model, h, n_steps, n, rng, doubled):
    total = 2 * n_steps if doubled else n_steps
    pos = np.zeros(n)
    best_half = np.zeros(n)
    best_all = np.zeros(n)
    block = max(1, min(512, _MAX_PADDED // max(n, 1)))
    done = 0
    while done < total:
        b = min(block, total - done)
        path = pos[:, None] + np.cumsum(_increments(model, rng, (n, b), h), axis=1)
        upto = n_steps - done
        if upto > 0:
            best_half = np.maximum(best_half, path[:, : min(upto, b)].max(axis=1))
        best_all = np.maximum(best_all, path.max(axis=1))
        pos = path[:, -1]
        done += b
    return best_half, best_all


def _brute_walk_max(model, kappa, n, rng, max_steps):
    pos = np.zeros(n)
    best = np.zeros(n)
    active = np.arange(n)
    steps = 0
    while active.size:
        if steps >= max_steps:
            raise HorizonExceeded(f"{active.size} walks did not stop within {max_steps} steps")
        b = max(16, min(1024, _MAX_PADDED // active.size))
        path = pos[active, None] + np.cumsum(_increments(model, rng, (active.size, b), 1.0), axis=1)
        run = np.maximum(best[active, None], np.maximum.accumulate(path, axis=1))
        hit = path <= run - kappa
        stopped = hit.any(axis=1)
        upto = np.where(stopped, hit.argmax(axis=1), b - 1)
        best[active] = run[np.arange(active.size), upto]
        pos[active] = path[:, -1]
        active = active[~stopped]
        steps += b
    return best


# ---------------------------------------------------------------- random walk maxima


def stopping_level(increment_model: LevyModel, eps: float, rng: np.random.Generator | None = None) -> float:
    """``kappa`` with ``P(max of a fresh walk > kappa) <= eps``.

    Uses the continuous-time supremum of the Lévy process with the same unit
    increments, which dominates the walk maximum: closed forms for exponential
    jumps and Brownian motion, a ladder-sampled quantile for Pareto jumps, and
    horizon-doubling pilot walks for everything else.
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    m = increment_model
    mu = mean(m)
    if mu >= 0:
        raise UnstableSystem(f"walk increments must have negative mean, got {mu}")
    if m.is_gaussian:
        return m.gaussian_variance * math.log(1 / eps) / (-2 * mu)
    if m.is_compound_poisson:
        rho = _ladder_rho(m, 0.0)
        if isinstance(m.jump, ExponentialJumps):
            # P(sup > x) = rho exp(-(rate - lambda / c) x) with c = -drift
            decay = m.jump.rate - m.jump_intensity / -m.drift
            return max(0.0, math.log(rho / eps) / decay)
        if rng is None:
            raise ValueError("a Pareto stopping level needs a pilot random stream")
        pilot = _ladder_draw(rho, m.jump, max(20_000, int(math.ceil(100 / eps))), rng)
        return float(np.quantile(pilot, 1 - eps))
    if rng is None:
        raise ValueError("the doubling calibration needs a pilot random stream")
    steps = 1024
    prev = None
    while steps <= 1 << 20:
        _, mx = _brute_grid_max(m, 1.0, steps, 2000, rng, False)
        q = float(np.quantile(mx, 1 - eps))
        if prev is not None and q <= 1.05 * prev:
            return q
        prev = q
        steps *= 2
    raise HorizonExceeded("pilot quantile did not stabilise within 2**20 steps")


def rw_supremum_sample(
    increment_model: LevyModel,
    rng: np.random.Generator,
    eps: float,
    size=None,
    kappa: float | None = None,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> SupSample:
    """Maximum of the random walk whose steps are distributed as ``X_1`` of ``increment_model``.

    Each walk runs until ``S_n <= M_n - kappa``; the returned maximum differs
    from the all-time maximum with probability at most ``eps``.
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if kappa is None:
        kappa = stopping_level(increment_model, eps, rng)
    n = 1 if size is None else int(size)
    kind = _engine(increment_model)
    if kind == "brute":
        vals = _brute_walk_max(increment_model, kappa, n, rng, max_steps)
    else:
        vals = _refined_walk_max(kind, increment_model, kappa, n, rng, max_steps)
    return _wrap(vals, size, "rw_truncated", None, eps)


# ---------------------------------------------------------------- grid / path suprema


def _cpp_path_sup(model: LevyModel, horizon: float, n: int, rng: np.random.Generator, doubled: bool):
    """Exact suprema over ``[0, T]`` (and ``[0, 2T]``) of compound Poisson paths with drift."""
    total_t = 2 * horizon if doubled else horizon
    counts = rng.poisson(model.jump_intensity * total_t, n)
    best_half = np.zeros(n)
    best_all = np.zeros(n)
    start = 0
    while start < n:
        kmax_run = np.maximum.accumulate(counts[start:])
        width = np.arange(1, kmax_run.size + 1) * np.maximum(kmax_run, 1)
        stop = start + max(1, int(np.searchsorted(width, _MAX_PADDED, side="right")))
        cnt = counts[start:stop]
        kmax = int(cnt.max()) if cnt.size else 0
        m = stop - start
        end_val = np.zeros(m)
        if kmax:
            mask = np.arange(kmax)[None, :] < cnt[:, None]
            times = np.where(mask, rng.random((m, kmax)) * total_t, np.inf)
            times.sort(axis=1)
            jumps = np.where(mask, model.jump.sample(rng, (m, kmax)), 0.0)
            after = np.cumsum(jumps, axis=1) + model.drift * np.where(mask, times, 0.0)
            after = np.where(mask, after, -np.inf)
            best_all[start:stop] = np.maximum(0.0, after.max(axis=1))
            first = mask & (times <= horizon)
            best_half[start:stop] = np.maximum(0.0, np.where(first, after, -np.inf).max(axis=1))
            jsum_half = np.where(first, jumps, 0.0).sum(axis=1)
            end_val = jumps.sum(axis=1)
        else:
            jsum_half = np.zeros(m)
        # with positive drift the supremum can sit at the horizon
        best_half[start:stop] = np.maximum(best_half[start:stop], jsum_half + model.drift * horizon)
        best_all[start:stop] = np.maximum(best_all[start:stop], end_val + model.drift * total_t)
        start = stop
    return best_half, best_all


def default_horizon(model: LevyModel, a: float, c: float = 64.0) -> float:
    """``c * n(a)`` with ``n`` solved for the centred model at net drift ``a - mean``."""
    net = a - mean(model)
    if net <= 0:
        raise UnstableSystem(f"drain rate {a} does not exceed the mean")
    return c * solve_defna(model.centered(), net).n


def _grid_pair(model, a, horizon, step, n, rng, doubled):
    if not horizon > 0 or not step > 0:
        raise DomainError("horizon and step must be positive")
    drained = model.with_drain(a)
    if model.is_compound_poisson and model.is_spectrally_positive:
        return _cpp_path_sup(drained, horizon, n, rng, doubled)
    n_steps = int(round(horizon / step))
    if n_steps < 1 or abs(n_steps * step - horizon) > 1e-9 * horizon:
        raise DomainError(f"horizon {horizon} is not a multiple of the step {step}")
    kind = _engine(drained)
    if kind == "brute":
        return _brute_grid_max(drained, step, n_steps, n, rng, doubled)
    return _refined_grid_max(kind, drained, step, n_steps, n, rng, doubled)


def levy_sup_grid(
    model: LevyModel,
    a: float,
    horizon: float,
    step: float,
    rng: np.random.Generator,
    size=None,
    doubled: bool = False,
):
    """Supremum of ``X_t - a t`` over ``[0, T]``.

    Compound Poisson models give the exact path supremum; all other models the
    maximum over the grid ``{0, step, ..., T}``.  With ``doubled`` the same
    paths are continued to ``2 T`` and a pair ``(sample_T, sample_2T)`` is
    returned.
    """
    n = 1 if size is None else int(size)
    first, both = _grid_pair(model, a, horizon, step, n, rng, doubled)
    one = _wrap(first, size, "grid", horizon)
    if doubled:
        return one, _wrap(both, size, "grid", 2 * horizon)
    return one


def _stable_functional_model(alpha, beta, scale):
    if not 1 < alpha <= 2:
        raise DomainError(f"alpha must lie in (1, 2], got {alpha}")
    if scale is None:
        scale = standard_stable_scale(alpha)
    return LevyModel(stable=StablePart(alpha, beta, scale))


def stable_sup_functional_sample(
    alpha: float,
    beta: float,
    rng: np.random.Generator,
    horizon: float = 64.0,
    step: float = 1 / 256,
    scale: float | None = None,
    size=None,
):
    """Grid draw of ``sup_{t <= T} (L_t - t)`` for a stable process ``L``.

    ``scale`` defaults to the V-normalized scale, the limit reached under the
    ``d(n)`` normalization (standard Brownian motion at ``alpha = 2``).
    """
    model = _stable_functional_model(alpha, beta, scale)
    n = 1 if size is None else int(size)
    first, _ = _grid_pair(model, 1.0, horizon, step, n, rng, False)
    return first if size is not None else float(first[0])


def _functional_chunk(alpha, beta, horizon, step, scale, rng, size):
    return stable_sup_functional_sample(alpha, beta, rng, horizon, step, scale, size)


def stable_sup_functional_batch(
    alpha, beta, n, seed, horizon=64.0, step=1 / 256, scale=None, workers=1
) -> np.ndarray:
    sampler = partial(_functional_chunk, alpha, beta, horizon, step, scale)
    return sample_chunks(sampler, n, seed, (7,), workers)


# ---------------------------------------------------------------- coupled constructions


def coupled_refinement_max(model: LevyModel, a: float, horizon: float, step: float, rng, size: int):
    """Grid maxima at ``step`` and ``step / 2`` on the same paths.

    Fine increments are drawn at ``step / 2`` and summed in pairs for the
    coarse grid, so the fine maximum dominates pathwise.
    """
    n_steps = int(round(horizon / step))
    fine = _increments(model.with_drain(a), rng, (size, 2 * n_steps), step / 2)
    fine_path = np.cumsum(fine, axis=1)
    coarse_path = fine_path[:, 1::2]
    return np.maximum(0.0, coarse_path.max(axis=1)), np.maximum(0.0, fine_path.max(axis=1))


def coupled_path_and_skeleton(model: LevyModel, a: float, horizon: float, rng, size: int, step: float = 1.0):
    """Exact path supremum and grid-skeleton maximum of the same compound Poisson paths on ``[0, T]``."""
    if not model.is_compound_poisson:
        raise Unsupported("coupled skeletons are built for compound Poisson models")
    drained = model.with_drain(a)
    n_steps = int(round(horizon / step))
    counts = rng.poisson(model.jump_intensity * horizon, size)
    sups = np.zeros(size)
    skel = np.zeros(size)
    grid = np.arange(1, n_steps + 1) * step
    for i in range(size):
        t = np.sort(rng.random(counts[i]) * horizon)
        j = model.jump.sample(rng, counts[i])
        c = np.cumsum(j)
        after = c + drained.drift * t
        sups[i] = max(0.0, after.max(initial=-np.inf), (c[-1] if c.size else 0.0) + drained.drift * horizon)
        idx = np.searchsorted(t, grid, side="right")
        at_grid = np.concatenate(([0.0], c))[idx] + drained.drift * grid
        skel[i] = max(0.0, at_grid.max(initial=-np.inf))
    return sups, skel

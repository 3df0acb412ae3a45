from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heavytraffic.errors import BracketFailure, DomainError
from heavytraffic.models import LevyModel, ParetoJumps, cumulant_r, mean, truncated_second_moment
from heavytraffic.normalize import d_of_n, solve_contraction, solve_defna

from conftest import pareto_r_oracle


def contraction_target(model, rho):
    return (1 - rho) / rho * mean(model) ** 1.5


def test_contraction_pareto_residual(pareto15):
    sol = solve_contraction(pareto15, 0.9, tol=1e-10)
    target = contraction_target(pareto15, 0.9)
    assert abs(cumulant_r(pareto15, sol.d) / sol.d - target) / target < 1e-10
    assert abs(sol.residual) < 1e-10
    assert sol.delta == pytest.approx(sol.d / 3, rel=1e-15)


def test_contraction_against_independent_root(pareto15):
    target = contraction_target(pareto15, 0.9)
    # independent root of the mpmath quadrature oracle
    d_ref = mp.findroot(lambda d: pareto_r_oracle(float(d), 1.5) / float(d) - target, (0.01, 0.1), solver="anderson")
    assert solve_contraction(pareto15, 0.9).d == pytest.approx(float(d_ref), rel=1e-8)


def test_contraction_light_tail_refuses(mm1):
    with pytest.raises(BracketFailure):
        solve_contraction(mm1, 0.5)
    # inside the reachable range the closed form d / (1 + d) = (1 - rho) / rho applies
    x = 1 / 9
    assert solve_contraction(mm1, 0.9).d == pytest.approx(x / (1 - x), rel=1e-9)


def test_contraction_monotone_in_rho(pareto15):
    rhos = [0.7, 0.9, 0.99, 0.999]
    ds = [solve_contraction(pareto15, r).d for r in rhos]
    assert all(a >= b for a, b in zip(ds, ds[1:]))
    deltas = [solve_contraction(pareto15, r).delta for r in (0.9, 0.99, 0.999)]
    assert deltas[0] > deltas[1] > deltas[2] > 0


def test_contraction_unreachable_target(pareto15):
    # r(d)/d increases to lambda E J = mu, so (1 - rho)/rho mu^alpha > mu has no root
    with pytest.raises(BracketFailure):
        solve_contraction(pareto15, 0.5)


def test_contraction_domain(pareto15):
    with pytest.raises(DomainError):
        solve_contraction(pareto15, 1.0)
    with pytest.raises(DomainError):
        solve_contraction(pareto15, 0.9, tol=0.0)


def test_d_of_n_gaussian(brownian):
    assert d_of_n(brownian, 100.0) == pytest.approx(10.0, rel=1e-10)
    assert d_of_n(LevyModel(sigma2=4.0), 100.0) == pytest.approx(20.0, rel=1e-10)


def test_d_of_n_pareto_asymptotics(pareto15):
    c = pareto15.centered()
    assert d_of_n(c, 1e8) / (3e8) ** (2 / 3) == pytest.approx(1.0, rel=0.02)


def test_d_of_n_is_last_crossing(pareto15):
    c = pareto15.centered()
    for n in (4.0, 50.0, 1e4):
        d = d_of_n(c, n)
        ts = np.geomspace(d, 1e6 * d, 400)
        assert np.all(truncated_second_moment(c, ts, include_gaussian=True) <= ts**2 / n * (1 + 1e-9))
        assert truncated_second_moment(c, d * (1 - 1e-6)) > (d * (1 - 1e-6)) ** 2 / n


def test_d_of_n_degenerate(pareto15):
    # V(t)/t^2 peaks below 1/3 without a Gaussian part, so small n has no positive d(n)
    with pytest.raises(BracketFailure):
        d_of_n(pareto15.centered(), 0.5)


@settings(max_examples=40, deadline=None)
@given(n1=st.floats(1e-3, 1e9), n2=st.floats(1e-3, 1e9))
def test_d_of_n_monotone(n1, n2):
    c = LevyModel(sigma2=0.2, jump_intensity=1.0, jump=ParetoJumps(1.5)).centered()
    lo, hi = sorted((n1, n2))
    assert d_of_n(c, lo) <= d_of_n(c, hi) * (1 + 1e-10)


def test_defna_gaussian(brownian):
    sol = solve_defna(brownian, 0.1)
    assert sol.n == pytest.approx(100.0, rel=1e-9)
    assert sol.delta == pytest.approx(0.1, rel=1e-9)
    for a in (1e-1, 1e-2, 1e-3):
        assert solve_defna(brownian, a).delta == pytest.approx(a, rel=1e-9)
        assert solve_defna(LevyModel(sigma2=2.5), a).delta == pytest.approx(a / 2.5, rel=1e-9)


def test_defna_pareto_asymptotics(pareto15):
    a = 1e-3
    sol = solve_defna(pareto15.centered(), a)
    assert a**3 * sol.n / 9 == pytest.approx(1.0, rel=0.02)


def test_defna_residual_literal(pareto15):
    c = pareto15.centered()
    for a in (0.5, 1e-2, 1e-4):
        sol = solve_defna(c, a, tol=1e-10)
        assert abs(d_of_n(c, sol.n) / (a * sol.n) - 1) <= 1e-10
        assert sol.d > 0 and sol.delta == 1 / sol.d


def test_defna_monotone_delta(pareto15):
    c = pareto15.centered()
    a_grid = [0.3, 0.1, 0.03, 0.01, 0.003, 0.001]
    deltas = [solve_defna(c, a).delta for a in a_grid]
    assert all(x >= y for x, y in zip(deltas, deltas[1:]))


def test_defna_requires_centred(pareto15):
    with pytest.raises(DomainError):
        solve_defna(pareto15, 0.1)


def test_normalizations_consistent(pareto15):
    """Contraction and defna scalings share the regular-variation index at matched drift."""
    mu = mean(pareto15)
    a_grid = np.array([1e-2, 1e-3, 1e-4, 1e-5])
    ratios = [solve_contraction(pareto15, mu / (mu + a)).delta / solve_defna(pareto15.centered(), a).delta for a in a_grid]
    slopes = np.diff(np.log(ratios)) / np.diff(np.log(a_grid))
    assert abs(slopes[-1]) < 0.05
    assert all(r > 0 for r in ratios)


def test_solution_json(pareto15):
    sol = solve_contraction(pareto15, 0.99)
    assert set(sol.to_dict()) == {"param", "d", "delta", "residual", "iterations"}
    assert sol.to_dict()["param"] == 0.99

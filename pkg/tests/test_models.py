from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heavytraffic.errors import DomainError, InfiniteMean, Unsupported
from heavytraffic.models import (
    ExponentialJumps,
    HeavyTrafficFamily,
    LevyModel,
    ParetoJumps,
    StablePart,
    cumulant_r,
    levy_tail,
    mean,
    model_from_dict,
    truncated_second_moment,
)

from conftest import pareto_r_oracle

S_GRID = np.geomspace(1e-4, 1e2, 61)


def test_mean_examples(pareto15, mm1):
    assert mean(LevyModel(drift=-1.0, sigma2=1.0)) == -1.0
    assert mean(mm1) == 1.0
    assert mean(pareto15) == pytest.approx(3.0, rel=1e-15)


def test_mean_infinite():
    with pytest.raises(InfiniteMean):
        mean(LevyModel(jump_intensity=1.0, jump=ParetoJumps(1.0)))
    with pytest.raises(InfiniteMean):
        mean(LevyModel(stable=StablePart(0.8, 1.0, 1.0)))
    assert mean(LevyModel(drift=0.5, stable=StablePart(1.5, 0.3, 1.0))) == 0.5


def test_levy_tail_examples(pareto15):
    assert levy_tail(pareto15, 4.0) == pytest.approx(0.125, rel=1e-15)
    assert levy_tail(pareto15, 1.0) == 1.0
    exp2 = LevyModel(jump_intensity=2.0, jump=ExponentialJumps(1.0))
    assert levy_tail(exp2, 1e-300) == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(Unsupported):
        levy_tail(LevyModel(stable=StablePart(1.5, 0.0, 1.0)), 1.0)


def test_levy_tail_regular_variation(pareto15):
    m = LevyModel(jump_intensity=2.5, jump=ParetoJumps(1.3, 0.7))
    xs = np.geomspace(0.7, 1e8, 50)
    scaled = levy_tail(m, xs) * xs**1.3
    np.testing.assert_allclose(scaled, 2.5 * 0.7**1.3, rtol=1e-12)
    assert np.all(np.diff(levy_tail(pareto15, np.geomspace(0.01, 1e3, 100))) <= 0)


def test_truncated_second_moment_examples(pareto15):
    assert truncated_second_moment(pareto15, 4.0) == pytest.approx(3.0, rel=1e-13)
    assert truncated_second_moment(pareto15, 0.5) == 0.0
    with_gauss = LevyModel(sigma2=0.7, jump_intensity=1.0, jump=ParetoJumps(1.5))
    assert truncated_second_moment(with_gauss, 0.5, include_gaussian=True) == 0.7
    exp1 = LevyModel(jump_intensity=1.0, jump=ExponentialJumps(1.0))
    # closed form of the integral of y^2 e^{-y} over [0, 1]
    assert truncated_second_moment(exp1, 1.0) == pytest.approx(2 - 5 / math.e, rel=1e-13)
    assert truncated_second_moment(exp1, 1.0) == pytest.approx(0.160603, abs=5e-7)


def test_truncated_second_moment_monotone():
    m = LevyModel(sigma2=0.3, jump_intensity=1.0, jump=ParetoJumps(1.7, 2.0))
    xs = np.geomspace(1e-3, 1e6, 200)
    v = truncated_second_moment(m, xs)
    assert np.all(v >= 0) and np.all(np.diff(v) >= 0)
    assert np.all(truncated_second_moment(m, xs, include_gaussian=True) >= 0.3)


def test_stable_second_moment_is_power():
    st_ = StablePart(1.5, 0.0, 1.0)
    m = LevyModel(stable=st_)
    cp, cm = st_.levy_density_constants()
    assert truncated_second_moment(m, 4.0) == pytest.approx((cp + cm) * 4.0**0.5 / 0.5, rel=1e-13)


def test_cumulant_r_examples(mm1, pareto15):
    assert cumulant_r(mm1, 0.0) == 0.0
    assert cumulant_r(pareto15, 0.0) == 0.0
    assert cumulant_r(mm1, 1.0) == pytest.approx(0.5, rel=1e-14)
    assert cumulant_r(pareto15, 0.1) == pytest.approx(pareto_r_oracle(0.1, 1.5), rel=1e-10)


@pytest.mark.parametrize("alpha,x_min", [(1.5, 1.0), (1.2, 0.5), (1.9, 3.0)])
@pytest.mark.parametrize("s", [1e-4, 1e-2, 0.3, 1.0, 7.0, 100.0])
def test_pareto_r_against_quadrature(alpha, x_min, s):
    m = LevyModel(jump_intensity=1.7, jump=ParetoJumps(alpha, x_min))
    assert cumulant_r(m, s) == pytest.approx(pareto_r_oracle(s, alpha, x_min, 1.7), rel=1e-10)


def test_cumulant_r_unsupported():
    with pytest.raises(Unsupported):
        cumulant_r(LevyModel(stable=StablePart(1.5, 1.0, 1.0)), 1.0)


@pytest.mark.parametrize(
    "model",
    [
        LevyModel(jump_intensity=1.0, jump=ParetoJumps(1.5)),
        LevyModel(jump_intensity=2.0, jump=ParetoJumps(1.1, 0.3)),
        LevyModel(jump_intensity=0.5, jump=ExponentialJumps(3.0)),
    ],
)
def test_r_shape(model):
    r = np.array([cumulant_r(model, s) for s in S_GRID])
    assert np.all(r >= 0)
    assert np.all(np.diff(r) >= -1e-9 * r[1:])
    # convexity on a geometric grid through chord slopes
    slopes = np.diff(r) / np.diff(S_GRID)
    assert np.all(np.diff(slopes) >= -1e-9 * np.abs(slopes[1:]))
    ratio = r / S_GRID
    assert np.all(np.diff(ratio) >= -1e-9 * ratio[1:])


@settings(max_examples=50, deadline=None)
@given(
    drift=st.floats(-5, 5),
    lam=st.floats(0.01, 10),
    alpha=st.floats(1.05, 3.0),
    a=st.floats(0, 10),
)
def test_mean_under_drain(drift, lam, alpha, a):
    m = LevyModel(drift=drift, jump_intensity=lam, jump=ParetoJumps(alpha))
    # equal up to the reassociation of one floating-point sum
    scale = abs(drift) + abs(mean(m) - drift) + a
    assert abs(mean(m.with_drain(a)) - (mean(m) - a)) <= 4 * math.ulp(scale)


def test_model_validation():
    with pytest.raises(DomainError):
        LevyModel(drift=-1.0)
    with pytest.raises(DomainError):
        LevyModel(jump_intensity=1.0, jump=ParetoJumps(1.5), stable=StablePart(1.5, 0.0, 1.0))
    with pytest.raises(DomainError):
        ParetoJumps(-1.0)
    with pytest.raises(DomainError):
        ExponentialJumps(0.0)


def test_model_json_round_trip(pareto15):
    d = {"drift": 0.5, "sigma2": 0.0, "lambda": 1.0, "jump": {"kind": "pareto", "alpha": 1.5, "x_min": 1.0}}
    m = model_from_dict(d)
    assert m == LevyModel(drift=0.5, jump_intensity=1.0, jump=ParetoJumps(1.5, 1.0))
    assert model_from_dict(m.to_dict()) == m
    s = LevyModel(stable=StablePart(1.5, 1.0, 2.0))
    assert model_from_dict(s.to_dict()) == s
    with pytest.raises(KeyError):
        model_from_dict({"drift": 0.0, "sigma": 1.0})


def test_family_parameterization(pareto15, brownian):
    fam = HeavyTrafficFamily(pareto15)
    assert fam.parameterization == "rho"
    assert fam.drain_for(0.9) == pytest.approx(3 / 0.9)
    assert fam.rho(fam.drain_for(0.99)) == pytest.approx(0.99)
    with pytest.raises(DomainError):
        fam.drain_for(1.0)
    assert HeavyTrafficFamily(brownian).parameterization == "a"

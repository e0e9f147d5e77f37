import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roadfield.model import (FieldReaction, ModelParams, RoadReaction, adaptive_simpson, kpp_speed,
                             validate_field_reaction, validate_road_reaction)


def test_params_reject_nonpositive():
    for bad in ({"d": 0}, {"D": -1}, {"mu": 0}, {"nu": -2}):
        kw = dict(d=1, D=1, mu=1, nu=1)
        kw.update(bad)
        with pytest.raises(ValueError):
            ModelParams(**kw)


def test_oriented_flips_transport():
    p = ModelParams(1, 2, 1, 1, q=1.5)
    assert p.oriented(1) == p
    assert p.oriented(-1).q == -1.5
    with pytest.raises(ValueError):
        p.oriented(0)


def test_kpp_speed():
    assert kpp_speed(1.0, 1.0) == 2.0
    assert kpp_speed(2.0, 0.5) == pytest.approx(2.0)


def test_logistic_field_passes_all_checks():
    diag = validate_field_reaction(FieldReaction.logistic(1.0))
    assert diag.ok
    assert diag["f(s)/s nonincreasing"].passed


def test_field_not_kpp_is_flagged():
    # f(s) = s (1 - s)(1 + 3 s) exceeds its tangent f'(0) s = s near 0
    f = FieldReaction.custom(lambda s: np.asarray(s) * (1 - np.asarray(s)) * (1 + 3 * np.asarray(s)), 1.0)
    diag = validate_field_reaction(f)
    assert not diag.ok
    assert not diag["f(s)<=f'(0)s"].passed
    assert diag["f(s)<=f'(0)s"].violation is not None


def test_field_with_wrong_zero():
    f = FieldReaction.custom(lambda s: np.asarray(s) * (2 - np.asarray(s)), 2.0)
    names = {c.name for c in validate_field_reaction(f).failures()}
    assert "f(1)=0" in names


def test_logistic_integral_matches_quadrature():
    f = FieldReaction.logistic(1.7)
    for a, b in [(0.0, 1.0), (0.3, 0.9), (1.0, 1.6)]:
        assert f.integral(a, b) == pytest.approx(adaptive_simpson(lambda s: float(f(s)), a, b), abs=1e-12)


def test_from_samples_interpolates():
    s = np.linspace(0, 2, 2001)
    f = FieldReaction.from_samples(s, s * (1 - s))
    assert f.f_prime_0 == pytest.approx(1.0, abs=2e-3)
    assert float(f(0.5)) == pytest.approx(0.25, abs=1e-6)


def test_road_reactions():
    g = RoadReaction.mortality(0.5)
    assert g.g_prime_0 == -0.5 and g.rho == 0.5
    assert RoadReaction.mortality(0).kind == "zero"
    with pytest.raises(ValueError):
        RoadReaction.mortality(-1)
    gl = RoadReaction.logistic(2.0, 3.0)
    assert gl.S_star == 3.0 and gl.S_M == 1.5
    assert float(gl(3.0)) == 0.0


def test_validate_road_reports_S():
    g = RoadReaction.custom(lambda u: np.asarray(u) * (1 - np.asarray(u) / 2), 1.0, concave=True)
    diag = validate_road_reaction(g)
    assert diag.ok
    assert diag.S_star == pytest.approx(2.0, abs=1e-2)
    assert diag.S_M == pytest.approx(1.0, abs=1e-2)


def test_road_without_root_fails():
    g = RoadReaction.custom(lambda u: np.asarray(u), 1.0)
    assert not validate_road_reaction(g, s_max=5.0)["exists S>0: g(S)<=0"].passed


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.0, 4.0))
def test_lipschitz_bounds_slope(r, s, s_max):
    f = FieldReaction.logistic(r)
    g = RoadReaction.logistic(s, 1.0)
    x = np.linspace(0, s_max, 501)
    if s_max > 0:
        assert np.all(np.abs(np.diff(f(x)) / np.diff(x)) <= f.lipschitz(s_max) * (1 + 1e-9))
        assert np.all(np.abs(np.diff(g(x)) / np.diff(x)) <= g.lipschitz(s_max) * (1 + 1e-9))


def test_adaptive_simpson_exact_on_cubics():
    assert adaptive_simpson(lambda s: s ** 3 - s, 0.0, 2.0) == pytest.approx(2.0, abs=1e-14)
    assert adaptive_simpson(math.sin, 0, math.pi) == pytest.approx(2.0, abs=1e-10)

import numpy as np
import pytest

from roadfield.model import FieldReaction, ModelParams, RoadReaction
from roadfield.stationary import (BLOWS_UP, HITS_ZERO, POSITIVE, StationaryError, boundary_values,
                                  check_bounds, energy_residual, find_Ustar, shoot,
                                  stationary_mortality, theta_general, theta_mortality)

import oracles

P = ModelParams(1.0, 1.0, 1.0, 1.0)
F = FieldReaction.logistic(1.0)

# road values U = nu sigma0 / (mu + rho), sigma0 the energy root
FROZEN_U = {0.5: 0.4873463090616, 1.0: 0.3175004267759, 2.0: 0.1858020852393}


@pytest.mark.parametrize("rho,U", sorted(FROZEN_U.items()))
def test_theta_root_frozen(rho, U):
    prof = stationary_mortality(P, F, rho)
    assert prof.U == pytest.approx(U, abs=1e-12)
    sigma = oracles.logistic_theta_root(1, 1, 1, rho)
    assert prof.V0 == pytest.approx(sigma, abs=1e-12)
    assert energy_residual(prof, P, F) < 1e-12
    assert prof.converged


def test_no_mortality_gives_constant_state():
    prof = stationary_mortality(ModelParams(1.0, 3.0, 2.0, 0.5), F, 0.0)
    assert prof.U == pytest.approx(0.25, abs=1e-15)
    assert np.max(np.abs(prof.V - 1.0)) < 1e-12


@pytest.mark.parametrize("rho", [0.5, 2.0])
def test_shooting_matches_theta_root(rho):
    g = RoadReaction.mortality(rho)
    shot = find_Ustar(P, g, F)
    root = stationary_mortality(P, F, rho)
    assert abs(shot.U - root.U) < 1e-10
    assert shot.method == "shooting" and "minimal-candidate" not in shot.notes


def test_theta_general_is_scaled_mortality_theta():
    p = ModelParams(1.3, 1.0, 0.8, 1.7)
    rho = 0.6
    g = RoadReaction.mortality(rho)
    for U in [0.1, 0.3, 0.5]:
        sigma = (p.mu + rho) * U / p.nu
        if sigma <= 1:
            assert theta_general(p, g, F, U) == pytest.approx(2 * p.d * theta_mortality(p, F, rho, sigma),
                                                              abs=1e-12)


def test_logistic_road_state():
    p = ModelParams(1.0, 1.0, 2.0, 1.0)
    g = RoadReaction.logistic(1.0, 1.0)
    prof = find_Ustar(p, g, F)
    assert prof.U == pytest.approx(0.7026846506, abs=1e-9)
    assert abs(theta_general(p, g, F, prof.U)) < 1e-9
    assert check_bounds(prof, p, g)
    # S_* = 1 > nu/mu = 1/2, so V >= 1
    assert prof.V0 > 1.0 and prof.V_prime_0 < 0


def test_shoot_classifications():
    g = RoadReaction.mortality(1.0)
    U = FROZEN_U[1.0]
    assert shoot(P, g, F, 0.5 * U, y_max=20.0).classification == HITS_ZERO
    assert shoot(P, g, F, 1.5 * U, y_max=20.0).classification == BLOWS_UP
    tr = shoot(P, RoadReaction.zero(), F, 1.0, y_max=5.0)
    assert tr.classification == POSITIVE
    assert tr.energy_drift < 1e-10


def test_boundary_values():
    p = ModelParams(1.5, 1.0, 0.8, 2.0)
    V0, Vp0 = boundary_values(p, RoadReaction.mortality(0.4), 0.5)
    assert V0 == pytest.approx((0.8 * 0.5 + 0.4 * 0.5) / 2.0)
    assert Vp0 == pytest.approx(0.4 * 0.5 / 1.5)


def test_bad_bracket_is_reported():
    with pytest.raises(StationaryError):
        find_Ustar(P, RoadReaction.mortality(1.0), F, bracket=(0.5, 0.9))


def test_nonconcave_road_flagged():
    g = RoadReaction.custom(lambda u: np.asarray(u) ** 2 * (1 - np.asarray(u)), 0.0, S=1.0)
    prof = find_Ustar(ModelParams(1.0, 1.0, 1.0, 1.0), g, F, tol=1e-9)
    assert "minimal-candidate" in prof.notes


def test_theta_domain():
    with pytest.raises(ValueError):
        theta_mortality(P, F, 1.0, 1.5)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from migmedian.anisotropy import (ad_ratio, anisotropy, anisotropy_index, jbld_epsilon_star,
                                  jbld_root_function)
from migmedian.errors import DegenerateIsotropyError
from migmedian.geometry import DETECTOR_MEASURES, dist2

from conftest import random_hpd

spectra = st.lists(st.floats(1e-4, 1e4), min_size=1, max_size=8)


@pytest.mark.parametrize("measure", DETECTOR_MEASURES)
@pytest.mark.parametrize("c", [0.1, 1.0, 10.0])
def test_isotropic_is_zero(measure, c):
    rep = anisotropy(measure, c * np.eye(4))
    assert rep.index <= 1e-12
    assert rep.epsilon_star == pytest.approx(c, rel=1e-12)


def test_closed_forms():
    assert anisotropy("lem", np.diag([1.0, np.e**2])).index == pytest.approx(2.0, abs=1e-10)
    rep = anisotropy("skld", np.diag([1.0, 4.0]))
    assert rep.epsilon_star == pytest.approx(2.0, abs=1e-12)
    assert rep.index == pytest.approx(1.0, abs=1e-10)
    rep = anisotropy("jbld", np.diag([1.0, 4.0]))
    assert rep.epsilon_star == pytest.approx(2.0, abs=1e-12)
    assert rep.index == pytest.approx(np.log(4.5) - np.log(4), abs=1e-10)
    assert rep.index == pytest.approx(0.11778303565638346, abs=1e-12)
    assert anisotropy("lem", 5 * np.eye(3)).epsilon_star == pytest.approx(5.0, rel=1e-14)


def test_jbld_root_closed_forms():
    assert jbld_epsilon_star([1.0, 1.0]) == pytest.approx(1.0, rel=1e-15)
    assert jbld_epsilon_star([1.0, 4.0]) == pytest.approx(2.0, rel=1e-14)
    assert jbld_root_function(2.0, [1.0, 4.0]) == pytest.approx(0.0, abs=1e-15)


def test_root_function_signs():
    lam = np.array([0.5, 2.0, 30.0])
    assert jbld_root_function(1e-9, lam) < 0
    assert jbld_root_function(1e9, lam) > 0


@pytest.mark.parametrize("n", [2, 4, 8])
def test_root_unique_on_grid(n):
    rng = np.random.default_rng(n)
    for _ in range(30):
        lam = np.exp(rng.uniform(-4, 4, size=n))
        grid = np.geomspace(1e-6 * lam.min(), 1e6 * lam.max(), 200)
        g = jbld_root_function(grid, lam)
        assert np.count_nonzero(np.diff(np.sign(g)) != 0) == 1
        eps = jbld_epsilon_star(lam)
        assert abs(jbld_root_function(eps, lam)) <= 1e-12 * n / eps
        assert lam.min() <= eps <= lam.max()


@settings(max_examples=60, deadline=None)
@given(spectra, st.floats(1e-3, 1e3))
def test_epsilon_star_scales(lam, c):
    lam = np.array(lam)
    assert jbld_epsilon_star(c * lam) == pytest.approx(c * jbld_epsilon_star(lam), rel=1e-12)


@pytest.mark.parametrize("measure", DETECTOR_MEASURES)
def test_scale_and_unitary_invariance(measure, rng):
    R = random_hpd(rng, 4, cond=40)
    a = anisotropy(measure, R)
    U, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    b = anisotropy(measure, 7.5 * U @ R @ U.conj().T)
    assert b.index == pytest.approx(a.index, rel=1e-9)
    assert b.epsilon_star == pytest.approx(7.5 * a.epsilon_star, rel=1e-9)


@pytest.mark.parametrize("measure", DETECTOR_MEASURES)
def test_epsilon_star_minimizes(measure, rng):
    for _ in range(5):
        R = random_hpd(rng, 5, cond=100)
        rep = anisotropy(measure, R)
        assert dist2(measure, R, rep.epsilon_star * np.eye(5)) == pytest.approx(rep.index, rel=1e-9)
        for f in (0.9, 0.99, 1.01, 1.1):
            assert dist2(measure, R, f * rep.epsilon_star * np.eye(5)) >= rep.index - 1e-12


def test_vectorized_matches_single(rng):
    R = random_hpd(rng, 3, cond=30, size=6)
    for measure in DETECTOR_MEASURES:
        eps, a = anisotropy_index(measure, R)
        for i in range(6):
            rep = anisotropy(measure, R[i])
            assert eps[i] == pytest.approx(rep.epsilon_star, rel=1e-14)
            assert a[i] == pytest.approx(rep.index, rel=1e-12, abs=1e-15)


def test_ad_ratio():
    assert ad_ratio(3.0, 1.5) == 2.0
    np.testing.assert_allclose(ad_ratio([1.0, 4.0], [2.0, 2.0]), [0.5, 2.0])
    with pytest.raises(DegenerateIsotropyError):
        ad_ratio(1.0, 0.0)


def test_errors():
    with pytest.raises(ValueError):
        anisotropy("airm", np.eye(2))
    with pytest.raises(ValueError):
        jbld_epsilon_star([1.0, -1.0])
    with pytest.raises(ValueError):
        anisotropy("lem", np.eye(2)[None])

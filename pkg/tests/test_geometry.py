import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from migmedian.geometry import Measure, dist, dist2

from conftest import random_hpd

ALL = list(Measure)


def test_closed_forms():
    assert dist("lem", np.eye(1), np.exp(2.0) * np.eye(1)) == pytest.approx(2.0, rel=1e-14)
    assert dist("airm", np.eye(2), np.e * np.eye(2)) == pytest.approx(np.sqrt(2), rel=1e-14)
    assert dist2("skld", np.eye(2), np.diag([4.0, 1.0])) == pytest.approx(2.25, rel=1e-14)
    assert dist("skld", np.eye(2), np.diag([4.0, 1.0])) == pytest.approx(1.5, rel=1e-14)


@pytest.mark.parametrize("measure", ALL)
def test_self_distance_zero(measure, rng):
    X = random_hpd(rng, 4, cond=50)
    assert dist(measure, X, X) <= 1e-7


def _scalar_oracle(measure, x, y):
    if measure in (Measure.AIRM, Measure.LEM):
        return abs(np.log(x) - np.log(y))
    if measure is Measure.JBLD:
        return np.sqrt(np.log((x + y) / 2) - 0.5 * np.log(x * y))
    return np.sqrt(x / y + y / x - 2)


@pytest.mark.parametrize("measure", ALL)
@settings(max_examples=30, deadline=None)
@given(x=st.floats(1e-3, 1e3), y=st.floats(1e-3, 1e3))
def test_scalar_reduction(measure, x, y):
    got = dist(measure, np.array([[x]]), np.array([[y]]))
    assert got == pytest.approx(_scalar_oracle(measure, x, y), rel=1e-7, abs=1e-7)


@pytest.mark.parametrize("measure", ALL)
def test_symmetry_and_nonnegativity(measure, rng):
    for _ in range(20):
        X, Y = random_hpd(rng, 5, cond=1e3), random_hpd(rng, 5, cond=1e3)
        d, e = dist(measure, X, Y), dist(measure, Y, X)
        assert d >= 0
        assert abs(d - e) <= 1e-10 * max(1.0, d)


@pytest.mark.parametrize("measure", ALL)
def test_identity_of_indiscernibles(measure, rng):
    X = random_hpd(rng, 4, cond=20)
    E = random_hpd(rng, 4)
    near = X + 1e-10 * np.linalg.norm(X) * E / np.linalg.norm(E)
    assert dist(measure, X, near) <= 1e-7
    far = X + 1e-2 * np.linalg.norm(X) * E / np.linalg.norm(E)
    assert dist(measure, X, far) > 1e-7


@pytest.mark.parametrize("measure", [Measure.AIRM, Measure.JBLD, Measure.SKLD])
def test_affine_invariance(measure, rng):
    for _ in range(10):
        X, Y = random_hpd(rng, 4, cond=30), random_hpd(rng, 4, cond=30)
        M = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        d = dist(measure, X, Y)
        d2 = dist(measure, M @ X @ M.conj().T, M @ Y @ M.conj().T)
        assert d2 == pytest.approx(d, rel=1e-8)


def test_lem_unitary_and_inversion_invariance(rng):
    for _ in range(10):
        X, Y = random_hpd(rng, 4, cond=30), random_hpd(rng, 4, cond=30)
        U, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        d = dist("lem", X, Y)
        assert dist("lem", U @ X @ U.conj().T, U @ Y @ U.conj().T) == pytest.approx(d, rel=1e-8)
        assert dist("lem", np.linalg.inv(X), np.linalg.inv(Y)) == pytest.approx(d, rel=1e-8)


def test_lem_not_affine_invariant(rng):
    X, Y = random_hpd(rng, 3, cond=30), random_hpd(rng, 3, cond=30)
    M = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert abs(dist("lem", M @ X @ M.conj().T, M @ Y @ M.conj().T) - dist("lem", X, Y)) > 1e-3


def test_jbld_large_scale_no_overflow():
    X = 1e200 * np.eye(8)
    Y = 2e200 * np.eye(8)
    expected = np.sqrt(8 * (np.log(1.5) - 0.5 * np.log(2)))
    assert dist("jbld", X, Y) == pytest.approx(expected, rel=1e-12)


def test_broadcasting(rng):
    X = random_hpd(rng, 3, size=5)
    Y = random_hpd(rng, 3)
    d = dist("skld", X, Y[None])
    assert d.shape == (5,)
    assert d[2] == pytest.approx(dist("skld", X[2], Y))


def test_errors():
    with pytest.raises(ValueError):
        dist("lem", np.eye(2), np.eye(3))
    with pytest.raises(ValueError):
        dist("bogus", np.eye(2), np.eye(2))

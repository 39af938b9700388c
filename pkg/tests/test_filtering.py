import numpy as np
import pytest

from migmedian.filtering import FilterParams, filter_weights, manifold_filter
from migmedian.geometry import DETECTOR_MEASURES, dist
from migmedian.hpd import expm

from conftest import random_hpd


def test_params_validation():
    for bad in ({"m": 4}, {"m": 0}, {"h": 0}, {"h": -1.0}):
        with pytest.raises(ValueError):
            FilterParams(**bad)


def test_weights_uniform_on_identical(rng):
    A = random_hpd(rng, 3)
    w = filter_weights(A, [A] * 5, 1.5, "lem")
    np.testing.assert_allclose(w, np.full(5, 0.2), rtol=1e-14)


def test_weights_two_point_closed_form():
    # d(R', R) = h exactly: LEM distance between 1 and e^{h}
    h = 1.5
    R = np.eye(1)
    Rp = np.exp(h) * np.eye(1)
    w = filter_weights(R, [R, Rp], h, "lem")
    np.testing.assert_allclose(w, [1 / (1 + np.e**-1), np.e**-1 / (1 + np.e**-1)], rtol=1e-12)
    assert w[0] == pytest.approx(0.7311, abs=1e-4) and w[1] == pytest.approx(0.2689, abs=1e-4)


@pytest.mark.parametrize("measure", DETECTOR_MEASURES)
def test_weights_large_bandwidth_uniform(measure, rng):
    mats = random_hpd(rng, 3, cond=30, size=7)
    w = filter_weights(mats[3], mats, 1e6, measure)
    np.testing.assert_allclose(w, np.full(7, 1 / 7), atol=1e-9)


def test_weights_error():
    with pytest.raises(ValueError):
        filter_weights(np.eye(2), [np.eye(2)], 0.0, "lem")


@pytest.mark.parametrize("measure", DETECTOR_MEASURES)
def test_weight_sums(measure, rng):
    for _ in range(50):
        mats = random_hpd(rng, 4, cond=100, size=int(rng.integers(1, 14)))
        w = filter_weights(mats[0], mats, rng.uniform(0.1, 5), measure)
        assert abs(w.sum() - 1) <= 1e-12
        # strictly positive in exact arithmetic; far neighbours may underflow to 0
        assert np.all((w >= 0) & (w <= 1))


def test_constant_sequence_and_unit_window(rng):
    A = random_hpd(rng, 3)
    out = manifold_filter([A] * 6, FilterParams(5, 1.0, "skld"))
    np.testing.assert_allclose(out, np.broadcast_to(A, (6, 3, 3)), atol=1e-14)
    cells = random_hpd(rng, 3, size=6)
    np.testing.assert_array_equal(manifold_filter(cells, FilterParams(1, 1.0, "jbld")), cells)


def test_window_and_edges_match_direct_evaluation(rng):
    cells = random_hpd(rng, 3, cond=20, size=9)
    params = FilterParams(5, 2.0, "jbld")
    out = manifold_filter(cells, params)
    for c in range(9):
        win = cells[max(0, c - 2): c + 3]
        w = filter_weights(cells[c], win, 2.0, "jbld")
        np.testing.assert_allclose(out[c], np.einsum("i,ijk->jk", w, win), atol=1e-12)


def test_outlier_keeps_itself():
    h = 1.0
    rng = np.random.default_rng(5)
    background = [np.eye(3) * np.exp(0.05 * rng.standard_normal()) for _ in range(11)]
    outlier = np.diag([np.exp(4.0), 1.0, 1.0])
    cells = background[:5] + [outlier] + background[5:10]
    d_min = min(dist("lem", outlier, b) for b in background)
    assert d_min >= 3 * h
    w = filter_weights(outlier, cells, h, "lem")
    assert w[5] >= 0.99
    out = manifold_filter(cells, FilterParams(11, h, "lem"))
    assert np.linalg.norm(out[5] - outlier) <= 0.01 * np.linalg.norm(outlier)
    mean_bg = np.mean(background[:10], axis=0)
    assert np.linalg.norm(out[0] - mean_bg) < np.linalg.norm(cells[0] - mean_bg) + 1e-12


@pytest.mark.parametrize("measure", DETECTOR_MEASURES)
def test_pd_preservation(measure, rng):
    cells = random_hpd(rng, 4, cond=1e3, size=15)
    out = manifold_filter(cells, FilterParams(7, 1.5, measure))
    mins = np.linalg.eigvalsh(cells)[:, 0]
    for c in range(15):
        lo = mins[max(0, c - 3): c + 4].min()
        assert np.linalg.eigvalsh(out[c])[0] >= lo * (1 - 1e-12)


def test_locality(rng):
    cells = random_hpd(rng, 3, cond=20, size=15)
    params = FilterParams(5, 1.5, "lem")
    out = manifold_filter(cells, params)
    mutated = cells.copy()
    mutated[10:] = random_hpd(rng, 3, cond=20, size=5)
    out2 = manifold_filter(mutated, params)
    # cell 7's window is 5..9
    np.testing.assert_array_equal(out[:8], out2[:8])


def two_clusters(measure, seed, per=12, n=8, sep=4.0, spread=0.3):
    """Two contiguous runs of HPD matrices around distinct centres.

    ``sep`` and ``spread`` are in units of the measure itself: the centres are
    ``sep`` apart and each member sits ``spread`` from its centre.
    """
    rng = np.random.default_rng(seed)

    def unit_herm():
        E = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        E = (E + E.conj().T) / 2
        return E / np.linalg.norm(E)

    def along(base, E, target):
        # scale t with d(expm(base), expm(base + t E)) = target, by bisection
        lo, hi = 0.0, 1.0
        while dist(measure, expm(base), expm(base + hi * E)) < target:
            hi *= 1.25
        for _ in range(60):
            mid = (lo + hi) / 2
            if dist(measure, expm(base), expm(base + mid * E)) < target:
                lo = mid
            else:
                hi = mid
        return base + lo * E

    # mostly a change of scale: a random centre direction drives JBLD, which
    # grows slowly, to condition numbers near 1e11 before reaching ``sep``
    E = np.eye(n) + 0.5 * unit_herm()
    centres = [np.zeros((n, n), dtype=complex)]
    centres.append(along(centres[0], E / np.linalg.norm(E), sep))
    cells = [expm(along(c, unit_herm(), spread)) for c in centres for _ in range(per)]
    return np.array(cells), np.repeat([0, 1], per)


def separation_ratio(measure, cells, labels):
    N = len(cells)
    D = np.array([[dist(measure, cells[i], cells[j]) for j in range(N)] for i in range(N)])
    same = labels[:, None] == labels[None, :]
    off = ~np.eye(N, dtype=bool)
    return D[~same].mean() / D[same & off].mean()


def separation_wins(measure, seeds=range(20), params=(11, 1.5)):
    wins = 0
    for seed in seeds:
        cells, labels = two_clusters(measure, seed)
        before = separation_ratio(measure, cells, labels)
        after = separation_ratio(measure, manifold_filter(cells, FilterParams(*params, measure)), labels)
        wins += after >= before
    return wins


@pytest.mark.parametrize("measure", DETECTOR_MEASURES)
def test_separation_improves(measure):
    assert separation_wins(measure, seeds=range(5)) == 5

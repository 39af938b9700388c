"""Independent reference computations used by the tests.

Nothing here calls the fixed-point solvers; medians are found by direct
numerical minimization of the objective.
"""

import itertools

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from migmedian.geometry import dist


def hpd2_from_params(theta):
    """2x2 HPD matrix from the chart ``L = [[e^a, 0], [b + i c, e^d]]``, ``R = L L^H``."""
    a, b, c, d = np.moveaxis(np.asarray(theta, dtype=float), -1, 0)
    L = np.zeros(np.shape(a) + (2, 2), dtype=complex)
    L[..., 0, 0] = np.exp(a)
    L[..., 1, 0] = b + 1j * c
    L[..., 1, 1] = np.exp(d)
    return L @ np.conj(np.swapaxes(L, -1, -2))


def params_from_hpd2(R):
    L = np.linalg.cholesky(R)
    return np.array([np.log(L[0, 0].real), L[1, 0].real, L[1, 0].imag, np.log(L[1, 1].real)])


def objective(measure, R, mats):
    R = np.asarray(R)
    return np.sum(dist(measure, R[..., None, :, :], mats), axis=-1)


def brute_force_median_2x2(measure, mats, grid_points=7):
    """Minimize ``sum_k d(R, R_k)`` over HPD(2): coarse grid, then Nelder-Mead restarts."""
    mats = np.asarray(mats)
    P = np.array([params_from_hpd2(M) for M in mats])
    lo, hi = P.min(axis=0), P.max(axis=0)
    axes = [np.linspace(l, h, grid_points) for l, h in zip(lo, hi)]
    grid = np.array(list(itertools.product(*axes)))
    F = objective(measure, hpd2_from_params(grid), mats)
    x = grid[np.argmin(F)]

    def f(theta):
        return float(objective(measure, hpd2_from_params(theta), mats))

    best = f(x)
    for _ in range(8):
        # restarting rebuilds the simplex, which un-sticks Nelder-Mead
        res = minimize(f, x, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 40000, "maxfev": 40000})
        gain = best - res.fun
        if res.fun < best:
            x, best = res.x, res.fun
        if gain <= 1e-14 * best:
            break
    return hpd2_from_params(x), best


def scalar_median(measure, xs):
    """1-D median for 1x1 inputs: fine grid over log r, then bounded refinement."""
    xs = np.asarray(xs, dtype=float)
    lo, hi = np.log(xs.min()), np.log(xs.max())

    def F(u):
        r = np.exp(u)
        return float(np.sum(dist(measure, np.array([[[r]]]), xs[:, None, None])))

    grid = np.linspace(lo, hi, 4001)
    vals = [F(u) for u in grid]
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if a == b:
        return np.exp(a)
    res = minimize_scalar(F, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
    return float(np.exp(res.x)) if res.fun <= vals[i] else float(np.exp(grid[i]))


def random_hpd2_set(seed, k=5, max_cond=100.0):
    """k random 2x2 HPD matrices with condition number <= max_cond."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < k:
        Z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        Q, _ = np.linalg.qr(Z)
        lam = np.exp(rng.uniform(-1.5, 1.5, size=2))
        if lam.max() / lam.min() > max_cond:
            continue
        A = (Q * lam) @ Q.conj().T
        out.append((A + A.conj().T) / 2)
    return np.array(out)


def hermitian_basis(n):
    """Orthonormal basis of n x n Hermitian matrices (Frobenius inner product)."""
    basis = []
    for i in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[i, i] = 1
        basis.append(E)
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = E[j, i] = 1 / np.sqrt(2)
            basis.append(E)
            E = np.zeros((n, n), dtype=complex)
            E[i, j], E[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis.append(E)
    return basis


def directional_derivatives(measure, R, mats, rel_step=1e-6):
    """Central finite differences of F at R along each Hermitian basis element."""
    h = rel_step * np.linalg.norm(R)
    out = []
    for E in hermitian_basis(R.shape[0]):
        fp = objective(measure, R + h * E, mats)
        fm = objective(measure, R - h * E, mats)
        out.append((fp - fm) / (2 * h))
    return np.array(out)

"""Clutter covariance estimators: SCM, weighted means and geometric medians.

The geometric medians minimize ``F(R) = sum_k d(R, R_k)`` for the LEM, JBLD
and SKLD measures through Weiszfeld-type fixed-point iterations. The solver
core works on a batch of independent problems at once (shape
``(B, K, n, n)``) because the Monte Carlo experiments solve thousands of
small medians; :func:`geometric_median` is the single-problem front end.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericalFailureError
from .geometry import DETECTOR_MEASURES, Measure, dist
from .hpd import TOEPLITZ_LOADING, hermitian, herm_eig, logdet, logm, pd_floor

__all__ = [
    "MedianSolverConfig",
    "MedianResult",
    "NonUniqueMedianWarning",
    "scm",
    "weighted_arithmetic_mean",
    "median_objective",
    "geometric_median",
    "geometric_median_batch",
]


class NonUniqueMedianWarning(UserWarning):
    """Two-point medians are not unique; the returned fixed point is one of many."""


@dataclass(frozen=True)
class MedianSolverConfig:
    tol: float = 1e-8
    max_iter: int = 200
    weiszfeld_floor: float = 1e-12

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be an integer >= 1, got {self.max_iter}")
        if not self.weiszfeld_floor > 0:
            raise ValueError(f"weiszfeld_floor must be > 0, got {self.weiszfeld_floor}")


@dataclass
class MedianResult:
    """Outcome of one median solve.

    ``history`` holds ``F(R_t)`` for t = 0..iterations when requested.
    """

    estimate: np.ndarray
    iterations: int
    final_step: float
    objective: float
    converged: bool
    history: Optional[np.ndarray] = field(default=None, repr=False)


def _as_stack(matrices):
    M = hermitian(np.asarray(matrices, dtype=complex))
    if M.ndim != 3 or M.shape[-1] != M.shape[-2]:
        raise ValueError(f"expected a (K, n, n) stack of matrices, got shape {M.shape}")
    if M.shape[0] < 1:
        raise ValueError("need at least one matrix")
    return M


def _load_if_singular(R):
    lam_min = np.linalg.eigvalsh(R)[..., 0]
    floor = pd_floor(R)
    needs = lam_min < floor
    if np.any(needs):
        n = R.shape[-1]
        scale = np.real(np.trace(R, axis1=-2, axis2=-1)) / n
        R = R + np.where(needs, TOEPLITZ_LOADING * scale, 0.0)[..., None, None] * np.eye(n)
    return R


def scm(samples):
    """Sample covariance ``(1/K) sum_k x_k x_k^H`` of rows of ``samples``.

    ``samples`` has shape ``(K, n)`` or ``(..., K, n)``. A rank-deficient
    result (K < n) gets the same tiny diagonal loading as the Toeplitz
    estimator so that it stays on the HPD manifold.
    """
    X = np.asarray(samples, dtype=complex)
    if X.ndim < 2:
        raise ValueError(f"samples must be (K, n), got shape {X.shape}")
    K = X.shape[-2]
    if K == 0:
        raise ValueError("scm needs at least one sample")
    R = hermitian(np.swapaxes(X, -1, -2) @ np.conj(X) / K)
    return _load_if_singular(R)


def weighted_arithmetic_mean(matrices, weights):
    """Convex combination ``sum_i w_i R_i``."""
    M = _as_stack(matrices)
    w = np.asarray(weights, dtype=float)
    if w.shape != (M.shape[0],):
        raise ValueError(f"need one weight per matrix: {w.shape} vs {M.shape[0]} matrices")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must sum to 1 (got {w.sum():.15g})")
    return hermitian(np.einsum("k,kij->ij", w, M))


def median_objective(measure, R, matrices):
    """``F(R) = sum_k d(R, R_k)``, the quantity a geometric median minimizes."""
    M = _as_stack(matrices)
    return float(np.sum(dist(measure, R[None], M)))


def _frob(A):
    return np.sqrt(np.sum(np.abs(A) ** 2, axis=(-2, -1)))


def _hsum(A, B):
    # tr(A B) for Hermitian A, B, batched
    return np.real(np.sum(A * np.conj(B), axis=(-2, -1)))


class _LEMStep:
    def __init__(self, M):
        self.L = logm(M)

    def start(self, R0):
        return logm(R0)

    def update(self, idx, state, floor):
        L = self.L[idx]
        delta = np.maximum(_frob(state[:, None] - L), floor)
        w = 1.0 / delta
        S = hermitian(np.einsum("bk,bkij->bij", w, L) / w.sum(axis=1)[:, None, None])
        dec = herm_eig(S)
        return dec.reconstruct(np.exp(dec.eigenvalues)), S


class _JBLDStep:
    def __init__(self, M):
        self.M = M
        self.ld = logdet(M)

    def start(self, R0):
        return R0

    def update(self, idx, R, floor):
        M = self.M[idx]
        S = (R[:, None] + M) / 2
        d2 = logdet(S) - 0.5 * (logdet(R)[:, None] + self.ld[idx])
        s = np.maximum(np.sqrt(np.maximum(d2, 0.0)), floor)
        # (R + R_k)^{-1} = inv(S_k) / 2
        inv_sum = np.linalg.inv(S) / 2
        A = hermitian(np.einsum("bk,bkij->bij", 1.0 / s, inv_sum))
        R_new = hermitian(0.5 * (1.0 / s).sum(axis=1)[:, None, None] * np.linalg.inv(A))
        return R_new, R_new


class _SKLDStep:
    def __init__(self, M):
        self.M = M
        self.Minv = hermitian(np.linalg.inv(M))

    def start(self, R0):
        return R0

    def update(self, idx, R, floor):
        n = R.shape[-1]
        M, Minv = self.M[idx], self.Minv[idx]
        Rinv = hermitian(np.linalg.inv(R))
        a = _hsum(Minv, R[:, None]) + _hsum(Rinv[:, None], M) - 2 * n
        s = np.maximum(np.sqrt(np.maximum(a, 0.0)), floor)
        P = hermitian(np.einsum("bk,bkij->bij", 1.0 / s, Minv))
        Q = hermitian(np.einsum("bk,bkij->bij", 1.0 / s, M))
        dec = herm_eig(P)
        Ph = dec.reconstruct(np.sqrt(dec.eigenvalues))
        Pmh = dec.reconstruct(1.0 / np.sqrt(dec.eigenvalues))
        inner = herm_eig(hermitian(Ph @ Q @ Ph))
        mid = inner.reconstruct(np.sqrt(np.maximum(inner.eigenvalues, 0.0)))
        R_new = hermitian(Pmh @ mid @ Pmh)
        return R_new, R_new


_STEPS = {Measure.LEM: _LEMStep, Measure.JBLD: _JBLDStep, Measure.SKLD: _SKLDStep}


def geometric_median_batch(measure, matrices, cfg=None, record_objective=False):
    """Solve B independent median problems at once.

    Parameters
    ----------
    measure : Measure or str
        One of LEM, JBLD, SKLD.
    matrices : (B, K, n, n) array_like
        HPD inputs, ``matrices[b]`` being the b-th problem's point set.
    cfg : MedianSolverConfig, optional
    record_objective : bool
        Also return ``F(R_t)`` per iteration, shape ``(max_iter + 1, B)``,
        NaN-padded after a problem stops.

    Returns
    -------
    estimate : (B, n, n) ndarray
    iterations : (B,) int ndarray
    final_step : (B,) float ndarray
    converged : (B,) bool ndarray
    history : ndarray or None
    """
    measure = Measure.parse(measure)
    if measure not in _STEPS:
        raise ValueError(f"no median iteration for measure {measure.value!r}; "
                         f"use one of {[m.value for m in DETECTOR_MEASURES]}")
    cfg = cfg or MedianSolverConfig()
    M = hermitian(np.asarray(matrices, dtype=complex))
    if M.ndim != 4 or M.shape[-1] != M.shape[-2] or M.shape[1] < 1:
        raise ValueError(f"expected (B, K, n, n) matrices, got shape {M.shape}")
    B, K = M.shape[:2]
    if K == 2:
        warnings.warn("median of two matrices is not unique; returning one fixed point",
                      NonUniqueMedianWarning, stacklevel=2)

    stepper = _STEPS[measure](M)
    R = hermitian(M.mean(axis=1))
    state = stepper.start(R)
    iterations = np.zeros(B, dtype=int)
    final_step = np.full(B, np.inf)
    converged = np.zeros(B, dtype=bool)
    history = None
    if record_objective:
        history = np.full((cfg.max_iter + 1, B), np.nan)
        history[0] = np.sum(dist(measure, R[:, None], M), axis=1)

    active = np.arange(B)
    for t in range(1, cfg.max_iter + 1):
        R_old = R[active]
        R_new, state_new = stepper.update(active, state[active], cfg.weiszfeld_floor)
        if not np.all(np.isfinite(R_new)):
            raise NumericalFailureError(
                f"{measure.value} median iterate became non-finite at t={t}",
                {"iteration": t},
            )
        step = _frob(R_new - R_old) / _frob(R_old)
        R[active] = R_new
        state[active] = state_new
        iterations[active] = t
        final_step[active] = step
        if history is not None:
            history[t, active] = np.sum(dist(measure, R_new[:, None], M[active]), axis=1)
        done = step <= cfg.tol
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break
    return R, iterations, final_step, converged, history


def geometric_median(measure, matrices, cfg=None, record_objective=False) -> MedianResult:
    """Geometric median of a set of HPD matrices.

    Starts from the arithmetic mean and iterates the measure's fixed-point
    map until the relative Frobenius step drops to ``cfg.tol``. Hitting
    ``cfg.max_iter`` is not an error: the result is returned with
    ``converged=False``.

    >>> import numpy as np
    >>> pts = np.exp(np.array([0.0, 1.0, 2.0]))[:, None, None]
    >>> res = geometric_median("lem", pts)
    >>> round(float(res.estimate[0, 0].real), 6) == round(float(np.e), 6)
    True
    """
    M = _as_stack(matrices)
    R, it, step, conv, hist = geometric_median_batch(measure, M[None], cfg, record_objective)
    return MedianResult(
        estimate=R[0],
        iterations=int(it[0]),
        final_step=float(step[0]),
        objective=median_objective(measure, R[0], M),
        converged=bool(conv[0]),
        history=None if hist is None else hist[: it[0] + 1, 0],
    )

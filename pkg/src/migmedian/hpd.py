"""Hermitian / HPD matrix helpers and the Toeplitz autocorrelation estimator.

Matrices are plain complex ``numpy`` arrays of shape ``(..., n, n)``; every
function here broadcasts over leading axes. Anything returned as a Hermitian
matrix has been re-symmetrized, so ``A == A.conj().swapaxes(-1, -2)`` holds
bit-exactly.
"""

from typing import Callable, NamedTuple, Union

import numpy as np

from .errors import DegenerateSampleError, NotPositiveDefiniteError, NumericalFailureError

__all__ = [
    "SpectralDecomposition",
    "hermitian",
    "dagger",
    "pd_floor",
    "as_hpd",
    "herm_eig",
    "matrix_fn",
    "logm",
    "expm",
    "sqrtm",
    "invsqrtm",
    "invm",
    "logdet",
    "toeplitz_estimate",
    "PD_FLOOR_REL",
    "TOEPLITZ_LOADING",
]

PD_FLOOR_REL = 1e-12
TOEPLITZ_LOADING = 1e-9


class SpectralDecomposition(NamedTuple):
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self, values=None):
        """Return ``U diag(values) U^H`` (defaults to the stored eigenvalues)."""
        lam = self.eigenvalues if values is None else values
        U = self.eigenvectors
        return hermitian((U * lam[..., None, :]) @ dagger(U))


def dagger(A):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(A, -1, -2))


def hermitian(A):
    """Exact Hermitian part ``(A + A^H) / 2``."""
    A = np.asarray(A, dtype=complex)
    return (A + dagger(A)) / 2


def pd_floor(A):
    """Eigenvalue floor ``1e-12 * tr(A) / n`` below which A is treated as singular."""
    A = np.asarray(A)
    n = A.shape[-1]
    return PD_FLOOR_REL * np.real(np.trace(A, axis1=-2, axis2=-1)) / n


def herm_eig(A) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix (or stack of them).

    Raises
    ------
    NumericalFailureError
        If LAPACK fails to converge or the input contains non-finite entries.
    """
    A = np.asarray(A, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise NumericalFailureError("non-finite entries in Hermitian input",
                                    {"shape": A.shape})
    try:
        lam, U = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(
            f"Hermitian eigensolver did not converge: {exc}",
            {"shape": A.shape, "norm": float(np.linalg.norm(A))},
        ) from exc
    return SpectralDecomposition(lam, U)


def _check_spectrum(A, lam):
    floor = pd_floor(A)
    bad = lam[..., 0] <= floor
    if np.any(bad):
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite: min eigenvalue {np.min(lam[..., 0]):.3e} "
            f"<= floor {np.max(np.where(bad, floor, -np.inf)):.3e}"
        )


def as_hpd(A):
    """Validate and return the Hermitian part of ``A`` as an HPD matrix."""
    A = hermitian(A)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {A.shape}")
    _check_spectrum(A, herm_eig(A).eigenvalues)
    return A


_NAMED = {
    "log": (np.log, True),
    "exp": (np.exp, False),
    "sqrt": (np.sqrt, True),
    "invsqrt": (lambda x: 1 / np.sqrt(x), True),
    "inv": (lambda x: 1 / x, True),
}


def matrix_fn(A, f: Union[str, Callable[[np.ndarray], np.ndarray]], require_pd=None):
    """Apply a real scalar function to a Hermitian matrix through its spectrum.

    Parameters
    ----------
    A : (..., n, n) array_like
        Hermitian input.
    f : str or callable
        One of ``"log"``, ``"exp"``, ``"sqrt"``, ``"invsqrt"``, ``"inv"`` or a
        vectorized callable acting on the eigenvalues.
    require_pd : bool, optional
        Reject inputs whose smallest eigenvalue is at or below
        :func:`pd_floor`. Defaults to True for the named functions other than
        ``"exp"`` and False for callables.

    Returns
    -------
    (..., n, n) ndarray
        ``U diag(f(lambda)) U^H``, exactly Hermitian.
    """
    A = hermitian(A)
    if isinstance(f, str):
        try:
            func, pd_needed = _NAMED[f]
        except KeyError:
            raise ValueError(f"unknown matrix function {f!r}; expected one of {sorted(_NAMED)}")
    else:
        func, pd_needed = f, False
    if require_pd is None:
        require_pd = pd_needed
    dec = herm_eig(A)
    if require_pd:
        _check_spectrum(A, dec.eigenvalues)
    return dec.reconstruct(func(dec.eigenvalues))


def logm(A):
    return matrix_fn(A, "log")


def expm(A):
    return matrix_fn(A, "exp")


def sqrtm(A):
    return matrix_fn(A, "sqrt")


def invsqrtm(A):
    return matrix_fn(A, "invsqrt")


def invm(A):
    return matrix_fn(A, "inv")


def logdet(A):
    """Log-determinant of HPD matrices via Cholesky (no overflow-prone products)."""
    A = hermitian(A)
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"log-det of a non-PD matrix: {exc}") from exc
    return 2.0 * np.sum(np.log(np.real(np.diagonal(L, axis1=-2, axis2=-1))), axis=-1)


def toeplitz_estimate(x):
    """Hermitian Toeplitz autocorrelation matrix of one sample vector.

    Uses the biased time average ``r_l = (1/n) sum_i x_i conj(x_{i+l})`` and
    places ``r_l`` on the l-th subdiagonal (``R[j, k] = r_{j-k}`` for j >= k).
    The result is PSD by construction; if its smallest eigenvalue falls below
    :func:`pd_floor` a loading of ``1e-9 * r_0 * I`` is added.

    Accepts ``(n,)`` or a stack ``(..., n)``; returns ``(..., n, n)``.
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    if n < 2:
        raise ValueError(f"Toeplitz estimate needs n >= 2, got n={n}")
    r = np.empty(x.shape, dtype=complex)
    for lag in range(n):
        r[..., lag] = np.sum(x[..., : n - lag] * np.conj(x[..., lag:]), axis=-1) / n
    r0 = np.real(r[..., 0])
    if np.any(r0 <= 0):
        raise DegenerateSampleError("sample vector is identically zero; Toeplitz estimate is singular")
    r[..., 0] = r0
    j, k = np.indices((n, n))
    lag = j - k
    R = np.where(lag >= 0, r[..., np.abs(lag)], np.conj(r[..., np.abs(lag)]))
    R = hermitian(R)
    lam_min = np.linalg.eigvalsh(R)[..., 0]
    needs = lam_min < pd_floor(R)
    if np.any(needs):
        load = np.where(needs, TOEPLITZ_LOADING * r0, 0.0)
        R = R + load[..., None, None] * np.eye(n)
    return R

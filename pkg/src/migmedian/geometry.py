"""Distances and divergences between HPD matrices.

All four measures are exposed through :func:`dist` (the distance ``d``) and
:func:`dist2` (its square, the quantity the measures are usually defined by).
Both broadcast over leading stack axes.
"""

import enum

import numpy as np

from .errors import NotPositiveDefiniteError, NumericalFailureError
from .hpd import hermitian, logm

__all__ = ["Measure", "dist", "dist2", "DETECTOR_MEASURES"]


class Measure(str, enum.Enum):
    AIRM = "airm"
    LEM = "lem"
    JBLD = "jbld"
    SKLD = "skld"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown measure {value!r}; expected one of {[m.value for m in cls]}"
            ) from None


DETECTOR_MEASURES = (Measure.LEM, Measure.JBLD, Measure.SKLD)


def _pair(X, Y):
    X = hermitian(X)
    Y = hermitian(Y)
    if X.shape[-2:] != Y.shape[-2:] or X.shape[-1] != X.shape[-2]:
        raise ValueError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    return X, Y


def _log_generalized_eigs(X, Y):
    """``ln mu`` for the eigenvalues ``mu`` of ``X^{-1} Y``.

    Computed as the spectrum of ``L^{-1} Y L^{-H}`` with ``X = L L^H``. The
    congruence-invariant measures depend on ``(X, Y)`` only through these, and
    writing them termwise in ``ln mu`` keeps every term nonnegative.
    """
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"first operand is not positive definite: {exc}") from exc
    A = np.linalg.solve(L, Y)
    M = np.linalg.solve(L, np.conj(np.swapaxes(A, -1, -2)))
    mu = np.linalg.eigvalsh(hermitian(M))
    if not np.all(np.isfinite(mu)):
        raise NumericalFailureError("non-finite generalized eigenvalues")
    if np.any(mu <= 0):
        raise NotPositiveDefiniteError("second operand is not positive definite")
    return np.log(mu)


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2 * x)) - np.log(2.0)


def dist2(measure, X, Y):
    """Squared geometric measure between HPD matrices.

    ====  ==============================================================
    AIRM  ``sum_i ln^2 lambda_i(X^{-1/2} Y X^{-1/2})``
    LEM   ``||Log X - Log Y||_F^2``
    JBLD  ``ln det((X+Y)/2) - (ln det X + ln det Y) / 2``
    SKLD  ``tr(Y^{-1} X + X^{-1} Y) - 2n``
    ====  ==============================================================
    """
    measure = Measure.parse(measure)
    X, Y = _pair(X, Y)
    if measure is Measure.LEM:
        D = logm(X) - logm(Y)
        return np.sum(np.abs(D) ** 2, axis=(-2, -1))
    u = _log_generalized_eigs(X, Y)
    if measure is Measure.AIRM:
        return np.sum(u**2, axis=-1)
    if measure is Measure.JBLD:
        # ln((1 + mu) / 2) - ln(mu) / 2 = ln cosh(u / 2)
        return np.sum(_log_cosh(u / 2), axis=-1)
    if measure is Measure.SKLD:
        # mu + 1/mu - 2 = 4 sinh^2(u / 2)
        return np.sum(4 * np.sinh(u / 2) ** 2, axis=-1)
    raise AssertionError(measure)  # pragma: no cover


def dist(measure, X, Y):
    """Geometric distance ``d(X, Y) = sqrt(dist2(measure, X, Y))``.

    Examples
    --------
    >>> import numpy as np
    >>> float(dist("lem", np.eye(1), np.exp(2.0) * np.eye(1)))
    2.0
    """
    return np.sqrt(dist2(measure, X, Y))

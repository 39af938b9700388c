"""Anisotropy indices: squared distance from R to the nearest ``eps * I``."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateIsotropyError
from .geometry import Measure, _log_cosh
from .hpd import as_hpd, herm_eig

__all__ = ["AnisotropyReport", "anisotropy", "anisotropy_index", "jbld_epsilon_star",
           "jbld_root_function", "ad_ratio"]


@dataclass(frozen=True)
class AnisotropyReport:
    measure: Measure
    epsilon_star: float
    index: float


def jbld_root_function(eps, eigenvalues):
    """``g(eps) = 2 sum_i 1/(lambda_i + eps) - n/eps``, broadcast over ``eps``."""
    lam = np.asarray(eigenvalues, dtype=float)
    eps = np.asarray(eps, dtype=float)
    return 2.0 * np.sum(1.0 / (lam + eps[..., None]), axis=-1) - lam.shape[-1] / eps


def jbld_epsilon_star(eigenvalues, max_iter=200):
    """Unique positive root of ``g`` for one spectrum or a stack ``(..., n)``.

    ``g < 0`` at ``eps = min(lambda)`` and ``g > 0`` at ``eps = max(lambda)``,
    so the root is bracketed by the extreme eigenvalues; the bracket is then
    bisected down to adjacent floating-point numbers.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("eigenvalues must be strictly positive")
    n = lam.shape[-1]
    lo = np.min(lam, axis=-1)
    hi = np.max(lam, axis=-1)

    def gs(eps):
        # eps * g / n, dimensionless
        return (2.0 * eps / n) * np.sum(1.0 / (lam + eps[..., None]), axis=-1) - 1.0

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if np.all((mid <= lo) | (mid >= hi)):
            break
        pos = gs(mid) > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    glo, ghi = np.abs(gs(lo)), np.abs(gs(hi))
    root = np.where(glo <= ghi, lo, hi)
    return root if root.ndim else float(root)


def _index_from_spectrum(measure, lam):
    if measure is Measure.LEM:
        ll = np.log(lam)
        log_eps = np.mean(ll, axis=-1)
        return np.exp(log_eps), np.sum((ll - log_eps[..., None]) ** 2, axis=-1)
    if measure is Measure.SKLD:
        eps = np.sqrt(np.sum(lam, axis=-1) / np.sum(1.0 / lam, axis=-1))
        u = np.log(lam / eps[..., None])
        return eps, np.sum(4 * np.sinh(u / 2) ** 2, axis=-1)
    if measure is Measure.JBLD:
        eps = np.asarray(jbld_epsilon_star(lam))
        u = np.log(lam / eps[..., None])
        return eps, np.sum(_log_cosh(u / 2), axis=-1)
    raise ValueError(f"no anisotropy index for measure {measure.value!r}")


def anisotropy_index(measure, R):
    """Vectorized ``(eps_star, a)`` for a stack of HPD matrices ``(..., n, n)``."""
    measure = Measure.parse(measure)
    lam = herm_eig(as_hpd(R)).eigenvalues
    return _index_from_spectrum(measure, lam)


def anisotropy(measure, R) -> AnisotropyReport:
    """Anisotropy index ``a(R) = min_eps d^2(R, eps I)`` for LEM, JBLD or SKLD.

    Examples
    --------
    >>> import numpy as np
    >>> rep = anisotropy("skld", np.diag([1.0, 4.0]))
    >>> round(rep.epsilon_star, 12), round(rep.index, 12)
    (2.0, 1.0)
    """
    measure = Measure.parse(measure)
    R = np.asarray(R)
    if R.ndim != 2:
        raise ValueError(f"expected a single (n, n) matrix, got shape {R.shape}")
    eps, a = anisotropy_index(measure, R)
    return AnisotropyReport(measure, float(eps), float(a))


def ad_ratio(ai_signal, ai_ccm):
    """Anisotropy index of discrimination ``AI_signal / AI_CCM``."""
    ai_ccm = np.asarray(ai_ccm, dtype=float)
    if np.any(ai_ccm <= 0):
        raise DegenerateIsotropyError("reference anisotropy is zero; AD ratio undefined")
    out = np.asarray(ai_signal, dtype=float) / ai_ccm
    return out if out.ndim else float(out)

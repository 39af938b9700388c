"""Manifold filter: exponentially weighted arithmetic means over a cell window."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import Measure, dist2
from .hpd import hermitian, logm

__all__ = ["FilterParams", "filter_weights", "manifold_filter", "manifold_filter_batch"]


@dataclass(frozen=True)
class FilterParams:
    """Window size ``m`` (odd), bandwidth ``h`` and the measure used in the weights.

    ``measure=None`` means "same as the detector using this filter".
    """

    m: int = 11
    h: float = 1.5
    measure: Optional[Measure] = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1 or self.m % 2 == 0:
            raise ValueError(f"filter window m must be an odd positive integer, got {self.m}")
        if not self.h > 0:
            raise ValueError(f"filter bandwidth h must be > 0, got {self.h}")
        if self.measure is not None:
            object.__setattr__(self, "measure", Measure.parse(self.measure))

    def with_measure(self, measure):
        return FilterParams(self.m, self.h, Measure.parse(measure))


def _softmax_weights(d2, h, mask=None):
    # shift by the smallest exponent; the normalized weights are unchanged
    z = -np.asarray(d2, dtype=float) / h**2
    if mask is not None:
        z = np.where(mask, z, -np.inf)
    z = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def filter_weights(center, neighbors, h, measure):
    """Weights ``w_i ∝ exp(-d^2(R_i, R) / h^2)`` normalized to sum to one."""
    if not h > 0:
        raise ValueError(f"bandwidth h must be > 0, got {h}")
    N = hermitian(np.asarray(neighbors, dtype=complex))
    if N.ndim != 3 or N.shape[0] == 0:
        raise ValueError("neighbors must be a nonempty (m, n, n) stack")
    d2 = dist2(measure, N, np.asarray(center)[None])
    return _softmax_weights(d2, h)


def _window_d2(measure, cells, half):
    """Squared measure between each cell and each offset in [-half, half].

    cells: (B, N, n, n). Returns d2 (B, N, 2*half+1) and the validity mask
    (N, 2*half+1); out-of-range offsets hold 0 and are masked out.
    """
    B, N = cells.shape[:2]
    offsets = np.arange(-half, half + 1)
    idx = np.arange(N)[:, None] + offsets[None, :]
    valid = (idx >= 0) & (idx < N)
    idx_c = np.clip(idx, 0, N - 1)
    d2 = np.zeros((B, N, offsets.size))
    if measure is Measure.LEM:
        L = logm(cells)
        diff = L[:, :, None] - L[:, idx_c]
        d2 = np.sum(np.abs(diff) ** 2, axis=(-2, -1))
    else:
        for j in range(offsets.size):
            if offsets[j] == 0:
                continue
            d2[:, :, j] = dist2(measure, cells[:, idx_c[:, j]], cells)
    return np.where(valid, d2, 0.0), valid, idx_c


def manifold_filter_batch(cells, params: FilterParams, measure=None):
    """Filter a batch of cell sequences, shape ``(B, N, n, n)``.

    Each output cell is the weighted mean of the ``m`` cells centred on it
    (itself included), the window truncated at the sequence edges and the
    weights renormalized over the cells actually present.
    """
    measure = Measure.parse(measure if measure is not None else params.measure)
    cells = hermitian(np.asarray(cells, dtype=complex))
    if cells.ndim != 4:
        raise ValueError(f"expected (B, N, n, n) cells, got shape {cells.shape}")
    half = params.m // 2
    if half == 0:
        return cells.copy()
    d2, valid, idx_c = _window_d2(measure, cells, half)
    w = _softmax_weights(d2, params.h, valid)
    w = np.where(valid, w, 0.0)
    out = np.einsum("bcj,bcjxy->bcxy", w, cells[:, idx_c])
    return hermitian(out)


def manifold_filter(cells, params: FilterParams, measure=None):
    """Filter one ordered sequence of HPD matrices, shape ``(N, n, n)``."""
    cells = np.asarray(cells, dtype=complex)
    if cells.ndim != 3 or cells.shape[0] < 1:
        raise ValueError(f"expected a nonempty (N, n, n) cell sequence, got shape {cells.shape}")
    return manifold_filter_batch(cells[None], params, measure)[0]

"""MIG median detectors, the AMF baseline and Monte Carlo CFAR calibration.

Pipeline of the MIG statistic for one cell map: Toeplitz HPD estimate per
cell, optional manifold filter across all cells, geometric median of the
secondary cells, distance from the CUT matrix to that median.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .filtering import FilterParams, manifold_filter_batch
from .geometry import DETECTOR_MEASURES, Measure, dist
from .hpd import hermitian, toeplitz_estimate
from .median import MedianSolverConfig, geometric_median_batch, scm
from .scenario import ClutterScenario, draw_cellmaps, steering_vector

__all__ = [
    "DetectorConfig",
    "CellMap",
    "secondary_indices",
    "mig_statistic",
    "amf_statistic",
    "evaluate_detectors",
    "threshold_from_statistics",
    "calibrate_threshold",
    "detect",
    "chunked",
]

CHUNK = 500


@dataclass(frozen=True)
class DetectorConfig:
    """One detector: a MIG median detector (``kind="mig"``) or the AMF.

    For ``kind="amf"`` the measure and filter are ignored; the AMF looks for
    ``steering_f_d`` against the SCM of the raw secondary vectors.
    """

    measure: Optional[Measure] = Measure.LEM
    filter: Optional[FilterParams] = None
    median_cfg: MedianSolverConfig = field(default_factory=MedianSolverConfig)
    guard_cells: int = 0
    p_fa: float = 1e-3
    kind: str = "mig"
    steering_f_d: float = 0.2

    def __post_init__(self):
        if self.kind not in ("mig", "amf"):
            raise ValueError(f"detector kind must be 'mig' or 'amf', got {self.kind!r}")
        if not 0 < self.p_fa < 1:
            raise ValueError(f"p_fa must lie in (0, 1), got {self.p_fa}")
        if int(self.guard_cells) != self.guard_cells or self.guard_cells < 0:
            raise ValueError(f"guard_cells must be a nonnegative integer, got {self.guard_cells}")
        if self.kind == "mig":
            m = Measure.parse(self.measure)
            if m not in DETECTOR_MEASURES:
                raise ValueError(f"MIG detectors support {[x.value for x in DETECTOR_MEASURES]}, "
                                 f"got {m.value!r}")
            object.__setattr__(self, "measure", m)
            if self.filter is not None:
                object.__setattr__(self, "filter", self.filter.with_measure(m))
        else:
            object.__setattr__(self, "measure", None)
            object.__setattr__(self, "filter", None)

    @property
    def filtered(self):
        return self.filter is not None

    @property
    def detector_id(self):
        if self.kind == "amf":
            base = "amf"
        elif self.filter is None:
            base = self.measure.value
        else:
            base = f"{self.measure.value}_m{self.filter.m}_h{self.filter.h:g}"
        return base + (f"_g{self.guard_cells}" if self.guard_cells else "")


@dataclass(frozen=True)
class CellMap:
    """Sample vectors of consecutive range cells, one of which is the CUT."""

    cells: np.ndarray
    cut_index: int

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=complex)
        if cells.ndim != 2 or cells.shape[0] < 2:
            raise ValueError(f"a cell map needs >= 2 cells of shape (N, n), got {cells.shape}")
        if not 0 <= self.cut_index < cells.shape[0]:
            raise ValueError(f"cut_index {self.cut_index} outside [0, {cells.shape[0]})")
        object.__setattr__(self, "cells", cells)


def secondary_indices(n_cells, cut_index, guard_cells=0):
    idx = [i for i in range(n_cells) if abs(i - cut_index) > guard_cells]
    if not idx:
        raise ValueError("no secondary cells left outside the CUT and guard region")
    return np.array(idx)


def amf_statistic(x, p, R):
    """``|p^H R^{-1} x|^2 / (p^H R^{-1} p)``; broadcasts over leading axes of x and R."""
    x = np.asarray(x, dtype=complex)
    p = np.asarray(p, dtype=complex)
    R = hermitian(R)
    Rinv_x = np.linalg.solve(R, x[..., None])[..., 0]
    Rinv_p = np.linalg.solve(R, np.broadcast_to(p, x.shape)[..., None])[..., 0]
    num = np.abs(np.sum(np.conj(p) * Rinv_x, axis=-1)) ** 2
    den = np.real(np.sum(np.conj(p) * Rinv_p, axis=-1))
    out = num / den
    return out if out.ndim else float(out)


class _Cache:
    """Toeplitz and filtered matrices shared by detectors evaluated on the same data."""

    def __init__(self, cells):
        self.cells = cells
        self._toeplitz = None
        self._filtered = {}

    @property
    def toeplitz(self):
        if self._toeplitz is None:
            self._toeplitz = toeplitz_estimate(self.cells)
        return self._toeplitz

    def matrices(self, config: DetectorConfig):
        if config.filter is None:
            return self.toeplitz
        key = (config.filter.m, config.filter.h, config.measure)
        if key not in self._filtered:
            self._filtered[key] = manifold_filter_batch(self.toeplitz, config.filter)
        return self._filtered[key]


def _statistic(config: DetectorConfig, cache: _Cache, cut_index):
    n_cells = cache.cells.shape[1]
    sec = secondary_indices(n_cells, cut_index, config.guard_cells)
    if config.kind == "amf":
        R = scm(cache.cells[:, sec])
        p = steering_vector(cache.cells.shape[-1], config.steering_f_d)
        return amf_statistic(cache.cells[:, cut_index], p, R)
    T = cache.matrices(config)
    med = geometric_median_batch(config.measure, T[:, sec], config.median_cfg)[0]
    return dist(config.measure, T[:, cut_index], med)


def evaluate_detectors(configs: Sequence[DetectorConfig], cells, cut_index):
    """Statistics of several detectors on a batch of cell maps.

    ``cells`` has shape ``(B, N, n)``; returns ``(len(configs), B)``.
    """
    cells = np.asarray(cells, dtype=complex)
    if cells.ndim != 3:
        raise ValueError(f"expected (B, N, n) cells, got shape {cells.shape}")
    cache = _Cache(cells)
    return np.stack([np.asarray(_statistic(c, cache, cut_index), dtype=float) for c in configs])


def mig_statistic(cellmap: CellMap, config: DetectorConfig) -> float:
    """Detection statistic ``d(R_CUT, median of secondary matrices)`` (or the AMF's)."""
    return float(evaluate_detectors([config], cellmap.cells[None], cellmap.cut_index)[0, 0])


def detect(statistic, gamma):
    """Declare a target iff ``statistic > gamma``; ties go to H0."""
    return statistic > gamma


def threshold_from_statistics(statistics, p_fa):
    """The ``ceil(p_fa * trials)``-th largest H0 statistic."""
    s = np.sort(np.asarray(statistics, dtype=float).ravel())[::-1]
    if s.size == 0:
        raise ValueError("no statistics to threshold")
    rank = max(1, math.ceil(p_fa * s.size - 1e-9))
    return float(s[rank - 1])


def chunked(fn: Callable[[int, int], np.ndarray], trials, threads=1, chunk=CHUNK):
    """Run ``fn(start, count)`` over fixed-size trial chunks and concatenate on the last axis.

    Chunk boundaries depend only on ``trials`` and ``chunk``, so the result
    does not depend on ``threads``.
    """
    jobs = [(s, min(chunk, trials - s)) for s in range(0, trials, chunk)]
    if threads <= 1 or len(jobs) == 1:
        parts = [fn(s, c) for s, c in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    return np.concatenate(parts, axis=-1)


def h0_statistics(detectors, scenario: ClutterScenario, k, trials, seed, stream=0, threads=1):
    """H0 statistics ``(len(detectors), trials)`` on cell maps with ``k`` secondary cells."""
    detectors = list(detectors)
    cut = k // 2

    def run(start, count):
        cells = draw_cellmaps(scenario, k + 1, cut, count, seed, stream=stream, start=start)
        return evaluate_detectors(detectors, cells, cut)

    return chunked(run, trials, threads)


def calibrate_threshold(detector, scenario: ClutterScenario, p_fa, trials, seed, k=8,
                        threads=1, stream=0):
    """CFAR threshold from ``trials`` simulated H0 cell maps.

    ``detector`` is a :class:`DetectorConfig` or a callable turning a
    ``(B, k+1, n)`` batch of cell maps (CUT in the middle) into ``B``
    statistics. Requires ``trials >= 10 / p_fa``.
    """
    if trials < 10 / p_fa:
        raise ValueError(f"calibration needs trials >= 10/p_fa = {math.ceil(10 / p_fa)}, got {trials}")
    if isinstance(detector, DetectorConfig):
        stats = h0_statistics([detector], scenario, k, trials, seed, stream, threads)[0]
    else:
        cut = k // 2

        def run(start, count):
            cells = draw_cellmaps(scenario, k + 1, cut, count, seed, stream=stream, start=start)
            return np.asarray(detector(cells), dtype=float)

        stats = chunked(run, trials, threads)
    return threshold_from_statistics(stats, p_fa)

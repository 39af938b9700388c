"""The experiment families: robustness, discrimination and detection curves.

Each experiment has a row iterator (``iter_*``) yielding plain-dict rows as
grid points complete, plus a list-returning wrapper. Outputs are
deterministic functions of the arguments and ``seed``.
"""

from dataclasses import replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .anisotropy import ad_ratio, anisotropy_index
from .detector import (DetectorConfig, chunked, evaluate_detectors, h0_statistics,
                       threshold_from_statistics)
from .filtering import FilterParams, manifold_filter_batch
from .geometry import DETECTOR_MEASURES, Measure, dist
from .hpd import toeplitz_estimate
from .median import MedianSolverConfig, geometric_median_batch, scm
from .scenario import (ClutterScenario, InterferenceSpec, TargetSpec, draw_cellmaps,
                       steering_vector, target_amplitude, trial_rng)

__all__ = [
    "iter_offset_error", "offset_error_experiment",
    "iter_sample_count", "sample_count_experiment",
    "statistic_profile", "iter_statistic_profile",
    "ad_experiment", "iter_ad",
    "iter_pd_curve", "pd_curve",
    "iter_calibrate", "default_detectors",
]

# independent random streams per experiment role
_CLUTTER, _PLACEMENT, _H1 = 0, 1, 2


def _rel_err(A, B):
    return np.linalg.norm(A - B, axis=(-2, -1)) / np.linalg.norm(B, axis=(-2, -1))


def _mean_se(x):
    x = np.asarray(x, dtype=float)
    se = x.std(ddof=1) / np.sqrt(x.size) if x.size > 1 else 0.0
    return float(x.mean()), float(se)


def _estimates(cells, measures, cfg):
    """SCM of raw vectors plus each measure's median of the Toeplitz matrices."""
    out = {"scm": scm(cells)}
    T = toeplitz_estimate(cells)
    for m in measures:
        out[m.value] = geometric_median_batch(m, T, cfg)[0]
    return out


def _measures(measures):
    return [Measure.parse(m) for m in measures]


def iter_offset_error(scenario: ClutterScenario, counts: Iterable[int] = range(1, 16), k=40,
                      trials=50, seed=0, measures=DETECTOR_MEASURES,
                      interference: Optional[InterferenceSpec] = None,
                      median_cfg: Optional[MedianSolverConfig] = None):
    """Offset error ``||R_0 - R_interf|| / ||R_0||`` versus number of interferences.

    Each trial draws ``k`` clean samples and a random contamination order;
    the first ``count`` cells of that order receive an interference, so the
    contaminated sets are nested across counts.
    """
    measures = _measures(measures)
    spec = interference or InterferenceSpec(count=0, f_d=0.2, scnr_db=15.0)
    clean = draw_cellmaps(scenario, k, -1, trials, seed, stream=_CLUTTER,
                          interference=InterferenceSpec(count=0))
    order = np.stack([trial_rng(seed, _PLACEMENT, t).permutation(k) for t in range(trials)])
    p = steering_vector(scenario.n, spec.f_d)
    a = target_amplitude(spec.scnr_db, p, scenario.covariance_inv)
    base = _estimates(clean, measures, median_cfg)
    for count in counts:
        if not 0 <= count <= k:
            raise ValueError(f"interference count {count} outside [0, {k}]")
        dirty = clean.copy()
        for t in range(trials):
            dirty[t, order[t, :count]] += a * p
        est = _estimates(dirty, measures, median_cfg) if count else base
        for name in ["scm"] + [m.value for m in measures]:
            mean, se = _mean_se(_rel_err(base[name], est[name]) if count else np.zeros(trials))
            yield {"count": int(count), "estimator": name, "l_error": mean, "stderr": se,
                   "trials": trials}


def offset_error_experiment(*args, **kwargs):
    return list(iter_offset_error(*args, **kwargs))


def iter_sample_count(scenario: ClutterScenario, k_values: Sequence[int] = (8, 12, 16, 24, 32, 40),
                      trials=50, seed=0, measures=DETECTOR_MEASURES,
                      median_cfg: Optional[MedianSolverConfig] = None):
    """Estimation error ``||R_hat - Sigma|| / ||Sigma||`` versus sample count.

    Sample sets for smaller K are prefixes of the largest one (common random
    numbers across K). The Toeplitz estimate's first column is
    ``E[x_i conj(x_{i+l})]``, i.e. it estimates ``conj(Sigma)``; the medians
    are scored against that, the SCM (``E[x x^H]``) against ``Sigma``.
    """
    measures = _measures(measures)
    kmax = max(k_values)
    allcells = draw_cellmaps(scenario, kmax, -1, trials, seed, stream=_CLUTTER,
                             interference=InterferenceSpec(count=0))
    sigma = scenario.covariance
    for K in k_values:
        if K < 1:
            raise ValueError(f"sample count must be >= 1, got {K}")
        est = _estimates(allcells[:, :K], measures, median_cfg)
        for name, R in est.items():
            ref = sigma if name == "scm" else np.conj(sigma)
            mean, se = _mean_se(_rel_err(R, ref[None]))
            yield {"k": int(K), "estimator": name, "t_error": mean, "stderr": se, "trials": trials}


def sample_count_experiment(*args, **kwargs):
    return list(iter_sample_count(*args, **kwargs))


def _profile_cells(scenario, n_cells, target_cell, target, trials, seed):
    cells = draw_cellmaps(scenario, n_cells, target_cell, trials, seed, stream=_CLUTTER,
                          interference=InterferenceSpec(count=0))
    if target is not None:
        p = steering_vector(scenario.n, target.f_d)
        cells[:, target_cell] += target_amplitude(target.scnr_db, p, scenario.covariance_inv) * p
    return cells


def _leave_one_out_stats(measure, T, cfg):
    """Statistic of every cell against the median of all other cells; T is (B, N, n, n)."""
    B, N = T.shape[:2]
    others = np.array([[j for j in range(N) if j != c] for c in range(N)])
    problems = T[:, others].reshape(B * N, N - 1, *T.shape[-2:])
    med = geometric_median_batch(measure, problems, cfg)[0].reshape(B, N, *T.shape[-2:])
    return dist(measure, T, med)


def statistic_profile(scenario: ClutterScenario, n_cells=40, target_cell=19,
                      target: Optional[TargetSpec] = TargetSpec(f_d=0.2, scnr_db=15.0),
                      params: Sequence[tuple] = ((11, 1.5), (11, 2.0), (13, 1.5)),
                      measures=DETECTOR_MEASURES, trials=50, seed=0,
                      median_cfg: Optional[MedianSolverConfig] = None):
    """Per-cell detection statistics with and without the manifold filter.

    Every cell in turn plays the CUT against the median of the other cells.
    ``target_cell`` is zero-based (19 is the 20th cell).

    Returns
    -------
    dict
        ``{measure: {label: stats}}`` with ``stats`` of shape
        ``(trials, n_cells)``; label ``"none"`` is the unfiltered trace and
        ``"m{m}_h{h}"`` the filtered ones. Normalize with
        :func:`normalize_traces`.
    """
    cells = _profile_cells(scenario, n_cells, target_cell, target, trials, seed)
    T = toeplitz_estimate(cells)
    out = {}
    for m in _measures(measures):
        per = {"none": _leave_one_out_stats(m, T, median_cfg)}
        for mm, h in params:
            F = manifold_filter_batch(T, FilterParams(mm, h, m))
            per[f"m{mm}_h{h:g}"] = _leave_one_out_stats(m, F, median_cfg)
        out[m.value] = per
    return out


def normalize_traces(stats):
    """Divide each trace (last axis) by its maximum."""
    stats = np.asarray(stats, dtype=float)
    return stats / np.max(stats, axis=-1, keepdims=True)


def iter_statistic_profile(scenario, **kwargs):
    profile = statistic_profile(scenario, **kwargs)
    for measure, per in profile.items():
        for label, stats in per.items():
            norm = normalize_traces(stats)
            for c in range(stats.shape[1]):
                mean, se = _mean_se(stats[:, c])
                yield {"measure": measure, "config": label, "cell": c, "statistic": mean,
                       "stderr": se, "normalized": float(norm[:, c].mean()),
                       "trials": stats.shape[0]}


def ad_experiment(scenario: ClutterScenario, trials=100, seed=0, n_cells=40, target_cell=19,
                  target: Optional[TargetSpec] = TargetSpec(f_d=0.2, scnr_db=15.0),
                  filter_params: FilterParams = FilterParams(11, 1.5),
                  measures=DETECTOR_MEASURES, median_cfg: Optional[MedianSolverConfig] = None):
    """Per-trial AD ratios with and without the filter.

    AD = anisotropy of the CUT matrix over anisotropy of the median of the
    remaining cells, both taken after filtering in the filtered variant.

    Returns ``{measure: {"unfiltered": (trials,), "filtered": (trials,)}}``.
    """
    cells = _profile_cells(scenario, n_cells, target_cell, target, trials, seed)
    T = toeplitz_estimate(cells)
    others = [j for j in range(n_cells) if j != target_cell]
    out = {}
    for m in _measures(measures):
        res = {}
        for label, mats in (("unfiltered", T),
                            ("filtered", manifold_filter_batch(T, replace(filter_params, measure=m)))):
            med = geometric_median_batch(m, mats[:, others], median_cfg)[0]
            ai_sig = anisotropy_index(m, mats[:, target_cell])[1]
            ai_ccm = anisotropy_index(m, med)[1]
            res[label] = ad_ratio(ai_sig, ai_ccm)
        out[m.value] = res
    return out


def iter_ad(scenario, **kwargs):
    for measure, res in ad_experiment(scenario, **kwargs).items():
        for label, ad in res.items():
            mean, se = _mean_se(ad)
            yield {"measure": measure, "variant": label, "mean_ad": mean, "stderr": se,
                   "trials": ad.size}


def default_detectors(params=(11, 1.5), p_fa=1e-3, median_cfg=None, include_amf=True,
                      steering_f_d=0.2):
    """Unfiltered and filtered MIG detectors for each measure, plus the AMF."""
    cfg = median_cfg or MedianSolverConfig()
    dets = []
    for m in DETECTOR_MEASURES:
        dets.append(DetectorConfig(m, None, cfg, p_fa=p_fa))
        dets.append(DetectorConfig(m, FilterParams(*params), cfg, p_fa=p_fa))
    if include_amf:
        dets.append(DetectorConfig(kind="amf", p_fa=p_fa, steering_f_d=steering_f_d))
    return dets


def _binom_se(p, trials):
    return float(np.sqrt(max(p * (1 - p), 0.0) / trials))


def iter_calibrate(scenario, detectors: Sequence[DetectorConfig], k=8, p_fa=1e-3, trials=None,
                   seed=0, validation_trials=0, threads=1):
    """Thresholds from H0 trials, optionally checked on fresh H0 trials."""
    trials = trials or int(np.ceil(100 / p_fa))
    if trials < 10 / p_fa:
        raise ValueError(f"calibration needs trials >= 10/p_fa, got {trials}")
    stats = h0_statistics(detectors, scenario, k, trials, seed, stream=_CLUTTER, threads=threads)
    fresh = None
    if validation_trials:
        fresh = h0_statistics(detectors, scenario, k, validation_trials, seed, stream=_PLACEMENT,
                              threads=threads)
    for i, det in enumerate(detectors):
        gamma = threshold_from_statistics(stats[i], p_fa)
        row = {"detector_id": det.detector_id,
               "measure": det.measure.value if det.measure else "amf",
               "filtered": det.filtered, "p_fa": p_fa, "trials": trials, "threshold": gamma}
        if fresh is not None:
            fa = float(np.mean(fresh[i] > gamma))
            row.update(empirical_fa=fa, fa_stderr=_binom_se(fa, validation_trials),
                       validation_trials=validation_trials)
        yield row


def iter_pd_curve(scenario: ClutterScenario, detectors: Sequence[DetectorConfig],
                  scnr_grid: Sequence[float], k=8, p_fa=1e-3, trials=2000, calib_trials=None,
                  seed=0, target_f_d=0.2, thresholds=None, threads=1):
    """Detection probability versus SCNR.

    Thresholds come from ``calib_trials`` (default ``100 / p_fa``) H0 trials
    unless given. H1 trials reuse the same clutter and interference draws at
    every SCNR point; only the target amplitude in the CUT changes.
    """
    detectors = list(detectors)
    if thresholds is None:
        thresholds = [r["threshold"] for r in
                      iter_calibrate(scenario, detectors, k, p_fa, calib_trials, seed,
                                     threads=threads)]
    thresholds = np.asarray(thresholds, dtype=float)
    cut = k // 2
    p = steering_vector(scenario.n, target_f_d)
    for scnr in scnr_grid:
        alpha = target_amplitude(float(scnr), p, scenario.covariance_inv)

        def run(start, count):
            cells = draw_cellmaps(scenario, k + 1, cut, count, seed, stream=_H1, start=start)
            cells[:, cut] += alpha * p
            return evaluate_detectors(detectors, cells, cut)

        stats = chunked(run, trials, threads)
        for i, det in enumerate(detectors):
            pd = float(np.mean(stats[i] > thresholds[i]))
            yield {"scnr_db": float(scnr), "detector_id": det.detector_id,
                   "measure": det.measure.value if det.measure else "amf",
                   "filtered": det.filtered, "p_d": pd, "stderr": _binom_se(pd, trials),
                   "trials": trials}


def pd_curve(*args, **kwargs):
    return list(iter_pd_curve(*args, **kwargs))

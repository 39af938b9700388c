"""Geometric-median detectors on the manifold of HPD matrices.

Sample vectors are mapped to Toeplitz HPD matrices, optionally smoothed by a
manifold filter across range cells, and the cell under test is compared
with the geometric median of its neighbours under one of several
information-geometric measures.

>>> import numpy as np
>>> import migmedian as mm
>>> float(mm.dist("lem", np.eye(2), np.exp(1.0) * np.eye(2))) ** 2
2.0000000000000004
"""

from .anisotropy import AnisotropyReport, ad_ratio, anisotropy, anisotropy_index, jbld_epsilon_star
from .detector import (CellMap, DetectorConfig, amf_statistic, calibrate_threshold, detect,
                       evaluate_detectors, mig_statistic, threshold_from_statistics)
from .errors import (DegenerateIsotropyError, DegenerateSampleError, MIGError,
                     NotPositiveDefiniteError, NumericalFailureError)
from .filtering import FilterParams, filter_weights, manifold_filter
from .geometry import DETECTOR_MEASURES, Measure, dist, dist2
from .hpd import expm, logm, matrix_fn, sqrtm, toeplitz_estimate
from .median import MedianResult, MedianSolverConfig, geometric_median, scm
from .scenario import (ClutterScenario, InterferenceSpec, TargetSpec, clutter_covariance,
                       draw_cell, draw_cellmaps, inject_target, steering_vector)

__version__ = "0.1.0"

__all__ = [
    "AnisotropyReport", "ad_ratio", "anisotropy", "anisotropy_index", "jbld_epsilon_star",
    "CellMap", "DetectorConfig", "amf_statistic", "calibrate_threshold", "detect",
    "evaluate_detectors", "mig_statistic", "threshold_from_statistics",
    "DegenerateIsotropyError", "DegenerateSampleError", "MIGError", "NotPositiveDefiniteError",
    "NumericalFailureError",
    "FilterParams", "filter_weights", "manifold_filter",
    "DETECTOR_MEASURES", "Measure", "dist", "dist2",
    "expm", "logm", "matrix_fn", "sqrtm", "toeplitz_estimate",
    "MedianResult", "MedianSolverConfig", "geometric_median", "scm",
    "ClutterScenario", "InterferenceSpec", "TargetSpec", "clutter_covariance", "draw_cell",
    "draw_cellmaps", "inject_target", "steering_vector",
]

"""Anisotropy: how far a matrix is from the nearest scaled identity.

A target adds a rank-one component to a cell's covariance estimate, which makes
its spectrum less flat. The anisotropy index quantifies that, and the
anisotropy degree (AD) compares the cell under test with the median of its
neighbours.
"""

import numpy as np

import migmedian as mm

for measure in mm.DETECTOR_MEASURES:
    for lam in ([1.0, 1.0], [1.0, 4.0], [1.0, 100.0]):
        rep = mm.anisotropy(measure, np.diag(lam))
        print(f"{measure.value:5s} spectrum {lam}: eps* = {rep.epsilon_star:8.4f}, "
              f"index = {rep.index:.4f}")
print()

scenario = mm.ClutterScenario()
rng = np.random.default_rng(2)
cells = np.array([mm.draw_cell(scenario, rng) for _ in range(17)])
quiet = mm.toeplitz_estimate(cells[8])
loud = mm.toeplitz_estimate(mm.inject_target(cells[8], mm.TargetSpec(0.2, 20.0),
                                             scenario.covariance))
neighbours = mm.toeplitz_estimate(np.delete(cells, 8, axis=0))
for measure in mm.DETECTOR_MEASURES:
    ccm = mm.geometric_median(measure, neighbours).estimate
    ai_ccm = mm.anisotropy(measure, ccm).index
    ad_quiet = float(mm.ad_ratio(mm.anisotropy(measure, quiet).index, ai_ccm))
    ad_loud = float(mm.ad_ratio(mm.anisotropy(measure, loud).index, ai_ccm))
    print(f"{measure.value:5s} AD without target {ad_quiet:6.2f}, with a 20 dB target {ad_loud:6.2f}")

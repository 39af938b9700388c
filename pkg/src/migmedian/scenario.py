"""Clutter, interference and target generation.

Every random draw goes through :func:`trial_rng`, which derives an
independent stream from ``(seed, stream, trial)``; a trial's samples are
therefore the same no matter how trials are chunked or parallelized.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .hpd import hermitian, invm, sqrtm

__all__ = [
    "ClutterScenario",
    "InterferenceSpec",
    "TargetSpec",
    "trial_rng",
    "clutter_covariance",
    "steering_vector",
    "target_amplitude",
    "draw_cell",
    "draw_cells",
    "inject_target",
    "draw_cellmaps",
]

TEXTURES = ("gaussian", "compound")


@dataclass(frozen=True)
class InterferenceSpec:
    """Discrete interferences ``alpha_I p(f_d)`` added to chosen cells.

    ``placement`` is ``"random"`` (distinct cells drawn uniformly among the
    eligible ones) or a tuple of fixed cell indices.
    """

    count: int = 0
    f_d: float = 0.2
    scnr_db: float = 15.0
    placement: object = "random"

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 0:
            raise ValueError(f"interference count must be a nonnegative integer, got {self.count}")
        if self.placement != "random":
            idx = tuple(int(i) for i in self.placement)
            if len(idx) != self.count:
                raise ValueError("fixed interference placement must list exactly `count` cells")
            object.__setattr__(self, "placement", idx)


@dataclass(frozen=True)
class TargetSpec:
    f_d: float = 0.2
    scnr_db: float = 15.0

    def __post_init__(self):
        if np.isnan(self.scnr_db) or self.scnr_db == np.inf:
            raise ValueError(f"target SCNR must be finite or -inf, got {self.scnr_db}")


@dataclass(frozen=True)
class ClutterScenario:
    n: int = 8
    rho: float = 0.95
    f_c: float = 0.1
    sigma_n2: float = 1.0
    cnr_db: float = 20.0
    texture: str = "gaussian"
    shape: float = 1.0
    interference: InterferenceSpec = field(default_factory=InterferenceSpec)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if not self.sigma_n2 > 0:
            raise ValueError(f"sigma_n2 must be > 0, got {self.sigma_n2}")
        if self.texture not in TEXTURES:
            raise ValueError(f"texture must be one of {TEXTURES}, got {self.texture!r}")
        if self.texture == "compound" and not self.shape > 0:
            raise ValueError(f"compound-Gaussian shape must be > 0, got {self.shape}")

    @property
    def sigma_c2(self):
        return self.sigma_n2 * 10 ** (self.cnr_db / 10)

    @cached_property
    def covariance(self):
        return clutter_covariance(self)

    @cached_property
    def covariance_sqrt(self):
        return sqrtm(self.covariance)

    @cached_property
    def covariance_inv(self):
        return invm(self.covariance)


def trial_rng(seed, stream, trial):
    """Generator for one trial, independent across ``(stream, trial)`` pairs."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(trial)))
    return np.random.default_rng(ss)


def clutter_covariance(scenario: ClutterScenario):
    """``sigma_n^2 I + sigma_c^2 Sigma_c`` with ``Sigma_c[j,k] = rho^|j-k| e^{i 2 pi f_c (j-k)}``."""
    j, k = np.indices((scenario.n, scenario.n))
    lag = j - k
    sc = scenario.rho ** np.abs(lag) * np.exp(2j * np.pi * scenario.f_c * lag)
    return hermitian(scenario.sigma_n2 * np.eye(scenario.n) + scenario.sigma_c2 * sc)


def steering_vector(n, f_d):
    """Unit-modulus temporal steering vector ``p_k = exp(i 2 pi f_d k)``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return np.exp(2j * np.pi * f_d * np.arange(n))


def target_amplitude(scnr_db, p, sigma_inv):
    """Real amplitude giving ``|alpha|^2 p^H Sigma^{-1} p = 10^(scnr_db/10)``."""
    if scnr_db == -np.inf:
        return 0.0
    quad = float(np.real(np.conj(p) @ sigma_inv @ p))
    return float(np.sqrt(10 ** (scnr_db / 10) / quad))


def draw_cells(scenario: ClutterScenario, rng, count):
    """``count`` clutter-plus-noise vectors, shape ``(count, n)``.

    Gaussian: ``Sigma^{1/2} z``. Compound-Gaussian: ``sqrt(tau) Sigma^{1/2} z``
    with unit-mean texture ``tau ~ Gamma(shape, 1/shape)``.
    """
    n = scenario.n
    z = (rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))) / np.sqrt(2)
    c = z @ scenario.covariance_sqrt.T
    if scenario.texture == "compound":
        tau = rng.gamma(scenario.shape, 1.0 / scenario.shape, size=count)
        c = c * np.sqrt(tau)[:, None]
    return c


def draw_cell(scenario: ClutterScenario, rng):
    return draw_cells(scenario, rng, 1)[0]


def inject_target(c, target: TargetSpec, sigma):
    """Return ``c + alpha p`` with alpha set by the target SCNR against ``sigma``."""
    c = np.asarray(c, dtype=complex)
    p = steering_vector(c.shape[-1], target.f_d)
    alpha = target_amplitude(target.scnr_db, p, invm(sigma))
    return c + alpha * p


def _interference_cells(spec: InterferenceSpec, eligible, rng):
    if spec.count == 0:
        return np.empty(0, dtype=int)
    if spec.placement == "random":
        if spec.count > len(eligible):
            raise ValueError(f"cannot place {spec.count} interferences in {len(eligible)} cells")
        return np.sort(rng.choice(eligible, size=spec.count, replace=False))
    return np.asarray(spec.placement, dtype=int)


def draw_cellmaps(scenario: ClutterScenario, n_cells, cut_index, trials, seed, stream=0,
                  start=0, interference: Optional[InterferenceSpec] = None):
    """Simulate ``trials`` target-free cell maps, shape ``(trials, n_cells, n)``.

    Interferences (``interference`` or the scenario's own spec) are placed
    among the secondary cells, i.e. never in ``cut_index``.
    """
    spec = scenario.interference if interference is None else interference
    n = scenario.n
    out = np.empty((trials, n_cells, n), dtype=complex)
    eligible = np.array([i for i in range(n_cells) if i != cut_index])
    p_int = steering_vector(n, spec.f_d)
    a_int = target_amplitude(spec.scnr_db, p_int, scenario.covariance_inv) if spec.count else 0.0
    for t in range(trials):
        rng = trial_rng(seed, stream, start + t)
        cells = draw_cells(scenario, rng, n_cells)
        idx = _interference_cells(spec, eligible, rng)
        cells[idx] += a_int * p_int
        out[t] = cells
    return out

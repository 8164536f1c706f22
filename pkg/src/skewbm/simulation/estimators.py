# Copyright 2023-2024 Google LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Occupation and local time statistics of path ensembles."""

from __future__ import annotations

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from skewbm.analysis.measure import CheckedMeasure
from skewbm.simulation.ensemble import PathEnsemble
from skewbm.simulation.errors import WindowTooNarrow

_logger = logging.getLogger("skewbm.simulation.estimators")


def _mean_and_error(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(values))
    if len(values) < 2:
        return mean, math.inf
    return mean, float(np.std(values, ddof=1) / math.sqrt(len(values)))


def estimate_occupation(e: PathEnsemble, lo: float, hi: float,
                        at: float) -> tuple[float, float]:
    """Fraction of paths inside the open interval (lo, hi) at a saved time,
    with its binomial standard error."""
    x = e.paths[:, e.time_index(at)]
    p = float(np.mean((x > lo) & (x < hi)))
    return p, math.sqrt(p * (1 - p) / e.n_paths)


class LocalTimeEstimate(BaseModel):
    """(1/2ε)∫₀^t 1_[z−ε, z+ε)(X_s) d⟨X⟩_s per path, with d⟨X⟩ = dt."""
    model_config = ConfigDict(frozen=True)

    z: float
    epsilon: float
    at: float
    per_path: list[float] = Field(repr=False)
    mean: float
    stderr: float


def _occupations(e: PathEnsemble, z: float, epsilon: float,
                 at: float) -> np.ndarray:
    """Occupation times of [z−ε, z+ε), (z, z+ε] and [z−ε, z) up to `at`.

    Untracked windows are estimated from the saved states, which needs ε
    above the square root of the saved time step.
    """
    index = e.time_index(at)
    if (z, epsilon) in e.occupation:
        return e.occupation[(z, epsilon)][:, index, :]
    if index == 0:
        return np.zeros((e.n_paths, 3))
    step = float(e.times[1] - e.times[0])
    if epsilon < math.sqrt(step):
        raise WindowTooNarrow(epsilon, math.sqrt(step))
    _logger.warning("Window (%g, %g) was not tracked, using states saved "
                    "every %g", z, epsilon, step)
    x = e.paths[:, :index] - z
    both = np.sum((x >= -epsilon) & (x < epsilon), axis=1)
    right = np.sum((x > 0) & (x <= epsilon), axis=1)
    left = np.sum((x >= -epsilon) & (x < 0), axis=1)
    return step * np.stack([both, right, left], axis=-1).astype(np.float64)


def estimate_local_time(e: PathEnsemble, z: float, epsilon: float,
                        at: float) -> LocalTimeEstimate:
    """Symmetric local time L^z at a saved time.

    Raises: `WindowTooNarrow` when ε is below the step resolution.
    """
    resolution = math.sqrt(e.dt)
    if epsilon < resolution:
        raise WindowTooNarrow(epsilon, resolution)
    values = _occupations(e, z, epsilon, at)[:, 0] / (2 * epsilon)
    mean, stderr = _mean_and_error(values)
    return LocalTimeEstimate(z=z,
                             epsilon=epsilon,
                             at=at,
                             per_path=values.tolist(),
                             mean=mean,
                             stderr=stderr)


def one_sided_occupation(e: PathEnsemble, z: float, epsilon: float,
                         at: float) -> tuple[float, float, float]:
    """Means of (1/ε)∫1_(z, z+ε] d⟨X⟩ and (1/ε)∫1_[z−ε, z) d⟨X⟩, and their
    ratio, which tends to ρ(z)/ρ(z−)."""
    occupation = _occupations(e, z, epsilon, at)
    right = float(np.mean(occupation[:, 1])) / epsilon
    left = float(np.mean(occupation[:, 2])) / epsilon
    ratio = right / left if left > 0 else math.inf
    return right, left, ratio


class DriftReport(BaseModel):
    """X_T − x0 − M_T against Σ_z μ({z})·L̂^z_T.

    Attributes:

      residual_mean (float): Mean of X_T − x0 − M_T.

      drift_mean (float): Mean of Σ μ({z})·L̂^z_T.

      discrepancy (float): residual_mean − drift_mean.

      stderr (float): Standard error of the per-path difference.

      consistent (bool): |discrepancy| ≤ 3·stderr.
    """
    model_config = ConfigDict(frozen=True)

    residual_mean: float
    drift_mean: float
    discrepancy: float
    stderr: float
    consistent: bool


def drift_consistency_check(e: PathEnsemble,
                            m: CheckedMeasure,
                            epsilon: float | None = None) -> DriftReport:
    """Compare the drift of every path with the local times at the atoms.

    Args:

      e (PathEnsemble): Paths, ideally tracking a window at every atom.

      m (CheckedMeasure): Finitely many atoms, no continuous part.

      epsilon (float | None): Half width of the local time windows; the
      tracked window at each atom is used when `None`.

    Raises: `ValueError` when μ has a continuous part or infinitely many
    atoms, or when no window is known for some atom.
    """
    if m.infinite_rules or m.density_pieces or m.gaps is not None:
        raise ValueError("The drift check needs finitely many atoms")
    at = float(e.times[-1])
    residual = e.terminal - e.x0 - e.martingale[:, -1]
    drift = np.zeros(e.n_paths)
    for z, weight in zip(m.atom_locations, m.atom_weights):
        eps = epsilon
        if eps is None:
            tracked = [w for (level, w) in e.occupation if level == z]
            if not tracked:
                raise ValueError(f"No local time window tracked at {z}")
            eps = min(tracked)
        drift += weight * _occupations(e, float(z), eps, at)[:, 0] / (2 * eps)
    difference = residual - drift
    discrepancy, stderr = _mean_and_error(difference)
    return DriftReport(residual_mean=float(np.mean(residual)),
                       drift_mean=float(np.mean(drift)),
                       discrepancy=discrepancy,
                       stderr=stderr,
                       consistent=abs(discrepancy) <= 3 * stderr)

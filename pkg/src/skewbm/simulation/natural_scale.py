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
"""The natural scale f, its inverse g and the diffusion coefficient h.

With f' = 1/ϱ the process Z = f(X) solves dZ = h(Z)dW for h = (1/ϱ)∘g, and
X = g(Z) has a Brownian martingale part.
"""

from __future__ import annotations

from collections.abc import Callable
import dataclasses
import logging
import math

import numpy as np

from skewbm.analysis.profile import DensityProfile
from skewbm.analysis.types import FloatArrayT, SideT
from skewbm.structure.skew_density import EffectiveIntervalSet

# Uniform knots of the tabulated natural scale.
DEFAULT_KNOTS: int = 8193

# Half width of the tabulated window around the reference point.
DEFAULT_SPAN: float = 50.0

# Refinement levels toward a finite endpoint.
_END_LEVELS: int = 40

_logger = logging.getLogger("skewbm.simulation.natural_scale")


@dataclasses.dataclass(frozen=True)
class NaturalScaleTransform:
    """f tabulated on knots, linear in between and beyond.

    Attributes:

      knots (FloatArrayT): Increasing state-space knots.

      values (FloatArrayT): f at the knots, increasing.

      lower (float): Left end of the state interval.

      upper (float): Right end of the state interval.

      closed_left (bool): The left end is adjoined and reflects.

      closed_right (bool): The right end is adjoined and reflects.

      log_density (Callable[[FloatArrayT, SideT], FloatArrayT]): log ϱ.
    """
    knots: FloatArrayT
    values: FloatArrayT
    lower: float
    upper: float
    closed_left: bool
    closed_right: bool
    log_density: Callable[[FloatArrayT, SideT], FloatArrayT]

    @property
    def image(self) -> tuple[float, float]:
        """(f(lower), f(upper)), infinite where the end is not adjoined."""
        left = float(self.values[0]) if self.closed_left else -math.inf
        right = float(self.values[-1]) if self.closed_right else math.inf
        return left, right

    @staticmethod
    def _extend(x: FloatArrayT, xp: FloatArrayT,
                fp: FloatArrayT) -> FloatArrayT:
        """Linear interpolation, extrapolated with the end slopes."""
        result = np.interp(x, xp, fp)
        below = x < xp[0]
        above = x > xp[-1]
        if np.any(below):
            slope = (fp[1] - fp[0]) / (xp[1] - xp[0])
            result[below] = fp[0] + slope * (x[below] - xp[0])
        if np.any(above):
            slope = (fp[-1] - fp[-2]) / (xp[-1] - xp[-2])
            result[above] = fp[-1] + slope * (x[above] - xp[-1])
        return result

    def f(self, x: FloatArrayT | float) -> FloatArrayT:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return self._extend(np.clip(x, self.lower, self.upper), self.knots,
                            self.values)

    def g(self, w: FloatArrayT | float) -> FloatArrayT:
        """f⁻¹, saturating at the ends of the state interval."""
        w = np.atleast_1d(np.asarray(w, dtype=np.float64))
        return np.clip(self._extend(w, self.values, self.knots), self.lower,
                       self.upper)

    def h(self, w: FloatArrayT | float) -> FloatArrayT:
        """1/ϱ(g(w)), right-continuous."""
        with np.errstate(over="ignore"):
            return np.exp(-self.log_density(self.g(w), "right"))

    def fold(self, w: FloatArrayT) -> FloatArrayT:
        """Reflect natural-scale positions at adjoined ends."""
        low, high = self.image
        if math.isfinite(low) and math.isfinite(high):
            period = 2 * (high - low)
            shifted = np.mod(w - low, period)
            return low + np.where(shifted > high - low, period - shifted,
                                  shifted)
        if math.isfinite(low):
            return np.where(w < low, 2 * low - w, w)
        if math.isfinite(high):
            return np.where(w > high, 2 * high - w, w)
        return w


def _knots(lower: float, upper: float, reference: float, span: float,
           count: int) -> FloatArrayT:
    left = max(lower, reference - span)
    right = min(upper, reference + span)
    grid = [np.linspace(left, right, count)]
    j = 2.0**-np.arange(1, _END_LEVELS + 1)
    if math.isfinite(lower) and left == lower:
        grid.append(lower + (reference - lower) * j)
    if math.isfinite(upper) and right == upper:
        grid.append(upper - (upper - reference) * j)
    return np.unique(np.concatenate(grid))


def natural_scale(density: DensityProfile | EffectiveIntervalSet,
                  interval: int = 0,
                  span: float = DEFAULT_SPAN,
                  knots: int = DEFAULT_KNOTS) -> NaturalScaleTransform:
    """Tabulate f(z) = ∫_e^z 1/ϱ on one interval.

    Args:

      density (DensityProfile | EffectiveIntervalSet): A single profile ϱ
      (open interval), or effective intervals with their adapted scale
      functions.

      interval (int): Index of the effective interval, ignored for profiles.

      span (float): Half width of the tabulated window around the reference
      point; beyond it f is extended linearly.

      knots (int): Number of uniform knots.
    """
    if isinstance(density, DensityProfile):
        lower, upper, reference = density.interval
        closed_left = closed_right = False
        forward = lambda x: density.primitive(x, -1.0)
        log_density = density.log_value
    else:
        k = interval
        lower = float(density.lower[k])
        upper = float(density.upper[k])
        reference = float(density.reference[k])
        closed_left = bool(density.closed_left[k])
        closed_right = bool(density.closed_right[k])
        forward = density.scale(k)
        log_density = density.density.log_value
    x = _knots(lower, upper, reference, span, knots)
    values = np.asarray(forward(x), dtype=np.float64)
    keep = np.isfinite(values)
    x, values = x[keep], values[keep]
    increasing = np.concatenate(
        [[True], values[1:] > np.maximum.accumulate(values)[:-1]])
    if not np.all(increasing):
        _logger.debug("Dropping %d knots where f is flat in double "
                      "precision", int(np.sum(~increasing)))
        x, values = x[increasing], values[increasing]
    return NaturalScaleTransform(knots=x,
                                 values=values,
                                 lower=lower,
                                 upper=upper,
                                 closed_left=closed_left and x[0] == lower,
                                 closed_right=closed_right and
                                 x[-1] == upper,
                                 log_density=log_density)

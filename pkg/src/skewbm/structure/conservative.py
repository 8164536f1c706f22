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
"""Conservativeness at the unbounded ends of effective intervals.

At +∞ the diffusion with speed density ρ explodes iff

    ∫^∞ (1/ρ)(x) ∫_e^x ρ(y) dy dx < ∞,

and symmetrically at −∞. Closed-form tails decide most cases; otherwise the
double integral is truncated at increasing horizons and watched.
"""

from __future__ import annotations

from collections.abc import Callable
import logging
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import roots_legendre

from skewbm.analysis.quadrature import ratio_verdict
from skewbm.analysis.types import ConfidenceT, FloatArrayT
from skewbm.structure.skew_density import EffectiveIntervalSet

# Horizons of the truncation study, as distances from the start point.
STUDY_HORIZONS: tuple[float, ...] = (10.0, 100.0, 1_000.0, 10_000.0,
                                     100_000.0)

# Relative change below which the truncated integral counts as stable.
STABILITY_TOLERANCE: float = 1e-3

# Dyadic shells resolving the inner integral just below its upper limit.
INNER_SHELLS: int = 60

_logger = logging.getLogger("skewbm.structure.conservative")

_NODES, _WEIGHTS = roots_legendre(5)


class FellerStudy(BaseModel):
    """The truncated double integral at a list of horizons.

    Attributes:

      start (float): Lower limit e of both integrals.

      direction (Literal[1, -1]): +1 toward +∞, −1 toward −∞.

      horizons (list[float]): Distances T from `start`.

      values (list[float]): The double integral truncated at start ± T.

      finite (bool | None): The verdict, `None` when undecided.
    """
    model_config = ConfigDict(frozen=True)

    start: float
    direction: Literal[1, -1]
    horizons: list[float]
    values: list[float]
    finite: bool | None

    @property
    def stable_digits(self) -> float:
        """Agreement of the two largest horizons in decimal digits."""
        last, previous = self.values[-1], self.values[-2]
        if not math.isfinite(last) or last == 0:
            return 0.0
        change = abs(last - previous) / abs(last)
        return math.inf if change == 0 else -math.log10(change)


def _inner(log_density: Callable[[FloatArrayT], FloatArrayT], start: float,
           direction: int, t: FloatArrayT) -> FloatArrayT:
    """∫_start^x ρ(y)/ρ(x) dy at x = start + direction·t, vectorized."""
    x = start + direction * t
    fractions = 2.0**-np.arange(INNER_SHELLS + 1, dtype=np.float64)
    upper = t[:, None] * fractions[None, :-1]
    lower = t[:, None] * fractions[None, 1:]
    lower[:, -1] = 0.0
    half = (upper - lower) / 2
    middle = (upper + lower) / 2
    v = middle[..., None] + half[..., None] * _NODES
    y = x[:, None, None] - direction * v
    with np.errstate(over="ignore", invalid="ignore"):
        log_ratio = log_density(y.ravel()).reshape(y.shape) - log_density(
            x)[:, None, None]
        values = np.exp(log_ratio)
        values = np.where(np.isnan(values), np.inf, values)
        return np.sum(half * (values @ _WEIGHTS), axis=1)


def feller_study(log_density: Callable[[FloatArrayT], FloatArrayT],
                 start: float,
                 direction: Literal[1, -1],
                 horizons: tuple[float, ...] = STUDY_HORIZONS,
                 per_octave: int = 4) -> FellerStudy:
    """Truncate the Feller double integral at increasing horizons.

    Args:

      log_density (Callable[[FloatArrayT], FloatArrayT]): Vectorized log ρ,
      defined on the whole half-line beyond `start`.

      start (float): Lower limit of both integrals.

      direction (Literal[1, -1]): Which infinite end.

      horizons (tuple[float, ...]): Increasing truncation distances.

      per_octave (int): Outer segments per doubling of the distance.

    The verdict is "finite" when the two largest horizons agree to
    `STABILITY_TOLERANCE`, "infinite" when the increments per octave do not
    decay geometrically.
    """
    top = math.log2(horizons[-1])
    exponents = np.arange(-10 * per_octave,
                          math.ceil(top * per_octave) + 1) / per_octave
    edges = np.concatenate([[0.0], 2.0**exponents])
    lower, upper = edges[:-1], edges[1:]
    half = (upper - lower) / 2
    middle = (upper + lower) / 2
    t = (middle[:, None] + half[:, None] * _NODES).ravel()
    inner = _inner(log_density, start, direction, t).reshape(-1, len(_NODES))
    segments = half * (inner @ _WEIGHTS)
    segments = np.where(np.isnan(segments), np.inf, segments)
    cumulative = np.cumsum(segments)
    values = [
        float(cumulative[min(np.searchsorted(upper, h), len(upper) - 1)])
        for h in horizons
    ]
    octaves = np.add.reduceat(segments[1:],
                              np.arange(0, len(segments) - 1, per_octave))
    if not math.isfinite(values[-1]):
        finite: bool | None = False
    elif abs(values[-1] - values[-2]) <= STABILITY_TOLERANCE * abs(values[-1]):
        finite = True
    else:
        verdict = ratio_verdict(octaves)
        finite = False if verdict is False else None
    _logger.debug("Feller study from %g toward %s: %s", start,
                  "+inf" if direction > 0 else "-inf", values)
    return FellerStudy(start=start,
                       direction=direction,
                       horizons=list(horizons),
                       values=values,
                       finite=finite)


class EndVerdict(BaseModel):
    """Explosion test at one unbounded end of an effective interval."""
    model_config = ConfigDict(frozen=True)

    interval: int
    end: Literal["-inf", "+inf"]
    explodes: bool | None
    confidence: ConfidenceT
    study: FellerStudy | None = None


class ConservativeReport(BaseModel):
    """Conservativeness of the diffusion on all effective intervals.

    Attributes:

      verdict (Literal["conservative", "explodes", "unknown"]): "explodes" as
      soon as one end explodes.

      ends (list[EndVerdict]): One entry per unbounded end.
    """
    model_config = ConfigDict(frozen=True)

    verdict: Literal["conservative", "explodes", "unknown"]
    ends: list[EndVerdict] = Field(default_factory=list)

    @property
    def exploding_ends(self) -> list[EndVerdict]:
        return [end for end in self.ends if end.explodes]

    @property
    def confidence(self) -> ConfidenceT:
        if any(end.confidence == "numeric" for end in self.ends):
            return "numeric"
        return "certified"


def explodes_at(log_density: Callable[[FloatArrayT], FloatArrayT],
                tail_finite: bool | None, start: float,
                direction: Literal[1, -1]) -> tuple[bool | None, ConfidenceT,
                                                    FellerStudy]:
    """Decide explosion at one infinite end.

    Args:

      log_density (Callable[[FloatArrayT], FloatArrayT]): Vectorized log ρ.

      tail_finite (bool | None): The closed-form verdict on the Feller
      integral, `None` when the tail is not in closed form.

      start (float): A point of the interval.

      direction (Literal[1, -1]): Which end.

    Returns the verdict, its confidence and the truncation study, which is
    always run as evidence.
    """
    study = feller_study(log_density, start, direction)
    if tail_finite is not None:
        if study.finite is not None and study.finite != tail_finite:
            _logger.warning("Truncation study at %s disagrees with the "
                            "closed-form tail (%s)",
                            "+inf" if direction > 0 else "-inf", tail_finite)
        return tail_finite, "certified", study
    _logger.warning("Explosion at %s decided numerically: %s",
                    "+inf" if direction > 0 else "-inf", study.finite)
    return study.finite, "numeric", study


def check_conservative(es: EffectiveIntervalSet) -> ConservativeReport:
    """Test every unbounded end of every effective interval.

    Bounded effective intervals are conservative. The speed density ρ is
    read from `es.density`; multiplying it by a constant does not change the
    verdicts.
    """
    ends: list[EndVerdict] = []
    for k in range(len(es)):
        for direction in (-1, 1):
            end = es.lower[k] if direction < 0 else es.upper[k]
            if math.isfinite(end):
                continue
            start = float(es.reference[k])
            tail = es.density.tail(float(end))
            explodes, confidence, study = explodes_at(
                es.density.log_value, tail.feller_finite(), start, direction)
            ends.append(
                EndVerdict(interval=k,
                           end="+inf" if direction > 0 else "-inf",
                           explodes=explodes,
                           confidence=confidence,
                           study=study))
    if any(end.explodes for end in ends):
        verdict: Literal["conservative", "explodes",
                         "unknown"] = "explodes"
    elif any(end.explodes is None for end in ends):
        verdict = "unknown"
    else:
        verdict = "conservative"
    return ConservativeReport(verdict=verdict, ends=ends)

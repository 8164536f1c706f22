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
"""Numerical integration and series tests with divergence detection.

All verdicts produced here are flagged "numeric": they complement, never
replace, the closed-form tail tests.
"""

from collections.abc import Callable
import logging
import math

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from skewbm.analysis.extended_real import ExtendedReal
from skewbm.analysis.types import FloatArrayT

# Partial sums above this are declared divergent.
DIVERGENCE_THRESHOLD: float = 1e12

# Consecutive-term ratios below this (median of the tail) mean convergence.
RATIO_THRESHOLD: float = 0.97

# Absolute quadrature tolerance on finite pieces.
QUAD_TOLERANCE: float = 1e-9

_logger = logging.getLogger("skewbm.analysis.quadrature")

_NODES, _WEIGHTS = roots_legendre(5)


def gauss_legendre(func: Callable[[FloatArrayT], FloatArrayT],
                   lower: FloatArrayT, upper: FloatArrayT) -> FloatArrayT:
    """Five point Gauss–Legendre rule on many segments at once.

    Args:

      func (Callable[[FloatArrayT], FloatArrayT]): Vectorized integrand.

      lower (FloatArrayT): Segment starts.

      upper (FloatArrayT): Segment ends, same shape as `lower`.

    Returns the integral over each segment.
    """
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    half = (upper - lower) / 2
    middle = (upper + lower) / 2
    points = middle[:, None] + half[:, None] * _NODES[None, :]
    values = func(points.ravel()).reshape(points.shape)
    return half * (values @ _WEIGHTS)


def finite_integral(func: Callable[[float], float],
                    lower: float,
                    upper: float,
                    points: list[float] | None = None) -> float:
    """Adaptive quadrature of a scalar integrand on a bounded interval."""
    if upper <= lower:
        return 0.0
    inner = None
    if points:
        inner = [p for p in points if lower < p < upper] or None
    value, _ = integrate.quad(func,
                              lower,
                              upper,
                              points=inner,
                              epsabs=QUAD_TOLERANCE,
                              limit=400)
    return float(value)


def ratio_verdict(terms: FloatArrayT) -> bool | None:
    """Decide convergence of a positive series from its computed terms.

    Returns `True` when the tail ratios show geometric decay, `False` when
    they do not decay or the partial sum passes `DIVERGENCE_THRESHOLD`, and
    `None` when the terms are too few to tell.
    """
    terms = np.asarray(terms, dtype=np.float64)
    if not np.all(np.isfinite(terms)):
        return False
    if float(np.sum(terms)) > DIVERGENCE_THRESHOLD:
        return False
    tail = terms[len(terms) // 2:]
    if len(tail) < 3:
        return None
    if np.all(tail == 0):
        return True
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = tail[1:] / tail[:-1]
    ratios = ratios[np.isfinite(ratios)]
    if len(ratios) == 0:
        return None
    return bool(np.median(ratios) < RATIO_THRESHOLD)


def extrapolated_sum(terms: FloatArrayT) -> float:
    """Partial sum plus the geometric remainder suggested by the tail ratios."""
    terms = np.asarray(terms, dtype=np.float64)
    total = float(np.sum(terms))
    tail = terms[len(terms) // 2:]
    if len(tail) < 2 or not math.isfinite(total):
        return total
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = tail[1:] / tail[:-1]
    ratios = ratios[np.isfinite(ratios)]
    if len(ratios) == 0:
        return total
    ratio = float(np.median(ratios))
    if 0 < ratio < 1:
        total += float(terms[-1]) * ratio / (1 - ratio)
    return total


def series_sum(terms: FloatArrayT) -> ExtendedReal:
    """Numeric value of a positive series given enough of its terms."""
    verdict = ratio_verdict(terms)
    if verdict is None:
        return ExtendedReal.unknown()
    if not verdict:
        _logger.warning("Series declared divergent from %d terms", len(terms))
        return ExtendedReal.infinite("numeric")
    return ExtendedReal.finite(extrapolated_sum(terms), "numeric")


def dyadic_shells(endpoint: float,
                  reference: float,
                  levels: int = 24) -> list[tuple[float, float]]:
    """Shells partitioning the segment from `reference` toward `endpoint`.

    For a finite endpoint the shell boundaries are at distances d·2^(−j)
    from it, for an infinite one they grow as d·2^j, where d is the distance
    (or the magnitude) of the reference point. Each shell is returned as
    (lower, upper) with lower < upper.
    """
    shells = []
    if math.isinf(endpoint):
        direction = 1.0 if endpoint > 0 else -1.0
        base = max(abs(reference), 1.0)
        edges = [reference] + [direction * base * 2.0**j
                               for j in range(1, levels + 1)]
    else:
        edges = [endpoint + (reference - endpoint) * 2.0**(-j)
                 for j in range(levels + 1)]
    for first, second in zip(edges[:-1], edges[1:]):
        shells.append((min(first, second), max(first, second)))
    return shells

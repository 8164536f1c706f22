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
"""The speed density ρ = cₙ·ϱₙ on every interval of G and the effective
intervals obtained by gluing scale-connected intervals."""

from __future__ import annotations

from collections.abc import Callable
import dataclasses
import logging
import math
from typing import Protocol

import numpy as np
import numpy.typing as npt
from scipy import optimize

from skewbm.analysis.decomposition import IntervalDecomposition
from skewbm.analysis.measure import CheckedMeasure
from skewbm.analysis.profile import DensityProfile, ProfileOptions
from skewbm.analysis.profile import StatsTable, interval_profile
from skewbm.analysis.tails import TailBehavior
from skewbm.analysis.types import EndpointT, FloatArrayT, SideT

# Absolute tolerance of the monotone inversion of scale functions.
INVERSION_TOLERANCE: float = 1e-12

_logger = logging.getLogger("skewbm.structure.skew_density")


class SpeedDensity(Protocol):
    """What effective intervals need to know about ρ."""

    def log_value(self,
                  x: FloatArrayT | float,
                  side: SideT = "right") -> FloatArrayT:
        ...

    def tail(self, end: float) -> TailBehavior:
        ...


class ScaleFunction:
    """sₖ(x) = ∫_𝔢^x 1/ρ on one effective interval and its inverse tₖ."""

    def __init__(self, forward: Callable[[FloatArrayT], FloatArrayT],
                 lower: float, upper: float, reference: float) -> None:
        """
        Args:

          forward (Callable[[FloatArrayT], FloatArrayT]): Vectorized sₖ,
          returning ±inf at endpoints where it diverges.

          lower (float): 𝔞ₖ.

          upper (float): 𝔟ₖ.

          reference (float): 𝔢ₖ, where sₖ vanishes.
        """
        self._forward = forward
        self.lower = lower
        self.upper = upper
        self.reference = reference
        ends = forward(np.array([lower, upper], dtype=np.float64))
        self.image = (float(ends[0]), float(ends[1]))

    def __call__(self, x: FloatArrayT | float) -> FloatArrayT:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return self._forward(np.clip(x, self.lower, self.upper))

    def _bracket(self, y: float) -> tuple[float, float]:
        lo, hi = self.reference, self.reference
        step = 1.0
        while float(self(lo)[0]) > y:
            lo = max(self.reference - step, self.lower)
            step *= 2
        step = 1.0
        while float(self(hi)[0]) < y:
            hi = min(self.reference + step, self.upper)
            step *= 2
        return lo, hi

    def inverse(self, y: float) -> float:
        """tₖ(y) for y in the image Jₖ, saturating at its ends."""
        if y <= self.image[0]:
            return self.lower
        if y >= self.image[1]:
            return self.upper
        lo, hi = self._bracket(y)
        if lo == hi:
            return lo
        return float(
            optimize.brentq(lambda x: float(self(x)[0]) - y,
                            lo,
                            hi,
                            xtol=INVERSION_TOLERANCE))


@dataclasses.dataclass
class EffectiveIntervalSet:
    """Disjoint effective intervals 𝐈ₖ with ends 𝔞ₖ < 𝔟ₖ, sorted.

    Attributes:

      density (SpeedDensity): The density the intervals were built for.

      lower (FloatArrayT): 𝔞ₖ.

      upper (FloatArrayT): 𝔟ₖ.

      closed_left (npt.NDArray[np.bool_]): Whether 𝔞ₖ ∈ 𝐈ₖ.

      closed_right (npt.NDArray[np.bool_]): Whether 𝔟ₖ ∈ 𝐈ₖ.

      reference (FloatArrayT): 𝔢ₖ.

      first (npt.NDArray[np.int64]): First member interval of the underlying
      decomposition.

      last (npt.NDArray[np.int64]): Last member interval.

      undecided (list[int]): Indices k whose gluing with 𝐈ₖ₊₁ could not be
      decided; they were kept apart.
    """
    density: SpeedDensity
    lower: FloatArrayT
    upper: FloatArrayT
    closed_left: npt.NDArray[np.bool_]
    closed_right: npt.NDArray[np.bool_]
    reference: FloatArrayT
    first: npt.NDArray[np.int64]
    last: npt.NDArray[np.int64]
    factory: Callable[[int], ScaleFunction]
    undecided: list[int] = dataclasses.field(default_factory=list)
    _scales: dict[int, ScaleFunction] = dataclasses.field(default_factory=dict,
                                                          repr=False)

    def __len__(self) -> int:
        return len(self.lower)

    def scale(self, k: int) -> ScaleFunction:
        """The adapted scale function of 𝐈ₖ, built on first use."""
        if k not in self._scales:
            self._scales[k] = self.factory(k)
        return self._scales[k]

    def image(self, k: int) -> tuple[float, float]:
        """Jₖ = (sₖ(𝔞ₖ), sₖ(𝔟ₖ))."""
        return self.scale(k).image

    def locate(self, x: float) -> int | None:
        """Index of the effective interval containing x."""
        k = int(np.searchsorted(self.lower, x, side="right")) - 1
        if k < 0:
            return None
        if self.lower[k] < x < self.upper[k]:
            return k
        if x == self.lower[k] and self.closed_left[k]:
            return k
        if x == self.upper[k] and self.closed_right[k]:
            return k
        return None

    @property
    def bounded(self) -> bool:
        return bool(
            np.all(np.isfinite(self.lower)) and np.all(np.isfinite(
                self.upper)))

    def flags(self) -> list[tuple[float, float, bool, bool]]:
        """(𝔞ₖ, 𝔟ₖ, closed left, closed right) of every interval."""
        return [(float(a), float(b), bool(l), bool(r)) for a, b, l, r in zip(
            self.lower, self.upper, self.closed_left, self.closed_right)]


class SkewDensity:
    """ρ = cₙ·ϱₙ on Iₙ, ρ(aₙ) = cₙ·ϱₙ(aₙ+) at points of Ξ⁺, zero elsewhere.

    Attributes:

      constant_ratio (float | None): β when the constants of a Cantor
      structure decay like β^(ℓ−1) over gap levels; deeper, unmaterialized
      gaps are assumed to follow the same rule.
    """

    def __init__(self,
                 m: CheckedMeasure,
                 decomposition: IntervalDecomposition,
                 profiles: dict[int, DensityProfile],
                 stats: StatsTable,
                 constants: FloatArrayT,
                 constant_ratio: float | None = None,
                 options: ProfileOptions | None = None) -> None:
        constants = np.asarray(constants, dtype=np.float64)
        if constants.shape != (len(decomposition),):
            raise ValueError(f"Expected {len(decomposition)} constants, got "
                             f"{constants.shape}")
        if not np.all(constants > 0) or not np.all(np.isfinite(constants)):
            raise ValueError("Constants must be positive and finite")
        self.measure = m
        self.decomposition = decomposition
        self.profiles = profiles
        self.stats = stats
        self.constants = constants
        self.constant_ratio = constant_ratio
        self.options = options
        self._logger = logging.getLogger("skewbm.structure.SkewDensity")

    def profile(self, index: int) -> DensityProfile:
        return interval_profile(self.measure, self.decomposition,
                                self.profiles, index, self.options)

    def scaled(self, factor: float) -> SkewDensity:
        """The same density with every cₙ multiplied by `factor` > 0."""
        if factor <= 0:
            raise ValueError(f"Scaling factor must be positive, got {factor}")
        ratio = self.constant_ratio
        return SkewDensity(self.measure, self.decomposition, self.profiles,
                           self.stats, self.constants * factor, ratio,
                           self.options)

    def members(self, x: FloatArrayT) -> npt.NDArray[np.int64]:
        """Interval index of every point of G, −1 elsewhere."""
        d = self.decomposition
        index = np.searchsorted(d.lower, x, side="left") - 1
        valid = index >= 0
        safe = np.clip(index, 0, len(d) - 1)
        inside = valid & (d.lower[safe] < x) & (x < d.upper[safe])
        return np.where(inside, index, -1).astype(np.int64)

    def _log_limit(self, index: int, end: str) -> float:
        d = self.decomposition
        if d.uniform(index):
            return math.log(self.constants[index])
        limit = self.profile(index).limit("a" if end == "a" else "b")
        if limit.kind == "positive" and limit.value:
            return math.log(self.constants[index] * limit.value)
        if limit.kind == "zero":
            return -math.inf
        return math.nan

    def log_value(self,
                  x: FloatArrayT | float,
                  side: SideT = "right") -> FloatArrayT:
        """log ρ(x) (side "right") or log ρ(x−) (side "left"), `-inf` where
        ρ vanishes and `nan` where an endpoint limit is unknown."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        d = self.decomposition
        members = self.members(x)
        result = np.full_like(x, -np.inf)
        for index in np.unique(members[members >= 0]):
            mask = members == index
            base = math.log(self.constants[index])
            if d.uniform(int(index)):
                result[mask] = base
            else:
                result[mask] = base + self.profile(int(index)).log_value(
                    x[mask], side)
        # Ξ⁺ points carry the right limit, left limits at bₙ come from Iₙ.
        outside = np.flatnonzero(members < 0)
        for i in outside:
            z = float(x[i])
            if side == "right" and np.any(self.measure.xi_plus == z):
                index = d.starting_at(z)
                if index is not None:
                    result[i] = self._log_limit(index, "a")
            elif side == "left":
                index = d.ending_at(z)
                if index is not None:
                    result[i] = self._log_limit(index, "b")
        return result

    def value(self, x: FloatArrayT | float, side: SideT = "right") -> FloatArrayT:
        with np.errstate(over="ignore"):
            return np.exp(self.log_value(x, side))

    def tail(self, end: float) -> TailBehavior:
        """Tail behaviour of ρ toward an endpoint of an interval of G."""
        d = self.decomposition
        index = d.starting_at(end)
        side: EndpointT = "a"
        if index is None:
            index = d.ending_at(end)
            side = "b"
        if index is None:
            return TailBehavior(kind="unknown", endpoint=end)
        return self.profile(index).tail(side)

    # Integrals of 1/ρ.

    def inverse_halves(self) -> tuple[FloatArrayT, FloatArrayT]:
        """Bˡₙ/cₙ and Bʳₙ/cₙ, the halves of ∫1/ρ over every interval."""
        return (self.stats.B_left / self.constants,
                self.stats.B_right / self.constants)

    def primitive(self, index: int, x: FloatArrayT) -> FloatArrayT:
        """∫_eₙ^x 1/ρ for x in the closure of Iₙ."""
        d = self.decomposition
        if d.uniform(index):
            lower, upper, reference = d.interval(index)
            return (np.clip(x, lower, upper) - reference) / self.constants[index]
        return self.profile(index).primitive(x, -1.0) / self.constants[index]


def _cluster_connected(rho: SkewDensity, left: int,
                       right: int) -> bool | None:
    """Whether consecutive intervals are scale-connected under the given
    constants."""
    d = rho.decomposition
    if not d.gap_lebesgue_null(left, right):
        return False
    b_right = rho.stats.B_right[left]
    b_left = rho.stats.B_left[right]
    if math.isinf(b_right) or math.isinf(b_left):
        return False
    if math.isnan(b_right) or math.isnan(b_left):
        return None
    return True


def _cantor_glued(rho: SkewDensity) -> bool | None:
    """Whether all intervals of a Cantor structure are scale-connected.

    Σ B/c over the gaps between I₁ and I₂ converges iff the level series
    Σ 2^(ℓ−1)·length_ℓ / β^(ℓ−1) does.
    """
    d = rho.decomposition
    tail = d.gap_tail
    assert tail is not None
    if not tail.complement_null():
        return False
    if rho.constant_ratio is None:
        _logger.warning("Constants of the Cantor structure have no level "
                        "rule, its intervals are kept apart")
        return False
    verdict, _ = tail.series_verdict(1.0, rho.constant_ratio)
    if not verdict:
        return verdict
    return _cluster_connected(rho, 0, 1) is not False and _cluster_connected(
        rho, len(d) - 2, len(d) - 1) is not False


def _clusters(rho: SkewDensity) -> tuple[list[tuple[int, int]], list[int]]:
    d = rho.decomposition
    n = len(d)
    if d.limit_set is not None:
        if _cantor_glued(rho):
            return [(0, n - 1)], []
        return [(i, i) for i in range(n)], []
    clusters: list[tuple[int, int]] = []
    undecided: list[int] = []
    start = 0
    for i in range(n - 1):
        connected = _cluster_connected(rho, i, i + 1)
        if connected is None:
            _logger.warning("Scale connection of intervals %d and %d is "
                            "undecided, kept apart", i, i + 1)
            undecided.append(len(clusters))
        if not connected:
            clusters.append((start, i))
            start = i + 1
    clusters.append((start, n - 1))
    return clusters, undecided


def _cluster_scale(rho: SkewDensity, first: int,
                   last: int) -> tuple[ScaleFunction, float]:
    """The scale function of a cluster and its reference point."""
    d = rho.decomposition
    b_left, b_right = rho.inverse_halves()
    references = d.reference[first:last + 1]
    origin = first + int(np.argmin(np.abs(references)))
    # s at eₙ: offsets accumulate Bʳ/c of one interval and Bˡ/c of the next.
    steps = b_right[first:last] + b_left[first + 1:last + 1]
    offsets = np.concatenate([[0.0], np.cumsum(steps)])
    offsets -= offsets[origin - first]
    lower = float(d.lower[first])
    upper = float(d.upper[last])

    def forward(x: FloatArrayT) -> FloatArrayT:
        x = np.asarray(x, dtype=np.float64)
        result = np.empty_like(x)
        index = np.clip(
            np.searchsorted(d.lower[first:last + 1], x, side="left") - 1 +
            first, first, last)
        below = x <= lower
        result[below] = offsets[0] - b_left[first]
        for n in np.unique(index[~below]):
            mask = (index == n) & ~below
            inside = mask & (x < d.upper[n])
            beyond = mask & (x >= d.upper[n])
            result[inside] = offsets[n - first] + rho.primitive(
                int(n), x[inside])
            # G^c points inside the cluster take the value at the end of the
            # interval on their left.
            result[beyond] = offsets[n - first] + b_right[n]
        return result

    reference = float(d.reference[origin])
    return ScaleFunction(forward, lower, upper, reference), reference


def glue_effective_intervals(rho: SkewDensity) -> EffectiveIntervalSet:
    """Merge scale-connected intervals and adjoin endpoints where the
    one-sided ∫1/ρ is finite."""
    d = rho.decomposition
    clusters, undecided = _clusters(rho)
    first = np.array([c[0] for c in clusters], dtype=np.int64)
    last = np.array([c[1] for c in clusters], dtype=np.int64)
    lower = d.lower[first].copy()
    upper = d.upper[last].copy()
    closed_left = np.isfinite(lower) & np.isfinite(rho.stats.B_left[first])
    closed_right = np.isfinite(upper) & np.isfinite(rho.stats.B_right[last])
    reference = np.empty(len(clusters))
    for k, (a, b) in enumerate(clusters):
        references = d.reference[a:b + 1]
        reference[k] = references[int(np.argmin(np.abs(references)))]

    def factory(k: int) -> ScaleFunction:
        scale, _ = _cluster_scale(rho, int(first[k]), int(last[k]))
        return scale

    _logger.debug("Glued %d intervals into %d effective intervals", len(d),
                  len(clusters))
    return EffectiveIntervalSet(density=rho,
                                lower=lower,
                                upper=upper,
                                closed_left=closed_left,
                                closed_right=closed_right,
                                reference=reference,
                                first=first,
                                last=last,
                                factory=factory,
                                undecided=undecided)

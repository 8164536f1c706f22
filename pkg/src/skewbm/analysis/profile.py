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
"""The profile ϱ of one interval (a, b) of G with reference point e.

    log ϱ(z) = 2·μ_c((e, z]) + Σ_{e < y ≤ z} log((1 + μ_y) / (1 − μ_y))

with the usual sign convention for z < e. The profiles ϱ⁺ and ϱ⁻ replace μ by
μ⁺ and μ⁻, both are nondecreasing and ϱ = ϱ⁺/ϱ⁻.

Near each endpoint the interval is cut into dyadic shells; shell integrals and
shell variations feed the numeric verdicts whenever the measure metadata and
the closed-form tail tests do not decide.
"""

from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from skewbm.analysis.atom_rules import AtomRule
from skewbm.analysis.decomposition import IntervalDecomposition
from skewbm.analysis.errors import AtomOnBoundary, NonRadonError
from skewbm.analysis.errors import OutOfInterval
from skewbm.analysis.expressions import PowerExpr
from skewbm.analysis.extended_real import ExtendedReal, weakest
from skewbm.analysis.measure import CheckedMeasure, DensityPiece
from skewbm.analysis.measure import mass_on_interval
from skewbm.analysis.quadrature import RATIO_THRESHOLD, dyadic_shells
from skewbm.analysis.quadrature import extrapolated_sum, finite_integral
from skewbm.analysis.quadrature import gauss_legendre
from skewbm.analysis.quadrature import ratio_verdict
from skewbm.analysis.tails import TailBehavior, measure_tail
from skewbm.analysis.types import BVKindT, ConfidenceT, EndpointT
from skewbm.analysis.types import FloatArrayT, HalfT, LimitKindT, MassVariantT
from skewbm.analysis.types import SideT

# Most atoms of one infinite rule kept in the table of a profile.
MAX_TABLE_TERMS: int = 2_000_000

_logger = logging.getLogger("skewbm.analysis.profile")


class ProfileOptions(BaseModel):
    """Numeric knobs of profile construction.

    Attributes:

      eps_prod (float): Relative error allowed when truncating infinite atom
      products.

      endpoint_resolution (float): Shells approach a finite endpoint down to
      this fraction of its distance from e, and an infinite one up to the
      inverse of it.

      subdivisions (int): Equal parts of every segment between breakpoints
      integrated by the Gauss–Legendre rule when ϱ has a continuous part.
    """
    model_config = ConfigDict(frozen=True)

    eps_prod: float = Field(default=1e-12, gt=0, lt=1)
    endpoint_resolution: float = Field(default=2.0**-20, gt=0, lt=0.5)
    subdivisions: int = Field(default=4, ge=1)

    @property
    def shell_levels(self) -> int:
        return math.ceil(-math.log2(self.endpoint_resolution))


class EndpointLimit(BaseModel):
    """lim ϱ(z) as z tends to an endpoint from inside.

    Attributes:

      kind (LimitKindT): "positive", "zero", "diverges" or "unknown".

      value (float | None): The limit for the "positive" kind.

      confidence (ConfidenceT): How the kind was obtained.

      evidence (str): Short description of the decision.
    """
    model_config = ConfigDict(frozen=True)

    kind: LimitKindT
    value: float | None = None
    confidence: ConfidenceT = "certified"
    evidence: str = ""


class BVCertificate(BaseModel):
    """Bounded variation of ϱ on a closed half [a, e] or [e, b]."""
    model_config = ConfigDict(frozen=True)

    kind: BVKindT
    total_variation: ExtendedReal
    confidence: ConfidenceT = "certified"


class IntervalStats(BaseModel):
    """A = ∫ϱ and B = ∫1/ϱ with their halves over (a, e] and (e, b), and
    V = |ν_ϱ|(closure) of one interval."""
    model_config = ConfigDict(frozen=True)

    A: ExtendedReal
    B: ExtendedReal
    A_left: ExtendedReal
    A_right: ExtendedReal
    B_left: ExtendedReal
    B_right: ExtendedReal
    V: ExtendedReal

    @classmethod
    def from_halves(cls, a_left: ExtendedReal, a_right: ExtendedReal,
                    b_left: ExtendedReal, b_right: ExtendedReal,
                    v: ExtendedReal) -> IntervalStats:
        return cls(A=a_left + a_right,
                   B=b_left + b_right,
                   A_left=a_left,
                   A_right=a_right,
                   B_left=b_left,
                   B_right=b_right,
                   V=v)

    @classmethod
    def uniform(cls, length: float) -> IntervalStats:
        """Statistics of ϱ ≡ 1 on a bounded interval."""
        half = ExtendedReal.finite(length / 2)
        return cls.from_halves(half, half, half, half,
                               ExtendedReal.finite(2.0))

    @property
    def confidence(self) -> ConfidenceT:
        return weakest(self.A.confidence, self.B.confidence,
                       self.V.confidence)


@dataclasses.dataclass(frozen=True)
class StatsTable:
    """`IntervalStats` of a whole decomposition as arrays, `inf` marking
    infinite and `nan` unknown entries."""
    A: FloatArrayT
    B: FloatArrayT
    A_left: FloatArrayT
    A_right: FloatArrayT
    B_left: FloatArrayT
    B_right: FloatArrayT
    V: FloatArrayT
    certified: npt.NDArray[np.bool_]

    def __len__(self) -> int:
        return len(self.A)

    @classmethod
    def from_stats(cls, stats: list[IntervalStats]) -> StatsTable:

        def column(name: str) -> FloatArrayT:
            return np.array([getattr(s, name).as_float() for s in stats],
                            dtype=np.float64)

        return cls(A=column("A"),
                   B=column("B"),
                   A_left=column("A_left"),
                   A_right=column("A_right"),
                   B_left=column("B_left"),
                   B_right=column("B_right"),
                   V=column("V"),
                   certified=np.array(
                       [s.confidence == "certified" for s in stats],
                       dtype=np.bool_))

    def row(self, index: int) -> IntervalStats:

        def value(column: FloatArrayT) -> ExtendedReal:
            x = float(column[index])
            if math.isnan(x):
                return ExtendedReal.unknown()
            confidence: ConfidenceT = ("certified"
                                       if self.certified[index] else "numeric")
            return ExtendedReal.finite(x, confidence)

        return IntervalStats(A=value(self.A),
                             B=value(self.B),
                             A_left=value(self.A_left),
                             A_right=value(self.A_right),
                             B_left=value(self.B_left),
                             B_right=value(self.B_right),
                             V=value(self.V))


@dataclasses.dataclass(frozen=True)
class _AtomTable:
    """Atoms inside the interval, sorted, with cumulative log factors (a
    leading zero included)."""
    locations: FloatArrayT
    weights: FloatArrayT
    cumulative: dict[MassVariantT, FloatArrayT]
    coverage: tuple[float, float]
    tail_bound: dict[EndpointT, float]
    truncated: tuple[tuple[AtomRule, int, EndpointT], ...]

    def partial(self, z: FloatArrayT, side: SideT,
                variant: MassVariantT) -> FloatArrayT:
        index = np.searchsorted(self.locations,
                                z,
                                side="right" if side == "right" else "left")
        return self.cumulative[variant][index]


def _log_factors(weights: FloatArrayT) -> dict[MassVariantT, FloatArrayT]:
    return {
        "total": 2 * np.arctanh(weights),
        "plus": 2 * np.arctanh(np.maximum(weights, 0.0)),
        "minus": 2 * np.arctanh(np.maximum(-weights, 0.0)),
    }


def _tail_log_bound(rule: AtomRule, last: int) -> float:
    """Bound on Σ |log((1 + w)/(1 − w))| over indices after `last`."""
    tail = rule.effective_tail().tail_sum(last + 1)
    if tail >= 0.2:
        return math.inf
    # |log((1 + w)/(1 − w))| ≤ 2.5|w| for |w| ≤ 0.2.
    return 2.5 * tail


def _rule_horizon(rule: AtomRule, lower: float, upper: float,
                  reference: float, options: ProfileOptions) -> int:
    """Last index needed to cover the interval up to the shell resolution."""
    limit = rule.locations.limit
    levels = options.shell_levels
    if math.isinf(limit):
        toward = upper if limit > 0 else lower
        if math.isinf(toward):
            radius = max(abs(reference), 1.0) * 2.0**levels
        else:
            radius = max(abs(toward), 1.0)
        distance = 1.0 / radius
    elif lower <= limit <= upper:
        if limit in (lower, upper):
            scale = abs(reference - limit)
        else:
            scale = min(limit - lower, upper - limit, 1.0)
        distance = options.endpoint_resolution * scale
    else:
        distance = min(abs(limit - lower), abs(limit - upper))
    return min(rule.locations.first_index_within(distance) + 1,
               rule.first_index + MAX_TABLE_TERMS - 1)


def _atom_table(m: CheckedMeasure, lower: float, upper: float,
                reference: float, options: ProfileOptions) -> _AtomTable:
    inside = (m.atom_locations > lower) & (m.atom_locations < upper)
    locations = [m.atom_locations[inside]]
    weights = [m.atom_weights[inside]]
    coverage = [lower, upper]
    tail_bound: dict[EndpointT, float] = {"a": 0.0, "b": 0.0}
    truncated: list[tuple[AtomRule, int, EndpointT]] = []
    for rule in m.infinite_rules:
        last = _rule_horizon(rule, lower, upper, reference, options)
        limit = rule.locations.limit
        at_end: EndpointT | None = None
        if limit == lower:
            at_end = "a"
        elif limit == upper:
            at_end = "b"
        bound = 0.0
        if at_end is not None and rule.summable:
            bound = _tail_log_bound(rule, last)
            while bound > options.eps_prod and (
                    last - rule.first_index + 1 < MAX_TABLE_TERMS):
                last = min(2 * last + 1,
                           rule.first_index + MAX_TABLE_TERMS - 1)
                bound = _tail_log_bound(rule, last)
            if bound > options.eps_prod:
                _logger.debug("Rule %s truncated at index %d, log bound %g",
                              rule.name, last, bound)
        elif at_end is not None:
            bound = math.inf
        x, w = rule.materialize(last)
        mask = (x > lower) & (x < upper)
        locations.append(x[mask])
        weights.append(w[mask])
        if at_end is not None and mask.any():
            tail_bound[at_end] += bound
            edge = float(x[mask][-1])
            if at_end == "a":
                coverage[0] = max(coverage[0], edge)
            else:
                coverage[1] = min(coverage[1], edge)
            truncated.append((rule, last, at_end))
    all_locations = np.concatenate(locations).astype(np.float64)
    all_weights = np.concatenate(weights).astype(np.float64)
    order = np.argsort(all_locations, kind="stable")
    all_locations = all_locations[order]
    all_weights = all_weights[order]
    barriers = np.flatnonzero(np.abs(all_weights) >= 1.0)
    if len(barriers):
        raise AtomOnBoundary(float(all_locations[barriers[0]]),
                             (lower, upper))
    cumulative = {
        variant: np.concatenate([[0.0], np.cumsum(factors)])
        for variant, factors in _log_factors(all_weights).items()
    }
    return _AtomTable(locations=all_locations,
                      weights=all_weights,
                      cumulative=cumulative,
                      coverage=(coverage[0], coverage[1]),
                      tail_bound=tail_bound,
                      truncated=tuple(truncated))


def _check_radon(m: CheckedMeasure, lower: float, upper: float) -> None:
    interval = (lower, upper)
    for region in m.infinite_regions:
        if region.lo < upper and region.hi > lower:
            raise NonRadonError(interval, f"declared infinite region "
                                f"[{region.lo}, {region.hi}]")
    for piece in m.density_pieces:
        expression = piece.expression
        if isinstance(expression, PowerExpr) and not (
                expression.locally_integrable):
            if lower < expression.x0 < upper and (piece.lo <= expression.x0 <=
                                                  piece.hi):
                raise NonRadonError(interval, f"density not integrable at "
                                    f"{expression.x0}")
    for rule in m.infinite_rules:
        if not rule.summable and lower < rule.locations.limit < upper:
            raise NonRadonError(interval, f"atoms of rule {rule.name!r} "
                                f"accumulate at {rule.locations.limit}")
    if m.gaps is not None and m.gaps.meets_limit_set(lower, upper):
        raise NonRadonError(interval, "the interval meets the Cantor set")


@dataclasses.dataclass(frozen=True)
class _Segments:
    """Pieces of the shells toward one endpoint, split at every breakpoint.

    Shell indices grow toward the endpoint.
    """
    lower: FloatArrayT
    upper: FloatArrayT
    shell: npt.NDArray[np.int64]
    atoms: FloatArrayT
    atom_shell: npt.NDArray[np.int64]
    n_shells: int


class DensityProfile:
    """ϱ, ϱ⁺ and ϱ⁻ on one interval, evaluated lazily.

    Immutable after construction apart from internal caches of derived
    quantities, which are pure functions of the inputs.
    """

    def __init__(self,
                 m: CheckedMeasure,
                 interval: tuple[float, float, float],
                 options: ProfileOptions | None = None,
                 uniform: bool = False) -> None:
        """Build a profile, prefer `build_profile`.

        Args:

          m (CheckedMeasure): The measure.

          interval (tuple[float, float, float]): (a, b, e) with a < e < b.

          options (ProfileOptions | None): Numeric knobs, defaults when
          `None`.

          uniform (bool): The caller guarantees μ has no mass on (a, b), so
          ϱ ≡ 1 (Cantor gaps).
        """
        self.lower, self.upper, self.reference = (float(x) for x in interval)
        if not self.lower < self.reference < self.upper:
            raise ValueError(f"Reference point {self.reference} is not inside "
                             f"({self.lower}, {self.upper})")
        self.measure = m
        self.options = options or ProfileOptions()
        self.uniform = uniform
        if not uniform:
            _check_radon(m, self.lower, self.upper)
        self._table = _atom_table(m if not uniform else _empty_measure(m),
                                  self.lower, self.upper, self.reference,
                                  self.options)
        self._pieces: list[tuple[DensityPiece, float, float]] = []
        if not uniform:
            for piece in m.density_pieces:
                if piece.overlaps(self.lower, self.upper) and getattr(
                        piece.expression, "c", 1.0) != 0:
                    self._pieces.append((piece, max(piece.lo, self.lower),
                                         min(piece.hi, self.upper)))
        self._masses: dict[tuple[HalfT, MassVariantT], ExtendedReal] = {}
        self._limits: dict[EndpointT, EndpointLimit] = {}
        self._bv: dict[HalfT, BVCertificate] = {}
        self._half_integrals: dict[tuple[float, HalfT], ExtendedReal] = {}
        self._segments: dict[EndpointT, _Segments] = {}
        self._primitives: dict[float, tuple[FloatArrayT, FloatArrayT]] = {}
        self._stats: IntervalStats | None = None

    @property
    def interval(self) -> tuple[float, float, float]:
        return self.lower, self.upper, self.reference

    def contains(self, z: float) -> bool:
        return self.lower < z < self.upper

    def atoms(self) -> tuple[FloatArrayT, FloatArrayT]:
        """Atoms of μ inside the interval known to the profile, sorted."""
        return self._table.locations, self._table.weights

    # Evaluation.

    def _continuous(self, z: FloatArrayT, variant: MassVariantT) -> FloatArrayT:
        """μ_c((e, z]) for the chosen part of μ, signed for z < e."""
        total = np.zeros_like(z)
        for piece, lo, hi in self._pieces:
            if variant == "plus" and piece.sign < 0:
                continue
            if variant == "minus" and piece.sign > 0:
                continue
            multiplier = piece.sign if variant == "total" else 1.0
            primitive = piece.expression.antiderivative
            start = primitive(np.array([min(max(self.reference, lo), hi)]))
            values = primitive(np.clip(z, lo, hi))
            assert start is not None and values is not None
            total += multiplier * (values - start[0])
        return total

    def _extension(self, z: float, side: SideT, variant: MassVariantT) -> float:
        """Log factors of atoms between the table coverage and z."""
        extra = 0.0
        for rule, last, end in self._table.truncated:
            if end == "a" and z >= self._table.coverage[0]:
                continue
            if end == "b" and z <= self._table.coverage[1]:
                continue
            limit = rule.locations.limit
            distance = (1.0 / abs(z) if math.isinf(limit) else abs(z - limit))
            need = min(rule.locations.first_index_within(distance) + 1,
                       last + MAX_TABLE_TERMS)
            if need >= last + MAX_TABLE_TERMS:
                _logger.warning("Evaluation at %g needs more than %d extra "
                                "atoms of rule %s", z, MAX_TABLE_TERMS,
                                rule.name)
            x, w = rule.materialize(need)
            offset = last + 1 - rule.first_index
            x, w = x[offset:], w[offset:]
            factors = _log_factors(w)[variant]
            if end == "a":
                between = x > z if side == "right" else x >= z
                extra -= float(np.sum(factors[between & (x > self.lower)]))
            else:
                between = x <= z if side == "right" else x < z
                extra += float(np.sum(factors[between & (x < self.upper)]))
        return extra

    def log_value(self,
                  z: FloatArrayT | float,
                  side: SideT = "right",
                  variant: MassVariantT = "total") -> FloatArrayT:
        """log ϱ(z) (side "right") or log ϱ(z−) (side "left"), vectorized;
        `variant` selects ϱ, ϱ⁺ or ϱ⁻."""
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        if self.uniform:
            return np.zeros_like(z)
        jumps = self._table.partial(z, side, variant) - self._table.partial(
            np.array([self.reference]), "right", variant)[0]
        result = 2 * self._continuous(z, variant) + jumps
        low, high = self._table.coverage
        for index in np.flatnonzero((z < low) | (z > high)):
            result[index] += self._extension(float(z[index]), side, variant)
        return result

    def value(self,
              z: FloatArrayT | float,
              side: SideT = "right",
              variant: MassVariantT = "total") -> FloatArrayT:
        """ϱ(z) or ϱ(z−), see `log_value`."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_value(z, side, variant))

    # Metadata about the halves (a, e] and (e, b).

    def half_mass(self, half: HalfT, variant: MassVariantT) -> ExtendedReal:
        key = (half, variant)
        if key not in self._masses:
            if self.uniform:
                self._masses[key] = ExtendedReal.zero()
            elif half == "left":
                self._masses[key] = mass_on_interval(self.measure,
                                                     self.lower,
                                                     self.reference,
                                                     variant,
                                                     closed=(False, True))
            else:
                self._masses[key] = mass_on_interval(self.measure,
                                                     self.reference,
                                                     self.upper, variant)
        return self._masses[key]

    def tail(self, side: EndpointT) -> TailBehavior:
        end = self.lower if side == "a" else self.upper
        if self.uniform:
            return TailBehavior(kind="converges", endpoint=end)
        return measure_tail(self.measure, end, side)

    # Shells.

    def _shell_segments(self, side: EndpointT) -> _Segments:
        if side in self._segments:
            return self._segments[side]
        end = self.lower if side == "a" else self.upper
        shells = dyadic_shells(end, self.reference, self.options.shell_levels)
        low, high = self._table.coverage
        covered = [(lo, hi) for lo, hi in shells if lo >= low and hi <= high]
        if len(covered) < len(shells):
            _logger.warning("Only %d shells toward %g are covered by the "
                            "atom table", len(covered), end)
        shells = covered or shells[:1]
        edges = np.unique(np.array(shells, dtype=np.float64).ravel())
        first, last = edges[0], edges[-1]
        inner = [self._table.locations[(self._table.locations > first) &
                                       (self._table.locations < last)]]
        for piece, lo, hi in self._pieces:
            candidates = [lo, hi]
            singular = piece.expression.singular_point
            if singular is not None:
                candidates.append(singular)
            inner.append(
                np.array([x for x in candidates if first < x < last],
                         dtype=np.float64))
        breaks = np.unique(np.concatenate([edges] + inner))
        lower, upper = breaks[:-1], breaks[1:]
        if self._pieces and self.options.subdivisions > 1:
            steps = np.linspace(0.0, 1.0, self.options.subdivisions + 1)
            grid = lower[:, None] + (upper - lower)[:, None] * steps[None, :]
            lower = grid[:, :-1].ravel()
            upper = grid[:, 1:].ravel()
        n_shells = len(edges) - 1

        def shell_of(x: FloatArrayT) -> npt.NDArray[np.int64]:
            index = np.clip(
                np.searchsorted(edges, x, side="right") - 1, 0, n_shells - 1)
            if side == "a":
                index = n_shells - 1 - index
            return index.astype(np.int64)

        atoms = inner[0]
        segments = _Segments(lower=lower,
                             upper=upper,
                             shell=shell_of((lower + upper) / 2),
                             atoms=atoms,
                             atom_shell=shell_of(atoms),
                             n_shells=n_shells)
        self._segments[side] = segments
        _logger.debug("%d segments in %d shells toward %g", len(lower),
                      n_shells, end)
        return segments

    def _shell_integrals(self, sigma: float, side: EndpointT) -> FloatArrayT:
        """∫ ϱ^σ over every shell toward the endpoint."""
        seg = self._shell_segments(side)
        with np.errstate(over="ignore", invalid="ignore"):
            if self._pieces:
                values = gauss_legendre(
                    lambda x: np.exp(sigma * self.log_value(x)), seg.lower,
                    seg.upper)
            else:
                middle = (seg.lower + seg.upper) / 2
                values = (seg.upper - seg.lower) * np.exp(
                    sigma * self.log_value(middle))
        values = np.nan_to_num(values, nan=np.inf)
        return np.bincount(seg.shell, weights=values, minlength=seg.n_shells)

    def _knots(self, sigma: float) -> tuple[FloatArrayT, FloatArrayT]:
        """Breakpoints of both shell families and ∫_e ϱ^σ up to each."""
        if sigma not in self._primitives:
            parts = []
            for side in ("a", "b"):
                seg = self._shell_segments(side)
                parts.extend([seg.lower, seg.upper])
            knots = np.unique(np.concatenate(parts))
            with np.errstate(over="ignore", invalid="ignore"):
                pieces = gauss_legendre(
                    lambda x: np.exp(sigma * self.log_value(x)), knots[:-1],
                    knots[1:])
            values = np.concatenate([[0.0], np.cumsum(pieces)])
            origin = int(np.searchsorted(knots, self.reference))
            self._primitives[sigma] = (knots, values - values[origin])
        return self._primitives[sigma]

    def primitive(self,
                  x: FloatArrayT | float,
                  sigma: float = -1.0) -> FloatArrayT:
        """∫_e^x ϱ^σ, negative for x < e and vectorized.

        At or beyond an endpoint the result is the signed half integral,
        `inf` in magnitude when it diverges.
        """
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if self.uniform:
            return np.clip(x, self.lower, self.upper) - self.reference
        knots, values = self._knots(sigma)
        result = np.empty_like(x)
        inside = (x >= knots[0]) & (x <= knots[-1])
        if np.any(inside):
            index = np.clip(
                np.searchsorted(knots, x[inside], side="right") - 1, 0,
                len(knots) - 2)
            with np.errstate(over="ignore", invalid="ignore"):
                result[inside] = values[index] + gauss_legendre(
                    lambda t: np.exp(sigma * self.log_value(t)),
                    knots[index], x[inside])
        for i in np.flatnonzero(~inside):
            z = float(x[i])
            if z <= self.lower:
                result[i] = -self.half_integral(sigma, "left").as_float()
            elif z >= self.upper:
                result[i] = self.half_integral(sigma, "right").as_float()
            else:
                edge = knots[0] if z < knots[0] else knots[-1]
                base = values[0] if z < knots[0] else values[-1]
                extra = finite_integral(
                    lambda t: float(np.exp(sigma * self.log_value(t)[0])),
                    min(z, edge), max(z, edge))
                result[i] = base + (extra if z > edge else -extra)
        return result

    def _shell_variations(
            self, side: EndpointT) -> tuple[FloatArrayT, FloatArrayT, FloatArrayT]:
        """Total variation, supremum and infimum of ϱ over every shell.

        ϱ is monotone between consecutive breakpoints, so these are exact up
        to rounding.
        """
        seg = self._shell_segments(side)
        start = self.value(seg.lower, "right")
        stop = self.value(seg.upper, "left")
        with np.errstate(invalid="ignore"):
            inside = np.nan_to_num(np.abs(stop - start), nan=np.inf)
            jumps = np.nan_to_num(np.abs(
                self.value(seg.atoms, "right") -
                self.value(seg.atoms, "left")),
                                  nan=np.inf)
        variation = np.bincount(seg.shell,
                                weights=inside,
                                minlength=seg.n_shells) + np.bincount(
                                    seg.atom_shell,
                                    weights=jumps,
                                    minlength=seg.n_shells)
        sup = np.zeros(seg.n_shells)
        inf = np.full(seg.n_shells, np.inf)
        np.maximum.at(sup, seg.shell, np.maximum(start, stop))
        np.minimum.at(inf, seg.shell, np.minimum(start, stop))
        return variation, sup, inf

    # Endpoint limits.

    def _limit_value(self, side: EndpointT) -> tuple[float, ConfidenceT]:
        """The positive limit at an endpoint where |μ| of the half is finite."""
        if side == "a":
            lo, hi = self.lower, self.reference
        else:
            lo, hi = self.reference, self.upper
        continuous = 0.0
        for piece, _, _ in self._pieces:
            continuous += piece.sign * piece.clipped_integral(lo, hi)
        reference_sum = self._table.partial(np.array([self.reference]),
                                            "right", "total")[0]
        cumulative = self._table.cumulative["total"]
        if side == "a":
            log_value = -2 * continuous - (reference_sum - cumulative[0])
        else:
            log_value = 2 * continuous + (cumulative[-1] - reference_sum)
        bound = self._table.tail_bound[side]
        confidence: ConfidenceT = ("certified"
                                   if bound <= self.options.eps_prod else
                                   "numeric")
        return math.exp(log_value), confidence

    def _numeric_limit(self, side: EndpointT) -> EndpointLimit:
        _, sup, inf = self._shell_variations(side)
        depth = max(3, len(sup) // 3)
        sup, inf = sup[-depth:], inf[-depth:]
        with np.errstate(divide="ignore", invalid="ignore"):
            sup_ratio = float(np.median(sup[1:] / sup[:-1]))
            inf_ratio = float(np.median(inf[1:] / inf[:-1]))
        evidence = (f"deepest shells: sup {sup[-1]:.6g}, inf {inf[-1]:.6g}, "
                    f"ratios {sup_ratio:.4g}/{inf_ratio:.4g}")
        if sup[-1] < sup[0] and sup_ratio < RATIO_THRESHOLD:
            kind: LimitKindT = "zero"
        elif inf[-1] > inf[0] and inf_ratio > 1 / RATIO_THRESHOLD:
            kind = "diverges"
        elif inf[-1] > 0 and sup[-1] / inf[-1] < 1 + 1e-6 and abs(
                sup_ratio - 1) < 1e-3:
            kind = "positive"
        else:
            kind = "unknown"
        _logger.warning("Limit of ϱ at %g decided numerically as %s (%s)",
                        self.lower if side == "a" else self.upper, kind,
                        evidence)
        value = float(sup[-1]) if kind == "positive" else None
        return EndpointLimit(kind=kind,
                             value=value,
                             confidence="numeric",
                             evidence=evidence)

    def limit(self, side: EndpointT) -> EndpointLimit:
        """Classify lim ϱ(z) toward aₙ (side "a") or bₙ (side "b")."""
        if side in self._limits:
            return self._limits[side]
        half: HalfT = "left" if side == "a" else "right"
        plus = self.half_mass(half, "plus")
        minus = self.half_mass(half, "minus")
        confidence = weakest(plus.confidence, minus.confidence)
        # Toward a, infinite μ⁺ drives ϱ to zero and infinite μ⁻ to ∞;
        # toward b the roles are swapped.
        to_zero, to_infinity = (plus, minus) if side == "a" else (minus, plus)
        if to_zero.is_finite and to_infinity.is_finite:
            value, value_confidence = self._limit_value(side)
            result = EndpointLimit(kind="positive",
                                   value=value,
                                   confidence=weakest(confidence,
                                                      value_confidence),
                                   evidence="|μ| of the half is finite")
        elif to_zero.is_infinite and to_infinity.is_finite:
            result = EndpointLimit(kind="zero",
                                   confidence=confidence,
                                   evidence="one part of μ is infinite "
                                   "toward the endpoint")
        elif to_infinity.is_infinite and to_zero.is_finite:
            result = EndpointLimit(kind="diverges",
                                   confidence=confidence,
                                   evidence="one part of μ is infinite "
                                   "toward the endpoint")
        else:
            result = self._numeric_limit(side)
        self._limits[side] = result
        return result

    # Bounded variation and integrals.

    def bv(self, half: HalfT) -> BVCertificate:
        """Bounded variation of ϱ on the closed half, boundary jump
        excluded."""
        if half in self._bv:
            return self._bv[half]
        side: EndpointT = "a" if half == "left" else "b"
        guard = self.half_mass(half, "minus" if half == "left" else "plus")
        limit = self.limit(side)
        if limit.kind == "diverges" and limit.confidence == "certified":
            result = BVCertificate(kind="not_bv",
                                   total_variation=ExtendedReal.infinite())
        else:
            variation, _, _ = self._shell_variations(side)
            if guard.is_finite:
                result = BVCertificate(
                    kind="bv",
                    total_variation=ExtendedReal.finite(
                        extrapolated_sum(variation), guard.confidence),
                    confidence=guard.confidence)
            else:
                verdict = ratio_verdict(variation)
                _logger.warning("Bounded variation toward %g decided "
                                "numerically: %s", self.lower if half ==
                                "left" else self.upper, verdict)
                if verdict is None:
                    result = BVCertificate(
                        kind="unknown",
                        total_variation=ExtendedReal.unknown(),
                        confidence="numeric")
                elif verdict:
                    result = BVCertificate(
                        kind="bv",
                        total_variation=ExtendedReal.finite(
                            extrapolated_sum(variation), "numeric"),
                        confidence="numeric")
                else:
                    result = BVCertificate(
                        kind="not_bv",
                        total_variation=ExtendedReal.infinite("numeric"),
                        confidence="numeric")
        self._bv[half] = result
        return result

    def half_integral(self, sigma: float, half: HalfT) -> ExtendedReal:
        """∫ ϱ^σ over (a, e) or (e, b) for σ = ±1."""
        key = (sigma, half)
        if key in self._half_integrals:
            return self._half_integrals[key]
        side: EndpointT = "a" if half == "left" else "b"
        end = self.lower if side == "a" else self.upper
        finite_end = math.isfinite(end)
        decided: bool | None = None
        limit = self.limit(side)
        if limit.confidence == "certified":
            match limit.kind:
                case "positive":
                    decided = finite_end
                case "zero" if sigma > 0 and finite_end:
                    decided = True
                case "zero" if sigma < 0 and not finite_end:
                    decided = False
                case "diverges" if sigma < 0 and finite_end:
                    decided = True
                case "diverges" if sigma > 0 and not finite_end:
                    decided = False
        if decided is None:
            decided = self.tail(side).power_integral_finite(sigma)
        if decided is False:
            result = ExtendedReal.infinite()
        elif decided:
            result = ExtendedReal.finite(
                extrapolated_sum(self._shell_integrals(sigma, side)))
        else:
            terms = self._shell_integrals(sigma, side)
            verdict = ratio_verdict(terms)
            _logger.warning("∫ϱ^%g toward %g decided numerically: %s", sigma,
                            end, verdict)
            if verdict is None:
                result = ExtendedReal.unknown()
            elif verdict:
                result = ExtendedReal.finite(extrapolated_sum(terms),
                                             "numeric")
            else:
                result = ExtendedReal.infinite("numeric")
        self._half_integrals[key] = result
        return result

    def _boundary_jump(self, side: EndpointT) -> ExtendedReal:
        """Jump of the canonical version (ϱ(a−) = ϱ(b) = 0) at a finite end."""
        end = self.lower if side == "a" else self.upper
        if math.isinf(end):
            return ExtendedReal.zero()
        limit = self.limit(side)
        match limit.kind:
            case "positive":
                assert limit.value is not None
                return ExtendedReal.finite(limit.value, limit.confidence)
            case "zero":
                return ExtendedReal.finite(0.0, limit.confidence)
            case "diverges":
                return ExtendedReal.infinite(limit.confidence)
            case _:
                _, sup, _ = self._shell_variations(side)
                return ExtendedReal.finite(float(sup[-1]), "numeric")

    def stats(self) -> IntervalStats:
        if self._stats is None:
            if self.uniform and math.isfinite(self.lower) and math.isfinite(
                    self.upper):
                self._stats = IntervalStats.uniform(self.upper - self.lower)
            else:
                variation = (self.bv("left").total_variation +
                             self.bv("right").total_variation +
                             self._boundary_jump("a") +
                             self._boundary_jump("b"))
                self._stats = IntervalStats.from_halves(
                    a_left=self.half_integral(1.0, "left"),
                    a_right=self.half_integral(1.0, "right"),
                    b_left=self.half_integral(-1.0, "left"),
                    b_right=self.half_integral(-1.0, "right"),
                    v=variation)
        return self._stats


def _empty_measure(m: CheckedMeasure) -> CheckedMeasure:
    return dataclasses.replace(m,
                               atom_locations=np.empty(0),
                               atom_weights=np.empty(0),
                               infinite_rules=(),
                               density_pieces=())


def build_profile(m: CheckedMeasure,
                  interval: tuple[float, float, float],
                  options: ProfileOptions | None = None) -> DensityProfile:
    """The profile ϱ of μ on (a, b) normalized by ϱ(e) = 1.

    Args:

      m (CheckedMeasure): The measure.

      interval (tuple[float, float, float]): (a, b, e).

      options (ProfileOptions | None): Numeric knobs.

    Raises: `AtomOnBoundary` when an atom of weight ±1 lies inside (a, b),
    `NonRadonError` when |μ| is not locally finite on (a, b).
    """
    return DensityProfile(m, interval, options)


def eval_density(p: DensityProfile, z: float, side: SideT = "right") -> float:
    """ϱ(z) for side "right", ϱ(z−) for side "left".

    Raises: `OutOfInterval` unless a < z < b.
    """
    if not p.contains(z):
        raise OutOfInterval(z, (p.lower, p.upper))
    return float(p.value(z, side)[0])


def endpoint_limit(p: DensityProfile, side: EndpointT) -> EndpointLimit:
    """lim ϱ(z) toward aₙ (side "a") or bₙ (side "b")."""
    return p.limit(side)


def bv_certificate(p: DensityProfile, half: HalfT) -> BVCertificate:
    """Whether ϱ extends to a function of bounded variation on [a, e] (half
    "left") or [e, b] (half "right")."""
    return p.bv(half)


def integral_stats(p: DensityProfile) -> IntervalStats:
    """A, B, Bˡ, Bʳ and V of the profile."""
    return p.stats()


def profiles_and_stats(
    m: CheckedMeasure,
    decomposition: IntervalDecomposition,
    options: ProfileOptions | None = None,
) -> tuple[dict[int, DensityProfile], StatsTable]:
    """Statistics of every interval of a decomposition.

    Uniform intervals (bounded Cantor gaps, ϱ ≡ 1) get their closed-form
    statistics without building a profile; other intervals get a profile.
    """
    profiles: dict[int, DensityProfile] = {}
    uniform = decomposition.level > 0
    lengths = decomposition.upper - decomposition.lower
    table = {
        "A": np.where(uniform, lengths, np.nan),
        "B": np.where(uniform, lengths, np.nan),
        "A_left": np.where(uniform, lengths / 2, np.nan),
        "A_right": np.where(uniform, lengths / 2, np.nan),
        "B_left": np.where(uniform, lengths / 2, np.nan),
        "B_right": np.where(uniform, lengths / 2, np.nan),
        "V": np.where(uniform, 2.0, np.nan),
    }
    certified = np.ones(len(decomposition), dtype=np.bool_)
    for index in np.flatnonzero(~uniform):
        profile = build_profile(m, decomposition.interval(int(index)), options)
        profiles[int(index)] = profile
        stats = profile.stats()
        for name, column in table.items():
            column[index] = getattr(stats, name).as_float()
        certified[index] = stats.confidence == "certified"
    return profiles, StatsTable(certified=certified, **table)


def interval_profile(m: CheckedMeasure,
                     decomposition: IntervalDecomposition,
                     profiles: dict[int, DensityProfile],
                     index: int,
                     options: ProfileOptions | None = None) -> DensityProfile:
    """The profile of one interval, building (and caching) it when
    `profiles_and_stats` skipped it."""
    if index not in profiles:
        profiles[index] = DensityProfile(m,
                                         decomposition.interval(index),
                                         options,
                                         uniform=decomposition.uniform(index))
    return profiles[index]

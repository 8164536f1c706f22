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
"""Speed densities given directly as closed-form pieces plus jump rules.

ρ is the sum of its pieces and of the step functions generated by its jump
rules, taken right-continuous. The singular set S(ρ) collects the points near
which 1/ρ is not integrable; its complement splits into the effective
intervals.
"""

from __future__ import annotations

import functools
import logging
import math
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Self

from skewbm.analysis.atom_rules import ArithmeticLocations
from skewbm.analysis.atom_rules import GeometricLocations
from skewbm.analysis.atom_rules import ReciprocalLocations, WeightRule
from skewbm.analysis.atom_rules import derive_tail
from skewbm.analysis.decomposition import reference_point
from skewbm.analysis.errors import AssumptionAViolated
from skewbm.analysis.expressions import ConstantExpr, ExpPowerExpr
from skewbm.analysis.expressions import ExponentialExpr, Expression, Piece
from skewbm.analysis.expressions import PowerExpr, Real
from skewbm.analysis.quadrature import dyadic_shells, extrapolated_sum
from skewbm.analysis.quadrature import finite_integral, ratio_verdict
from skewbm.analysis.tails import TailBehavior, density_tail
from skewbm.analysis.types import EndpointT, FloatArrayT, SideT
from skewbm.structure.skew_density import EffectiveIntervalSet, ScaleFunction

# Most jumps of one rule materialized at once.
MAX_JUMP_TERMS: int = 1 << 22

# Truncation error allowed on summable jump rules.
JUMP_TAIL_TOLERANCE: float = 1e-13

_logger = logging.getLogger("skewbm.structure.raw_density")


@functools.lru_cache(maxsize=8)
def _stern(count: int) -> np.ndarray:
    """Stern's diatomic sequence s(0..count+1)."""
    s = np.zeros(count + 2, dtype=np.int64)
    s[1] = 1
    n = 1
    while 2 * n < len(s):
        # Fill indices [2n, 4n) from [n, 2n].
        top = min(4 * n, len(s))
        even = np.arange(2 * n, top, 2)
        s[even] = s[even // 2]
        odd = np.arange(2 * n + 1, top, 2)
        s[odd] = s[odd // 2] + s[odd // 2 + 1]
        n *= 2
    return s


class RationalLocations(BaseModel):
    """x_k = sign·q_k where q_1, q_2, ... = 1, 1/2, 2, 1/3, 3/2, ... is the
    Calkin–Wilf enumeration of the positive rationals."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["rationals"] = "rationals"
    sign: Literal[1, -1] = 1

    def __call__(self, k: FloatArrayT) -> FloatArrayT:
        k = np.asarray(k, dtype=np.int64)
        s = _stern(int(k.max(initial=1)) + 1)
        return self.sign * s[k] / s[k + 1]

    @property
    def limit(self) -> float:
        return math.nan

    def min_index(self) -> int:
        return 1


JumpLocations = Annotated[Union[ReciprocalLocations, GeometricLocations,
                                ArithmeticLocations, RationalLocations],
                          Field(discriminator="kind")]


class JumpRule(BaseModel):
    """Jumps J_k of ρ at x_k, acting on the open interval (lo, hi) only.

    With anchor "lo" the rule adds Σ_{lo < x_k ≤ x} J_k at x, with anchor
    "hi" it adds −Σ_{x < x_k < hi} J_k, so that ρ jumps by J_k at x_k going
    right in both cases.
    """
    model_config = ConfigDict(frozen=True)

    name: str
    lo: Real = -math.inf
    hi: Real = math.inf
    anchor: Literal["lo", "hi"] = "lo"
    locations: JumpLocations
    sizes: WeightRule
    start: int = 1
    stop: int | None = None

    @model_validator(mode="after")
    def finitely_many_steps(self) -> Self:
        if not self.lo < self.hi:
            raise ValueError(f"Jump rule {self.name!r} acts on the empty "
                             f"interval ({self.lo}, {self.hi})")
        if self.summable:
            return self
        limit = self.locations.limit
        if math.isnan(limit):
            raise ValueError(f"Jump rule {self.name!r} has dense locations "
                             "and sizes which are not summable")
        if self.anchor == "lo" and self.lo <= limit < self.hi:
            raise ValueError(f"Jumps of {self.name!r} accumulate at {limit}, "
                             "on the anchored side")
        if self.anchor == "hi" and self.lo < limit <= self.hi:
            raise ValueError(f"Jumps of {self.name!r} accumulate at {limit}, "
                             "on the anchored side")
        return self

    @property
    def first_index(self) -> int:
        return max(self.start, self.locations.min_index())

    @property
    def summable(self) -> bool:
        return self.stop is not None or derive_tail(
            self.sizes).kind == "summable"

    @property
    def accumulation(self) -> float | None:
        """The accumulation point of infinitely many jumps inside (lo, hi)
        or at its ends, `None` for finite or dense rules."""
        if self.stop is not None:
            return None
        limit = self.locations.limit
        if math.isnan(limit) or not self.lo <= limit <= self.hi:
            return None
        return limit

    def _last_index(self, x: FloatArrayT) -> int:
        if self.stop is not None:
            return self.stop
        if self.summable:
            tail = derive_tail(self.sizes)
            last = self.first_index + 1023
            while (tail.tail_sum(last + 1) > JUMP_TAIL_TOLERANCE and
                   last - self.first_index < MAX_JUMP_TERMS):
                last = 2 * last + 1
            return last
        limit = self.locations.limit
        if math.isinf(limit):
            distance = 1.0 / max(float(np.max(np.abs(x))), 1.0)
        else:
            distance = max(float(np.min(np.abs(x - limit))), 1e-300)
        last = self.locations.first_index_within(distance) + 1
        if last - self.first_index > MAX_JUMP_TERMS:
            _logger.warning("Jump rule %s truncated at %d terms", self.name,
                            MAX_JUMP_TERMS)
            last = self.first_index + MAX_JUMP_TERMS
        return last

    def table(self, x: FloatArrayT) -> tuple[FloatArrayT, FloatArrayT]:
        """Sorted jump locations inside (lo, hi) relevant to the points x,
        and the matching sizes."""
        last = self._last_index(x)
        k = np.arange(self.first_index, last + 1, dtype=np.float64)
        locations = self.locations(k)
        sizes = self.sizes(k)
        inside = (locations > self.lo) & (locations < self.hi)
        order = np.argsort(locations[inside], kind="stable")
        return locations[inside][order], sizes[inside][order]

    def step(self, x: FloatArrayT, side: SideT = "right") -> FloatArrayT:
        """Contribution of the rule to ρ(x) or ρ(x−)."""
        x = np.asarray(x, dtype=np.float64)
        result = np.zeros_like(x)
        inside = (x > self.lo) & (x < self.hi)
        if not np.any(inside):
            return result
        locations, sizes = self.table(x[inside])
        cumulative = np.concatenate([[0.0], np.cumsum(sizes)])
        index = np.searchsorted(locations,
                                x[inside],
                                side="right" if side == "right" else "left")
        if self.anchor == "lo":
            result[inside] = cumulative[index]
        else:
            result[inside] = cumulative[index] - cumulative[-1]
        return result

    def variation_near(self, z: float) -> bool:
        """Whether Σ|J_k| is finite over jumps near z."""
        return self.summable or self.accumulation != z


def reciprocal(expression: Expression) -> Expression:
    """The family of 1/f for a closed-form expression f > 0."""
    match expression:
        case ConstantExpr():
            return ConstantExpr(c=1 / expression.c)
        case PowerExpr():
            return PowerExpr(c=1 / expression.c,
                             x0=expression.x0,
                             p=-expression.p)
        case ExponentialExpr():
            return ExponentialExpr(c=1 / expression.c, q=-expression.q)
        case _:
            return ExpPowerExpr(c=1 / expression.c,
                                q=-expression.q,
                                x0=expression.x0,
                                p=expression.p)


class RawDensity(BaseModel):
    """ρ = Σ pieces + Σ jump steps.

    Attributes:

      pieces (list[Piece]): Closed-form pieces on open intervals, summed
      where they overlap.

      jumps (list[JumpRule]): Jump rules.
    """
    model_config = ConfigDict(frozen=True)

    pieces: list[Piece] = Field(default_factory=list)
    jumps: list[JumpRule] = Field(default_factory=list)

    def _covering(self, x: FloatArrayT, piece: Piece,
                  side: SideT) -> np.ndarray:
        if side == "right":
            return (x >= piece.lo) & (x < piece.hi)
        return (x > piece.lo) & (x <= piece.hi)

    def value(self,
              x: FloatArrayT | float,
              side: SideT = "right") -> FloatArrayT:
        """ρ(x) (side "right") or ρ(x−) (side "left")."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        result = np.zeros_like(x)
        for piece in self.pieces:
            mask = self._covering(x, piece, side)
            if np.any(mask):
                with np.errstate(divide="ignore", invalid="ignore"):
                    result[mask] += piece.expression.value(x[mask])
        for rule in self.jumps:
            result += rule.step(x, side)
        return result

    def log_value(self,
                  x: FloatArrayT | float,
                  side: SideT = "right") -> FloatArrayT:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if not self.jumps and self._disjoint:
            # Sums of exponentials overflow where their logarithms do not.
            result = np.full_like(x, -np.inf)
            for piece in self.pieces:
                mask = self._covering(x, piece, side)
                if np.any(mask):
                    result[mask] = piece.expression.log_value(x[mask])
            return result
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(self.value(x, side))

    @property
    def _disjoint(self) -> bool:
        ordered = sorted(self.pieces, key=lambda piece: piece.lo)
        return all(
            first.hi <= second.lo
            for first, second in zip(ordered[:-1], ordered[1:]))

    def adjacent_pieces(self, end: float, side: EndpointT) -> list[Piece]:
        """Pieces covering a one-sided neighbourhood of `end` inside the
        interval ending (side "b") or starting (side "a") there."""
        if side == "a":
            return [p for p in self.pieces if p.lo <= end < p.hi]
        return [p for p in self.pieces if p.lo < end <= p.hi]

    def tail(self, end: float, side: EndpointT | None = None) -> TailBehavior:
        """Closed-form behaviour of ρ toward `end` from inside."""
        if side is None:
            side = "a" if end == -math.inf else "b"
        pieces = self.adjacent_pieces(end, side)
        accumulating = any(
            rule.accumulation == end and not rule.summable
            for rule in self.jumps)
        if len(pieces) != 1 or accumulating:
            return TailBehavior(kind="unknown", endpoint=end)
        return density_tail(pieces, end, side)

    # The singular set.

    def _vanishing_at(self, piece: Piece, z: float) -> bool:
        """Whether 1/piece is not integrable near z."""
        expression = piece.expression
        if getattr(expression, "c", 1.0) == 0:
            return True
        return (isinstance(expression, PowerExpr) and expression.x0 == z and
                expression.p >= 1)

    def singular_set(self) -> list[tuple[float, float]]:
        """Closed components [l, r] of S(ρ), points having l = r."""
        live = [
            p for p in self.pieces if getattr(p.expression, "c", 1.0) != 0
        ]
        components: list[tuple[float, float]] = []
        # Uncovered stretches of the line.
        left = -math.inf
        for lo, hi in _merge_open([(p.lo, p.hi) for p in live]):
            if lo > left:
                components.append((left, lo))
            left = max(left, hi)
        if left < math.inf:
            components.append((left, math.inf))
        # Points where every covering piece is singular.
        candidates = {
            p.expression.x0
            for p in live
            if isinstance(p.expression, PowerExpr) and p.expression.p >= 1
        }
        for z in sorted(candidates):
            covering = [p for p in live if p.lo <= z <= p.hi]
            if covering and all(self._vanishing_at(p, z) for p in covering):
                components.append((z, z))
        # Seams where two pieces meet at a point nobody covers.
        ends = sorted({p.hi for p in live} & {p.lo for p in live})
        for z in ends:
            touching = [p for p in live if p.lo == z or p.hi == z]
            inside = [p for p in live if p.lo < z < p.hi]
            if not inside and touching and all(
                    self._vanishing_at(p, z) for p in touching):
                components.append((z, z))
        return _merge_closed(
            [(l, r) for l, r in components if not (math.isinf(l) and l == r)])

    def check_assumption_a(self) -> None:
        """Raise `AssumptionAViolated` unless ρ vanishes a.e. on S(ρ)."""
        for left, right in self.singular_set():
            if right <= left:
                continue
            for rule in self.jumps:
                if rule.lo < right and left < rule.hi:
                    raise AssumptionAViolated(
                        f"jump rule {rule.name!r} acts on ({left}, {right}) "
                        "where ρ must vanish")

    # Integrals of 1/ρ.

    def _closed_form(self) -> bool:
        return not self.jumps and self._disjoint

    def inverse_integral(self, lo: float, hi: float) -> float:
        """∫_lo^hi 1/ρ for lo ≤ hi inside the closure of one component of
        S(ρ)^c, possibly `inf`."""
        if hi <= lo:
            return 0.0
        if self._closed_form():
            total = 0.0
            for piece in self.pieces:
                if getattr(piece.expression, "c", 1.0) == 0:
                    continue
                if piece.overlaps(lo, hi):
                    total += reciprocal(piece.expression).integral(
                        max(lo, piece.lo), min(hi, piece.hi))
            return total
        breakpoints = sorted({p.lo for p in self.pieces} |
                             {p.hi for p in self.pieces})
        with np.errstate(divide="ignore"):
            return self._numeric_inverse(lo, hi, breakpoints)

    def _numeric_inverse(self, lo: float, hi: float,
                         breakpoints: list[float]) -> float:
        integrand = lambda t: float(1.0 / self.value(t)[0])
        edges = {z for component in self.singular_set() for z in component}
        singular = [z for z in (lo, hi) if math.isinf(z) or z in edges]
        if not singular:
            return finite_integral(integrand, lo, hi, breakpoints)
        middle = reference_point(lo, hi)
        total = 0.0
        for end in (lo, hi):
            if end not in singular:
                total += finite_integral(integrand, min(end, middle),
                                         max(end, middle), breakpoints)
                continue
            shells = dyadic_shells(end, middle, 30)
            terms = np.array([
                finite_integral(integrand, a, b, breakpoints)
                for a, b in shells
            ])
            verdict = ratio_verdict(terms)
            _logger.warning("∫1/ρ toward %g decided numerically: %s", end,
                            verdict)
            if verdict is not True:
                return math.inf
            total += extrapolated_sum(terms)
        return total


def _merge_open(
        intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Union of open intervals; touching ones stay apart."""
    merged: list[tuple[float, float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo < merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _merge_closed(
        intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[tuple[float, float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _components(rho: RawDensity) -> list[tuple[float, float]]:
    """Open components of S(ρ)^c, left to right."""
    bounds = []
    left = -math.inf
    for lo, hi in rho.singular_set():
        if lo > left:
            bounds.append((left, lo))
        left = hi
    if left < math.inf:
        bounds.append((left, math.inf))
    return bounds


def density_to_effective_intervals(rho: RawDensity) -> EffectiveIntervalSet:
    """Split S(ρ)^c into effective intervals with adapted scale functions.

    A finite endpoint is adjoined iff ∫1/ρ is finite near it.

    Raises: `AssumptionAViolated` when ρ does not vanish a.e. on S(ρ).
    """
    rho.check_assumption_a()
    bounds = _components(rho)
    lower = np.array([a for a, _ in bounds], dtype=np.float64)
    upper = np.array([b for _, b in bounds], dtype=np.float64)
    reference = np.array([reference_point(a, b) for a, b in bounds])
    halves = [(rho.inverse_integral(a, e), rho.inverse_integral(e, b))
              for (a, b), e in zip(bounds, reference)]
    closed_left = np.array([
        math.isfinite(a) and math.isfinite(h[0])
        for (a, _), h in zip(bounds, halves)
    ])
    closed_right = np.array([
        math.isfinite(b) and math.isfinite(h[1])
        for (_, b), h in zip(bounds, halves)
    ])

    def factory(k: int) -> ScaleFunction:
        a, b = bounds[k]
        e = float(reference[k])
        left_half, right_half = halves[k]

        def forward(x: FloatArrayT) -> FloatArrayT:
            result = np.empty_like(x)
            for i, z in enumerate(np.asarray(x, dtype=np.float64)):
                if z <= a:
                    result[i] = -left_half
                elif z >= b:
                    result[i] = right_half
                elif z >= e:
                    result[i] = rho.inverse_integral(e, float(z))
                else:
                    result[i] = -rho.inverse_integral(float(z), e)
            return result

        return ScaleFunction(forward, a, b, e)

    index = np.arange(len(bounds), dtype=np.int64)
    return EffectiveIntervalSet(density=rho,
                                lower=lower,
                                upper=upper,
                                closed_left=closed_left,
                                closed_right=closed_right,
                                reference=reference,
                                first=index,
                                last=index.copy(),
                                factory=factory)


def scale_function(es: EffectiveIntervalSet, at: float = 0.0) -> ScaleFunction:
    """The adapted scale function of the effective interval containing
    `at`."""
    k = es.locate(at)
    if k is None:
        raise LookupError(f"{at} lies in no effective interval")
    return es.scale(k)

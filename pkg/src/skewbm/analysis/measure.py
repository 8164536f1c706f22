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
"""Signed measures μ = μ⁺ − μ⁻ built from atoms, atom rules and closed-form
densities.

A `SignedMeasureSpec` is the user-facing description (validated by pydantic),
`validate_measure` turns it into an immutable `CheckedMeasure` with the
barrier sets Ξ⁺ = {z : μ({z}) = 1} and Ξ⁻ = {z : μ({z}) = −1} materialized.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo
from pydantic import field_validator

from skewbm.analysis.atom_rules import AtomRule, check_tail_certificate
from skewbm.analysis.errors import AtomMagnitudeError, DuplicateAtomError
from skewbm.analysis.errors import InconsistentTailCertificate
from skewbm.analysis.expressions import Expression, Piece, Real
from skewbm.analysis.extended_real import ExtendedReal, extended_sum
from skewbm.analysis.gaps import MaterializedGaps
from skewbm.analysis.types import FloatArrayT, MassVariantT

# Leading atoms of infinite rules compared against other atoms for
# duplicate locations.
DUPLICATE_CHECK_TERMS: int = 100_000

# Most terms of an infinite rule summed explicitly by `mass_on_interval`.
MAX_EXPLICIT_TERMS: int = 2_000_000

_logger = logging.getLogger("skewbm.analysis.measure")


class AtomSpec(BaseModel):
    """μ({location}) = weight."""
    model_config = ConfigDict(frozen=True)

    location: Real
    weight: Real

    @field_validator("location")
    @classmethod
    def location_finite(cls, location: float) -> float:
        if not math.isfinite(location):
            raise ValueError("Atoms must sit at finite locations")
        return location


class DensityPiece(Piece):
    """sign·expression(z)dz on the open interval (lo, hi)."""
    sign: Literal[1, -1] = 1

    @field_validator("expression")
    @classmethod
    def measure_family(cls, expression: Expression) -> Expression:
        if expression.kind == "exp_power":
            raise ValueError("Measure densities use the constant, power or "
                             "exponential families")
        return expression


class Region(BaseModel):
    """A closed interval [lo, hi] on which |μ| is declared locally infinite.

    Attributes:

      parts (Literal["both", "plus", "minus"]): Which of μ⁺, μ⁻ is infinite
      near every point of the region.
    """
    model_config = ConfigDict(frozen=True)

    lo: Real
    hi: Real
    parts: Literal["both", "plus", "minus"] = "both"

    @field_validator("hi")
    @classmethod
    def ordered(cls, hi: float, info: ValidationInfo) -> float:
        lo = info.data.get("lo")
        if lo is not None and hi < lo:
            raise ValueError(f"Region [{lo}, {hi}] is empty")
        return hi


class SignedMeasureSpec(BaseModel):
    """Description of μ.

    Attributes:

      atoms (list[AtomSpec]): Explicit atoms.

      atom_rules (list[AtomRule]): Generated countable families of atoms.

      density_pieces (list[DensityPiece]): Absolutely continuous part, pieces
      may not overlap.

      declared_infinite_regions (list[Region]): Where |μ| is declared
      locally infinite by the producer of the spec.
    """
    model_config = ConfigDict(frozen=True)

    atoms: list[AtomSpec] = Field(default_factory=list)
    atom_rules: list[AtomRule] = Field(default_factory=list)
    density_pieces: list[DensityPiece] = Field(default_factory=list)
    declared_infinite_regions: list[Region] = Field(default_factory=list)

    @field_validator("density_pieces")
    @classmethod
    def pieces_disjoint(cls,
                        pieces: list[DensityPiece]) -> list[DensityPiece]:
        ordered = sorted(pieces, key=lambda piece: piece.lo)
        for first, second in zip(ordered[:-1], ordered[1:]):
            if second.lo < first.hi:
                raise ValueError(f"Density pieces ({first.lo}, {first.hi}) "
                                 f"and ({second.lo}, {second.hi}) overlap")
        return ordered


@dataclasses.dataclass(frozen=True)
class CheckedMeasure:
    """A validated measure. Immutable, safe to share between threads.

    Attributes:

      spec (SignedMeasureSpec): The source description.

      atom_locations (FloatArrayT): Sorted locations of explicit atoms and of
      atoms of finite rules.

      atom_weights (FloatArrayT): Matching weights.

      infinite_rules (tuple[AtomRule, ...]): Rules with infinitely many atoms.

      density_pieces (tuple[DensityPiece, ...]): Sorted density pieces.

      infinite_regions (tuple[Region, ...]): Declared infinite regions.

      xi_plus (FloatArrayT): Ξ⁺ sorted.

      xi_minus (FloatArrayT): Ξ⁻ sorted.

      gaps (MaterializedGaps | None): Cantor structure, when μ lives on the
      gaps of a generalized Cantor set.
    """
    spec: SignedMeasureSpec
    atom_locations: FloatArrayT
    atom_weights: FloatArrayT
    infinite_rules: tuple[AtomRule, ...] = ()
    density_pieces: tuple[DensityPiece, ...] = ()
    infinite_regions: tuple[Region, ...] = ()
    xi_plus: FloatArrayT = dataclasses.field(
        default_factory=lambda: np.empty(0))
    xi_minus: FloatArrayT = dataclasses.field(
        default_factory=lambda: np.empty(0))
    gaps: MaterializedGaps | None = None

    @property
    def xi(self) -> FloatArrayT:
        """Ξ = Ξ⁺ ∪ Ξ⁻ sorted."""
        return np.sort(np.concatenate([self.xi_plus, self.xi_minus]))

    def scaled(self, factor: float) -> CheckedMeasure:
        """μ multiplied by `factor` with |factor| ≤ 1.

        Factor zero yields the null measure. Otherwise atoms, density pieces
        and rules whose weight family has a coefficient `c` are scaled;
        declared regions and Cantor structures cannot be scaled.
        """
        if abs(factor) > 1:
            raise ValueError(f"Scaling by {factor} may break |μ({{z}})| ≤ 1")
        if factor == 0:
            return validate_measure(SignedMeasureSpec())
        if self.gaps is not None or self.spec.declared_infinite_regions:
            raise ValueError("Only atoms, rules and densities can be scaled")
        rules = []
        for rule in self.spec.atom_rules:
            if not hasattr(rule.weights, "c"):
                raise ValueError(f"Rule {rule.name!r} has no coefficient to "
                                 f"scale")
            weights = rule.weights.model_copy(
                update={"c": factor * rule.weights.c})
            rules.append(rule.model_copy(update={"weights": weights,
                                                 "tail": None}))
        pieces = []
        for piece in self.spec.density_pieces:
            expression = piece.expression.model_copy(
                update={"c": abs(factor) * piece.expression.c})
            pieces.append(
                piece.model_copy(update={
                    "expression": expression,
                    "sign": piece.sign if factor > 0 else -piece.sign,
                }))
        spec = SignedMeasureSpec(
            atoms=[
                AtomSpec(location=atom.location, weight=factor * atom.weight)
                for atom in self.spec.atoms
            ],
            atom_rules=rules,
            density_pieces=pieces,
        )
        return validate_measure(spec)


def _unit_atoms(locations: FloatArrayT,
                weights: FloatArrayT) -> tuple[FloatArrayT, FloatArrayT]:
    return np.sort(locations[weights == 1.0]), np.sort(
        locations[weights == -1.0])


def validate_measure(spec: SignedMeasureSpec) -> CheckedMeasure:
    """Check assumption M0 and materialize the barrier sets.

    Args:

      spec (SignedMeasureSpec): The measure description.

    Raises: `AtomMagnitudeError` when some |μ({z})| > 1, `DuplicateAtomError`
    when two atoms share a location, `InconsistentTailCertificate` when a
    rule contradicts its declared tail or accumulation point.
    """
    locations = [np.array([atom.location for atom in spec.atoms])]
    weights = [np.array([atom.weight for atom in spec.atoms])]
    infinite_rules: list[AtomRule] = []
    for rule in spec.atom_rules:
        check_tail_certificate(rule)
        if rule.infinite:
            limit = rule.locations.limit
            if rule.accumulation is not None and not math.isclose(
                    rule.accumulation, limit, rel_tol=1e-12, abs_tol=1e-12):
                raise InconsistentTailCertificate(
                    rule.name, f"declared accumulation point "
                    f"{rule.accumulation} but the locations tend to {limit}")
            rule_locations, rule_weights = rule.materialize(
                rule.first_index + DUPLICATE_CHECK_TERMS - 1)
            if np.any(np.abs(rule_weights) == 1.0):
                raise ValueError(f"Rule {rule.name!r} generates atoms of "
                                 f"weight ±1, list barriers explicitly.")
            infinite_rules.append(rule)
        else:
            rule_locations, rule_weights = rule.materialize()
            locations.append(rule_locations)
            weights.append(rule_weights)
        _check_magnitudes(rule_locations, rule_weights)
    all_locations = np.concatenate(locations).astype(np.float64)
    all_weights = np.concatenate(weights).astype(np.float64)
    _check_magnitudes(all_locations, all_weights)
    order = np.argsort(all_locations, kind="stable")
    all_locations = all_locations[order]
    all_weights = all_weights[order]
    repeated = np.flatnonzero(np.diff(all_locations) == 0)
    if len(repeated):
        raise DuplicateAtomError(float(all_locations[repeated[0]]))
    _check_rule_overlaps(infinite_rules, all_locations)
    xi_plus, xi_minus = _unit_atoms(all_locations, all_weights)
    return CheckedMeasure(
        spec=spec,
        atom_locations=all_locations,
        atom_weights=all_weights,
        infinite_rules=tuple(infinite_rules),
        density_pieces=tuple(spec.density_pieces),
        infinite_regions=tuple(spec.declared_infinite_regions),
        xi_plus=xi_plus,
        xi_minus=xi_minus,
    )


def measure_from_arrays(locations: FloatArrayT,
                        weights: FloatArrayT,
                        gaps: MaterializedGaps | None = None) -> CheckedMeasure:
    """A purely atomic measure from (already distinct) arrays, e.g., the
    measure living on the ends of Cantor gaps."""
    locations = np.asarray(locations, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    _check_magnitudes(locations, weights)
    order = np.argsort(locations, kind="stable")
    locations = locations[order]
    weights = weights[order]
    repeated = np.flatnonzero(np.diff(locations) == 0)
    if len(repeated):
        raise DuplicateAtomError(float(locations[repeated[0]]))
    xi_plus, xi_minus = _unit_atoms(locations, weights)
    return CheckedMeasure(spec=SignedMeasureSpec(),
                          atom_locations=locations,
                          atom_weights=weights,
                          xi_plus=xi_plus,
                          xi_minus=xi_minus,
                          gaps=gaps)


def _check_magnitudes(locations: FloatArrayT, weights: FloatArrayT) -> None:
    too_large = np.flatnonzero(np.abs(weights) > 1.0)
    if len(too_large):
        index = too_large[0]
        raise AtomMagnitudeError(float(locations[index]),
                                 float(weights[index]))


def _check_rule_overlaps(rules: list[AtomRule],
                         explicit: FloatArrayT) -> None:
    prefixes = [
        rule.materialize(rule.first_index + DUPLICATE_CHECK_TERMS - 1)[0]
        for rule in rules
    ]
    seen = explicit
    for prefix in prefixes:
        common = np.intersect1d(seen, prefix)
        if len(common):
            raise DuplicateAtomError(float(common[0]))
        seen = np.concatenate([seen, prefix])


def _variant_weights(weights: FloatArrayT,
                     variant: MassVariantT) -> FloatArrayT:
    match variant:
        case "plus":
            return np.maximum(weights, 0.0)
        case "minus":
            return np.maximum(-weights, 0.0)
        case _:
            return np.abs(weights)


def _inside(x: FloatArrayT, lo: float, hi: float,
            closed: tuple[bool, bool]) -> FloatArrayT:
    left = x >= lo if closed[0] else x > lo
    right = x <= hi if closed[1] else x < hi
    return left & right


def _rule_mass(rule: AtomRule, lo: float, hi: float,
               closed: tuple[bool, bool],
               variant: MassVariantT) -> ExtendedReal:
    """Mass of the atoms of an infinite rule inside the interval."""
    limit = rule.locations.limit
    first = rule.first_index
    first_location = rule.locations(np.array([float(first)]))[0]
    above = first_location > limit
    if math.isinf(limit):
        accumulates = (hi == math.inf) if limit > 0 else (lo == -math.inf)
    elif above:
        accumulates = lo <= limit < hi
    else:
        accumulates = lo < limit <= hi
    if accumulates:
        return _accumulating_rule_mass(rule, lo, hi, closed, variant)
    if math.isinf(limit):
        distance = 1.0 / max(abs(lo if limit > 0 else hi), 1.0)
    else:
        distance = max(lo - limit, limit - hi, 0.0)
        if distance == 0.0:
            # Limit on the boundary, approached from outside the interval.
            distance = abs(first_location - limit)
            others = [b for b in (lo, hi) if math.isfinite(b) and b != limit]
            if others:
                distance = min(distance, min(abs(b - limit) for b in others))
    last = min(rule.locations.first_index_within(distance) + 1,
               first + MAX_EXPLICIT_TERMS)
    x, w = rule.materialize(last)
    mask = _inside(x, lo, hi, closed)
    return ExtendedReal.finite(float(np.sum(_variant_weights(w[mask],
                                                             variant))))


def _accumulating_rule_mass(rule: AtomRule, lo: float, hi: float,
                            closed: tuple[bool, bool],
                            variant: MassVariantT) -> ExtendedReal:
    tail = rule.effective_tail()
    if tail.kind == "divergent":
        sign = rule.weights.eventual_sign
        if variant == "total" or sign == 0 or (sign > 0 and variant == "plus"
                                              ) or (sign < 0 and
                                                    variant == "minus"):
            return ExtendedReal.infinite("certified")
    first = rule.first_index
    last = first + min(MAX_EXPLICIT_TERMS, 10_000) - 1
    while True:
        x, w = rule.materialize(last)
        mask = _inside(x, lo, hi, closed)
        partial = float(np.sum(_variant_weights(w[mask], variant)))
        if tail.kind == "divergent":
            # Remaining weights all have the other sign.
            return ExtendedReal.finite(partial)
        remainder = tail.tail_sum(last + 1)
        if remainder <= 1e-12 * max(partial, 1.0):
            return ExtendedReal.finite(partial)
        if last - first + 1 >= MAX_EXPLICIT_TERMS:
            _logger.warning("Rule %s truncated after %d terms, tail bound %g",
                            rule.name, last - first + 1, remainder)
            return ExtendedReal.finite(partial, "numeric")
        last = first + min(2 * (last - first + 1), MAX_EXPLICIT_TERMS) - 1


def mass_on_interval(m: CheckedMeasure,
                     lo: float,
                     hi: float,
                     variant: MassVariantT = "total",
                     closed: tuple[bool, bool] = (False, False)) -> ExtendedReal:
    """|μ|(J), μ⁺(J) or μ⁻(J) for the interval J with ends lo ≤ hi.

    Args:

      m (CheckedMeasure): The measure.

      lo (float): Left end, may be `-inf`.

      hi (float): Right end, may be `inf`.

      variant (MassVariantT): "total", "plus" or "minus".

      closed (tuple[bool, bool]): Whether the left and right ends belong to
      J. Open by default.

    Returns a finite value, a certified +∞ (divergent rule tail,
    non-integrable density, declared region or Cantor accumulation) or
    unknown when the Cantor structure is not resolved finely enough.
    """
    if hi < lo or (hi == lo and not all(closed)):
        return ExtendedReal.zero()
    terms: list[ExtendedReal] = []
    for region in m.infinite_regions:
        touches = region.lo < hi and region.hi > lo
        touches = touches or (closed[0] and region.hi == lo) or (
            closed[1] and region.lo == hi)
        relevant = variant == "total" or region.parts in ("both", variant)
        if touches and relevant:
            return ExtendedReal.infinite("certified")
    if m.gaps is not None:
        meets = m.gaps.meets_limit_set(lo, hi)
        if meets:
            return ExtendedReal.infinite("certified")
        if meets is None:
            return ExtendedReal.unknown()
    mask = _inside(m.atom_locations, lo, hi, closed)
    terms.append(
        ExtendedReal.finite(
            float(np.sum(_variant_weights(m.atom_weights[mask], variant)))))
    for rule in m.infinite_rules:
        terms.append(_rule_mass(rule, lo, hi, closed, variant))
    for piece in m.density_pieces:
        if not piece.overlaps(lo, hi):
            continue
        if variant == "plus" and piece.sign < 0:
            continue
        if variant == "minus" and piece.sign > 0:
            continue
        value = piece.clipped_integral(lo, hi)
        terms.append(ExtendedReal.finite(value))
    return extended_sum(terms)


def atom_at(m: CheckedMeasure, z: float) -> float:
    """μ({z}), zero when there is no atom at z."""
    index = int(np.searchsorted(m.atom_locations, z))
    if index < len(m.atom_locations) and m.atom_locations[index] == z:
        return float(m.atom_weights[index])
    for rule in m.infinite_rules:
        weight = _rule_atom_at(rule, z)
        if weight is not None:
            return weight
    return 0.0


def _rule_atom_at(rule: AtomRule, z: float) -> float | None:
    locations = rule.locations
    match locations.kind:
        case "reciprocal":
            if z == locations.center:
                return None
            k = (locations.scale / (z - locations.center) -
                 locations.q) / locations.p
        case "geometric":
            ratio = (z - locations.center) / locations.scale
            if ratio <= 0:
                return None
            k = math.log(ratio) / math.log(locations.r)
        case _:
            k = (z - locations.origin) / locations.step
    candidate = round(k)
    if candidate < rule.first_index:
        return None
    index = np.array([float(candidate)])
    if not math.isclose(float(locations(index)[0]), z, rel_tol=1e-14,
                        abs_tol=1e-300):
        return None
    return float(rule.weights(index)[0])

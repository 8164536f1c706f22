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
"""Classification of the points carrying a unit atom.

A right barrier z ∈ Ξ⁺ sits between an interval (a, z) of G on its left and an
interval (z, b) on its right. With e and e' their reference points, write
n− = [e, z) and n+ = (z, e']. Then z is

  real         when |μ|(n+) < ∞, ∫_{n−} ϱ < ∞ and ∫_{n−} 1/ϱ = ∞,
  pseudo       when |μ|(n+) < ∞, ϱ on n− extends to a function of bounded
               variation with ϱ(z−) = 0, and ∫_{n−} 1/ϱ < ∞,
  nonsensical  otherwise.

Left barriers z ∈ Ξ⁻ are the mirror image.
"""

from __future__ import annotations

import logging

from pydantic import BaseModel, ConfigDict, Field

from skewbm.analysis.decomposition import IntervalDecomposition
from skewbm.analysis.errors import NotABarrier
from skewbm.analysis.extended_real import ExtendedReal, weakest
from skewbm.analysis.measure import CheckedMeasure, atom_at
from skewbm.analysis.profile import DensityProfile, ProfileOptions
from skewbm.analysis.profile import interval_profile
from skewbm.analysis.types import BarrierLabelT, BarrierSideT, BVKindT
from skewbm.analysis.types import ConfidenceT, EndpointT, HalfT, LimitKindT

_logger = logging.getLogger("skewbm.structure.barriers")


class BarrierEvidence(BaseModel):
    """Finiteness verdicts a barrier label was derived from.

    Attributes:

      far_mass (ExtendedReal): |μ| on the side which must stay finite (n+ for
      a right barrier, n− for a left one).

      near_plus (ExtendedReal): μ⁺ on the deciding side.

      near_minus (ExtendedReal): μ⁻ on the deciding side.

      integral (ExtendedReal | None): ∫ ϱ over the deciding side.

      inverse_integral (ExtendedReal | None): ∫ 1/ϱ over the deciding side.

      bv (BVKindT | None): Bounded variation of ϱ on the deciding side.

      limit (LimitKindT | None): Limit of ϱ at the barrier from the deciding
      side.

      rule (str): "shortcut" when the masses alone decided, "definition"
      when the integrals were needed.

      notes (list[str]): Free-form remarks.
    """
    model_config = ConfigDict(frozen=True)

    far_mass: ExtendedReal = Field(default_factory=ExtendedReal.unknown)
    near_plus: ExtendedReal = Field(default_factory=ExtendedReal.unknown)
    near_minus: ExtendedReal = Field(default_factory=ExtendedReal.unknown)
    integral: ExtendedReal | None = None
    inverse_integral: ExtendedReal | None = None
    bv: BVKindT | None = None
    limit: LimitKindT | None = None
    rule: str = "shortcut"
    notes: list[str] = Field(default_factory=list)

    @property
    def confidence(self) -> ConfidenceT:
        values = [self.far_mass, self.near_plus, self.near_minus]
        values += [v for v in (self.integral, self.inverse_integral) if v]
        return weakest(*(v.confidence for v in values))


class BarrierEntry(BaseModel):
    """One labelled point of Ξ."""
    model_config = ConfigDict(frozen=True)

    z: float
    side: BarrierSideT
    label: BarrierLabelT
    evidence: BarrierEvidence


class BarrierClassification(BaseModel):
    """Labels of every point of Ξ, sorted by location."""
    model_config = ConfigDict(frozen=True)

    entries: list[BarrierEntry] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)

    def labelled(self, label: BarrierLabelT) -> list[float]:
        return [entry.z for entry in self.entries if entry.label == label]

    @property
    def real(self) -> list[float]:
        return self.labelled("real")

    @property
    def pseudo(self) -> list[float]:
        return self.labelled("pseudo")

    @property
    def nonsensical(self) -> list[float]:
        return self.labelled("nonsensical")

    def label_of(self, z: float) -> BarrierLabelT | None:
        for entry in self.entries:
            if entry.z == z:
                return entry.label
        return None


def _by_definition(profile: DensityProfile, half: HalfT, side: EndpointT,
                   evidence: dict) -> BarrierLabelT:
    """Apply the definitions on the deciding side of the barrier."""
    integral = profile.half_integral(1.0, half)
    inverse = profile.half_integral(-1.0, half)
    bv = profile.bv(half)
    limit = profile.limit(side)
    evidence.update(integral=integral,
                    inverse_integral=inverse,
                    bv=bv.kind,
                    limit=limit.kind,
                    rule="definition")
    if integral.is_finite and inverse.is_infinite:
        return "real"
    if bv.kind == "bv" and limit.kind == "zero" and inverse.is_finite:
        return "pseudo"
    decided_not_real = integral.is_infinite or inverse.is_finite
    decided_not_pseudo = (bv.kind == "not_bv" or inverse.is_infinite or
                          limit.kind in ("positive", "diverges"))
    if decided_not_real and decided_not_pseudo:
        return "nonsensical"
    return "unknown"


def classify_barrier(m: CheckedMeasure,
                     decomposition: IntervalDecomposition,
                     profiles: dict[int, DensityProfile],
                     z: float,
                     options: ProfileOptions | None = None) -> BarrierEntry:
    """Label one point of Ξ as real, pseudo or nonsensical.

    Args:

      m (CheckedMeasure): The measure.

      decomposition (IntervalDecomposition): Intervals of G.

      profiles (dict[int, DensityProfile]): Profiles by interval index,
      completed on demand.

      z (float): A point with μ({z}) = ±1.

      options (ProfileOptions | None): Knobs for profiles built here.

    Returns the labelled entry. The label is "unknown" when the deciding side
    has no interval of G or when the numeric tests do not settle.

    Raises: `NotABarrier` when |μ({z})| ≠ 1.
    """
    weight = atom_at(m, z)
    if abs(weight) != 1.0:
        raise NotABarrier(z, weight)
    side: BarrierSideT = "right" if weight > 0 else "left"
    evidence: dict = {"notes": []}

    def entry(label: BarrierLabelT) -> BarrierEntry:
        result = BarrierEntry(z=z,
                              side=side,
                              label=label,
                              evidence=BarrierEvidence(**evidence))
        if result.evidence.confidence == "numeric" and label != "unknown":
            _logger.warning("Barrier %g labelled %s from numeric evidence", z,
                            label)
        return result

    if decomposition.locate(z) is not None:
        evidence["notes"].append("z lies inside an interval of G")
        return entry("nonsensical")
    after = decomposition.starting_at(z)
    before = decomposition.ending_at(z)
    # The far side must carry an interval with finite |μ| up to its
    # reference point, the deciding side is examined with the definitions.
    if side == "right":
        far, near = after, before
        far_half, near_half, near_end = "left", "right", "b"
    else:
        far, near = before, after
        far_half, near_half, near_end = "right", "left", "a"
    if far is None:
        evidence["notes"].append("no interval of G has z as its "
                                 f"{'left' if side == 'right' else 'right'} "
                                 "end")
        return entry("nonsensical")
    far_profile = interval_profile(m, decomposition, profiles, far, options)
    far_mass = far_profile.half_mass(far_half, "total")
    evidence["far_mass"] = far_mass
    if far_mass.is_infinite:
        return entry("nonsensical")
    if near is None:
        evidence["notes"].append("no interval of G on the deciding side")
        return entry("unknown")
    near_profile = interval_profile(m, decomposition, profiles, near, options)
    plus = near_profile.half_mass(near_half, "plus")
    minus = near_profile.half_mass(near_half, "minus")
    evidence.update(near_plus=plus, near_minus=minus)
    if far_mass.is_unknown:
        return entry("unknown")
    # The part of μ driving ϱ to zero toward z: μ⁻ from the left, μ⁺ from
    # the right.
    vanishing, opposing = (minus, plus) if side == "right" else (plus, minus)
    if vanishing.is_finite:
        return entry("nonsensical")
    if vanishing.is_infinite and opposing.is_finite:
        inverse = near_profile.half_integral(-1.0, near_half)
        evidence["inverse_integral"] = inverse
        if inverse.is_unknown:
            return entry("unknown")
        return entry("real" if inverse.is_infinite else "pseudo")
    if vanishing.is_unknown or opposing.is_unknown:
        return entry("unknown")
    return entry(_by_definition(near_profile, near_half, near_end, evidence))


def classify_barriers(
        m: CheckedMeasure,
        decomposition: IntervalDecomposition,
        profiles: dict[int, DensityProfile],
        options: ProfileOptions | None = None) -> BarrierClassification:
    """Label every point of Ξ = Ξ⁺ ∪ Ξ⁻.

    Cantor structures are not classified point by point: their Ξ consists of
    the gap ends, which are barriers by construction.
    """
    if m.gaps is not None:
        return BarrierClassification(notes=[
            f"{len(m.xi)} gap ends of the Cantor structure carry unit atoms; "
            "they are not classified individually"
        ])
    entries = [
        classify_barrier(m, decomposition, profiles, float(z), options)
        for z in m.xi
    ]
    _logger.debug("Classified %d barriers", len(entries))
    return BarrierClassification(entries=entries)

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
"""The density side of the correspondence between μ and ρ.

X is a semimartingale iff ρ is locally of bounded variation on every
effective interval, and then the drift charges ν_ρ = dρ. Dividing ν_ρ by
ρ(z) + ρ(z−) recovers μ.
"""

from __future__ import annotations

import logging
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from skewbm.analysis.atom_rules import AtomRule, ConstantWeights
from skewbm.analysis.atom_rules import GeometricWeights, PowerWeights
from skewbm.analysis.atom_rules import WeightRule
from skewbm.analysis.errors import NotBoundedVariation, RoundTripMismatch
from skewbm.analysis.expressions import ConstantExpr, ExpPowerExpr
from skewbm.analysis.expressions import ExponentialExpr, Expression
from skewbm.analysis.expressions import PowerExpr, fit_expression
from skewbm.analysis.measure import AtomSpec, CheckedMeasure, DensityPiece
from skewbm.analysis.measure import SignedMeasureSpec, measure_from_arrays
from skewbm.analysis.measure import validate_measure
from skewbm.analysis.types import ConfidenceT, FloatArrayT
from skewbm.structure.raw_density import JUMP_TAIL_TOLERANCE, JumpRule
from skewbm.structure.raw_density import RawDensity
from skewbm.structure.raw_density import RationalLocations
from skewbm.structure.raw_density import density_to_effective_intervals
from skewbm.structure.skew_density import EffectiveIntervalSet, SkewDensity
from skewbm.structure.skew_density import glue_effective_intervals

# Atoms of ν_ρ listed in a summary.
MAX_LISTED_ATOMS: int = 1000

# Sample points per stretch when reading densities off ρ.
STRETCH_SAMPLES: int = 64

# |(log ρ)'| below this is read as ρ being constant.
FLAT_SLOPE: float = 1e-9

# Leading atoms of an infinite rule compared with the jumps of ρ.
RULE_SAMPLES: int = 40

# Absolute agreement required between an atom weight and the jumps of ρ.
ATOM_TOLERANCE: float = 1e-10

_logger = logging.getLogger("skewbm.structure.semimartingale")


class NuSummary(BaseModel):
    """ν_ρ = dρ split into atoms and an absolutely continuous part.

    Attributes:

      atoms (list[tuple[float, float]]): (y, ρ(y) − ρ(y−)) sorted by
      location, at most `MAX_LISTED_ATOMS` of them.

      atom_count (int | None): Number of atoms, `None` when infinite.

      dense_atoms (bool): The atoms are dense in some interval.

      continuous (bool): ν_ρ has an absolutely continuous part.

      density_pieces (list[DensityPiece]): dν_ρ/dx on the stretches where it
      has a closed form. Overlapping pieces add up.

      density_complete (bool): `density_pieces` covers the whole continuous
      part.
    """
    model_config = ConfigDict(frozen=True)

    atoms: list[tuple[float, float]] = Field(default_factory=list)
    atom_count: int | None = 0
    dense_atoms: bool = False
    continuous: bool = False
    density_pieces: list[DensityPiece] = Field(default_factory=list)
    density_complete: bool = True


class SemimartingaleReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    verdict: Literal["semimartingale", "not_semimartingale", "unknown"]
    confidence: ConfidenceT = "certified"
    nu: NuSummary | None = None
    evidence: list[str] = Field(default_factory=list)


def _combine(findings: list[tuple[bool | None, str]]) -> bool | None:
    if any(ok is False for ok, _ in findings):
        return False
    if any(ok is None for ok, _ in findings):
        return None
    return True


def _jump_masses(density: SkewDensity | RawDensity,
                 points: FloatArrayT) -> tuple[FloatArrayT, FloatArrayT]:
    points = np.unique(points[np.isfinite(points)])
    if len(points) == 0:
        return points, points
    masses = density.value(points, "right") - density.value(points, "left")
    nonzero = np.isfinite(masses) & (np.abs(masses) > 0)
    return points[nonzero], masses[nonzero]


def _near_accumulation(rule: JumpRule) -> FloatArrayT:
    """A point close to where the jumps of a rule accumulate."""
    limit = rule.locations.limit
    if rule.summable or math.isnan(limit):
        return np.array([0.0])
    if math.isinf(limit):
        return np.array([math.copysign(1e6, limit)])
    return np.array([limit + 1e-6 * max(1.0, abs(limit))])


def _sample_points(lo: float, hi: float) -> FloatArrayT:
    """Chebyshev nodes on a bounded stretch, log-spaced offsets from the
    finite end of a half-line."""
    if math.isfinite(lo) and math.isfinite(hi):
        angles = np.pi * (np.arange(STRETCH_SAMPLES) + 0.5) / STRETCH_SAMPLES
        return lo + (hi - lo) * (1 - np.cos(angles)) / 2
    offsets = np.logspace(-3, 2, STRETCH_SAMPLES)
    if math.isfinite(lo):
        return lo + max(1.0, abs(lo)) * offsets
    if math.isfinite(hi):
        return hi - max(1.0, abs(hi)) * offsets[::-1]
    return np.linspace(-10.0, 10.0, STRETCH_SAMPLES)


def _half_log_slopes(
        rho: SkewDensity, x: FloatArrayT, lo: float,
        hi: float) -> tuple[FloatArrayT, FloatArrayT, FloatArrayT]:
    """(log ρ)'/2 at the points of `x` where ρ is smooth, with a bound on
    the rounding error of each value.

    Central differences with one Richardson step. Points where the forward
    and backward differences disagree sit next to a jump of ρ and are
    dropped, as are points outside G.
    """
    x = x[rho.members(x) >= 0]
    distance = np.minimum(x - lo, hi - x)
    h = np.minimum(1e-4 * np.maximum(1.0, np.abs(x)), 0.01 * distance)
    far_left, left, center, right, far_right = (
        rho.log_value(x + s * h) for s in (-1.0, -0.5, 0.0, 0.5, 1.0))
    with np.errstate(invalid="ignore"):
        coarse = (far_right - far_left) / (2 * h)
        fine = (right - left) / h
        slope = (4 * fine - coarse) / 3
        noise = 64 * np.finfo(np.float64).eps * (1 + np.abs(center)) / h
        kink = np.abs((far_right - center) - (center - far_left)) / h
        smooth = kink <= 0.05 * np.abs(slope) + 10 * noise
    keep = smooth & np.isfinite(slope) & np.isfinite(noise)
    return x[keep], slope[keep] / 2, noise[keep] / 2


def _inner_point(lo: float, hi: float) -> float:
    if math.isfinite(lo) and math.isfinite(hi):
        return (lo + hi) / 2
    if math.isfinite(lo):
        return lo + 1.0
    if math.isfinite(hi):
        return hi - 1.0
    return 0.0


def _stretches(rho: SkewDensity,
               breakpoints: FloatArrayT | None = None) -> list[tuple[float,
                                                                    float]]:
    """Consecutive breakpoints of ρ whose stretch lies in G.

    Breakpoints are the ends of the intervals of G, the ends and centres of
    the density pieces of μ and the extra `breakpoints`.
    """
    d = rho.decomposition
    edges = set(d.lower.tolist()) | set(d.upper.tolist())
    for piece in rho.measure.density_pieces:
        edges |= {piece.lo, piece.hi}
        if isinstance(piece.expression, PowerExpr):
            edges.add(piece.expression.x0)
    if breakpoints is not None:
        edges |= set(breakpoints.tolist())
    ordered = sorted(edges)
    return [(lo, hi)
            for lo, hi in zip(ordered[:-1], ordered[1:])
            if rho.members(np.array([_inner_point(lo, hi)]))[0] >= 0]


def _centers(lo: float, hi: float, m: CheckedMeasure) -> tuple[float, ...]:
    centers = {lo, hi} | {
        p.expression.x0
        for p in m.density_pieces
        if isinstance(p.expression, PowerExpr)
    }
    return tuple(sorted(c for c in centers if math.isfinite(c)))


def _merge_pieces(pieces: list[DensityPiece]) -> list[DensityPiece]:
    merged: list[DensityPiece] = []
    for piece in pieces:
        if merged:
            last = merged[-1]
            same = (last.hi == piece.lo and last.sign == piece.sign and
                    last.expression.kind == piece.expression.kind and all(
                        math.isclose(getattr(last.expression, name),
                                     getattr(piece.expression, name),
                                     rel_tol=1e-6,
                                     abs_tol=1e-12)
                        for name in ("c", "q", "x0", "p")
                        if hasattr(piece.expression, name)))
            if same:
                merged[-1] = DensityPiece(lo=last.lo,
                                          hi=piece.hi,
                                          expression=last.expression,
                                          sign=last.sign)
                continue
        merged.append(piece)
    return merged


def _recovered_pieces(rho: SkewDensity) -> list[DensityPiece]:
    """Continuous part of μ, (log ρ)'/2, fitted stretch by stretch."""
    m = rho.measure
    pieces: list[DensityPiece] = []
    for lo, hi in _stretches(rho):
        x, slopes, noise = _half_log_slopes(rho, _sample_points(lo, hi), lo,
                                            hi)
        where = f"({lo:g}, {hi:g})"
        if len(x) < 3:
            raise RoundTripMismatch(where, "ρ is not smooth at any sample")
        if np.all(np.abs(slopes) <= FLAT_SLOPE + noise):
            continue
        fitted = fit_expression(x, slopes, _centers(lo, hi, m), noise=noise)
        if fitted is None:
            raise RoundTripMismatch(
                where, "(log ρ)'/2 is neither constant, exponential nor a "
                "power of the distance to a breakpoint")
        sign, expression = fitted
        pieces.append(
            DensityPiece(lo=lo, hi=hi, expression=expression, sign=sign))
    return _merge_pieces(pieces)


def _weight_candidates(k: FloatArrayT, w: FloatArrayT) -> list[WeightRule]:
    candidates: list[WeightRule] = [ConstantWeights(c=float(np.median(w)))]
    if len(w) < 2 or not (np.all(w > 0) or np.all(w < 0)):
        return candidates
    sign = float(np.sign(w[0]))
    log_w = np.log(np.abs(w))
    log_r, log_c = np.polyfit(k, log_w, deg=1)
    if log_r < 0 and log_c < 700:
        candidates.append(
            GeometricWeights(c=sign * math.exp(log_c), r=math.exp(log_r)))
    if not np.all(k > 0):
        return candidates
    slope, log_c = np.polyfit(np.log(k), log_w, deg=1)
    if slope < 0 and log_c < 700:
        candidates.append(PowerWeights(c=sign * math.exp(log_c), p=-slope))
    return candidates


def _recovered_rule(rho: SkewDensity, rule: AtomRule) -> AtomRule:
    """The rule with its weight family read off the jumps of ρ.

    A constant, geometric or power family fitted to the leading jumps
    replaces the declared one. Other declared families are kept when they
    reproduce every leading jump.
    """
    locations, _ = rule.materialize(rule.first_index + RULE_SAMPLES - 1)
    k = np.arange(rule.first_index,
                  rule.first_index + len(locations),
                  dtype=np.float64)
    weights = _atom_weights(rho, locations)
    seen = np.isfinite(weights)
    if not np.any(seen):
        _logger.warning("Atoms of rule %s lie where ρ vanishes, the rule is "
                        "carried over", rule.name)
        return rule
    k, weights = k[seen], weights[seen]
    for family in _weight_candidates(k, weights):
        if np.all(np.abs(family(k) - weights) <= ATOM_TOLERANCE):
            return rule.model_copy(update={"weights": family, "tail": None})
    if np.all(np.abs(rule.weights(k) - weights) <= ATOM_TOLERANCE):
        return rule
    raise RoundTripMismatch(f"rule {rule.name!r}",
                            "the jumps of ρ follow no weight family")


# Densities built from measures.


def _skew_findings(rho: SkewDensity,
                   es: EffectiveIntervalSet) -> list[tuple[bool | None, str]]:
    findings: list[tuple[bool | None, str]] = []
    d = rho.decomposition
    for k in range(len(es)):
        first, last = int(es.first[k]), int(es.last[k])
        if es.closed_left[k] and not d.uniform(first):
            kind = rho.profile(first).bv("left").kind
            findings.append((None if kind == "unknown" else kind == "bv",
                             f"ϱ near the closed end {es.lower[k]:g}: {kind}"))
        if es.closed_right[k] and not d.uniform(last):
            kind = rho.profile(last).bv("right").kind
            findings.append((None if kind == "unknown" else kind == "bv",
                             f"ϱ near the closed end {es.upper[k]:g}: {kind}"))
        if last == first:
            continue
        if d.limit_set is not None:
            # Variation over level ℓ gaps is 2^ℓ·β^(ℓ−1) times a constant.
            beta = rho.constant_ratio
            ok = None if beta is None else 2 * beta < 1
            findings.append((ok, f"variation over Cantor gaps with β={beta}"))
            continue
        for n in range(first, last + 1):
            for half in ("left", "right"):
                if (half == "left" and n == first) or (half == "right" and
                                                       n == last):
                    continue
                if d.uniform(n):
                    continue
                kind = rho.profile(n).bv(half).kind
                findings.append(
                    (None if kind == "unknown" else kind == "bv",
                     f"ϱ on the {half} half of interval {n}: {kind}"))
    return findings


def _skew_nu_density(rho: SkewDensity,
                     es: EffectiveIntervalSet) -> tuple[list[DensityPiece],
                                                        bool]:
    """ρ' = 2ρ·(log ρ)'/2 fitted on every stretch of an effective interval
    cut at the atoms of μ."""
    m = rho.measure
    if rho.decomposition.limit_set is not None:
        return [], True
    complete = len(m.atom_locations) <= MAX_LISTED_ATOMS
    breakpoints = m.atom_locations if complete else None
    pieces: list[DensityPiece] = []
    for lo, hi in _stretches(rho, breakpoints):
        if es.locate(_inner_point(lo, hi)) is None:
            continue
        x, slopes, noise = _half_log_slopes(rho, _sample_points(lo, hi), lo,
                                            hi)
        if np.all(np.abs(slopes) <= FLAT_SLOPE + noise):
            continue
        values = 2 * rho.value(x)
        fitted = fit_expression(x,
                                slopes * values,
                                _centers(lo, hi, m),
                                noise=noise * values)
        if fitted is None:
            _logger.debug("dν_ρ/dx on (%g, %g) has no closed form", lo, hi)
            complete = False
            continue
        sign, expression = fitted
        pieces.append(
            DensityPiece(lo=lo, hi=hi, expression=expression, sign=sign))
    return _merge_pieces(pieces), complete


def _skew_nu(rho: SkewDensity, es: EffectiveIntervalSet) -> NuSummary:
    d = rho.decomposition
    m = rho.measure
    candidates = [m.atom_locations]
    for k in range(len(es)):
        # Junctions between glued members.
        candidates.append(d.lower[int(es.first[k]) + 1:int(es.last[k]) + 1])
        for end, closed in ((es.lower[k], es.closed_left[k]),
                            (es.upper[k], es.closed_right[k])):
            if closed:
                candidates.append(np.array([end]))
    locations, masses = _jump_masses(rho, np.concatenate(candidates))
    inside = np.array([es.locate(float(y)) is not None for y in locations],
                      dtype=bool)
    locations, masses = locations[inside], masses[inside]
    infinite = bool(m.infinite_rules) or (d.limit_set is not None and
                                          np.any(es.last > es.first))
    density, complete = _skew_nu_density(rho, es)
    continuous = bool(density) or any(
        getattr(piece.expression, "c", 1.0) != 0
        for piece in m.density_pieces)
    return NuSummary(atoms=[(float(y), float(v)) for y, v in zip(
        locations[:MAX_LISTED_ATOMS], masses[:MAX_LISTED_ATOMS])],
                     atom_count=None if infinite else len(locations),
                     continuous=continuous,
                     density_pieces=density,
                     density_complete=complete)


# Raw densities.


def _raw_findings(rho: RawDensity,
                  es: EffectiveIntervalSet) -> list[tuple[bool | None, str]]:
    findings: list[tuple[bool | None, str]] = []

    def used(z: float) -> bool:
        return es.locate(z) is not None

    for piece in rho.pieces:
        expression = piece.expression
        if (isinstance(expression, PowerExpr) and expression.p < 0 and
                expression.c > 0 and piece.lo <= expression.x0 <= piece.hi and
                used(expression.x0)):
            findings.append((False, f"ρ is unbounded near {expression.x0:g}"))
    for rule in rho.jumps:
        z = rule.accumulation
        if not rule.summable and z is not None and used(z):
            findings.append(
                (False, f"jumps of {rule.name!r} are not summable near {z:g}"))
        else:
            findings.append((True, f"jumps of {rule.name!r} have finite "
                             "variation on compacts"))
    return findings


def _raw_nu(rho: RawDensity, es: EffectiveIntervalSet) -> NuSummary:
    candidates = [np.array([p.lo for p in rho.pieces] +
                           [p.hi for p in rho.pieces])]
    infinite = False
    for rule in rho.jumps:
        candidates.append(np.array([rule.lo, rule.hi]))
        locations, _ = rule.table(_near_accumulation(rule))
        candidates.append(locations)
        infinite = infinite or rule.stop is None
    locations, masses = _jump_masses(rho, np.concatenate(candidates))
    inside = np.array([es.locate(float(y)) is not None for y in locations],
                      dtype=bool)
    locations, masses = locations[inside], masses[inside]
    density: list[DensityPiece] = []
    complete = True
    for piece in rho.pieces:
        for k in range(len(es)):
            lo = max(piece.lo, float(es.lower[k]))
            hi = min(piece.hi, float(es.upper[k]))
            if not lo < hi:
                continue
            derived = _derivative_pieces(piece.expression, lo, hi)
            if derived is None:
                complete = False
            else:
                density.extend(derived)
    return NuSummary(
        atoms=[(float(y), float(v)) for y, v in zip(
            locations[:MAX_LISTED_ATOMS], masses[:MAX_LISTED_ATOMS])],
        atom_count=None if infinite else len(locations),
        dense_atoms=any(
            isinstance(rule.locations, RationalLocations)
            for rule in rho.jumps),
        continuous=bool(density) or not complete,
        density_pieces=density,
        density_complete=complete)


def semimartingale_verdict(
        rho: SkewDensity | RawDensity,
        es: EffectiveIntervalSet | None = None) -> SemimartingaleReport:
    """Decide whether ρ is locally of bounded variation on every effective
    interval, and summarize ν_ρ when it is.

    Args:

      rho (SkewDensity | RawDensity): The speed density.

      es (EffectiveIntervalSet | None): Its effective intervals, computed
      when `None`.
    """
    if isinstance(rho, SkewDensity):
        es = es or glue_effective_intervals(rho)
        findings = _skew_findings(rho, es)
    else:
        es = es or density_to_effective_intervals(rho)
        findings = _raw_findings(rho, es)
    evidence = [note for _, note in findings]
    match _combine(findings):
        case True:
            nu = (_skew_nu(rho, es)
                  if isinstance(rho, SkewDensity) else _raw_nu(rho, es))
            return SemimartingaleReport(verdict="semimartingale",
                                        nu=nu,
                                        evidence=evidence)
        case False:
            return SemimartingaleReport(verdict="not_semimartingale",
                                        evidence=evidence)
        case _:
            return SemimartingaleReport(verdict="unknown",
                                        confidence="numeric",
                                        evidence=evidence)


def _require_bv(report: SemimartingaleReport) -> None:
    if report.verdict == "not_semimartingale":
        raise NotBoundedVariation("; ".join(
            note for note in report.evidence if "not" in note or
            "unbounded" in note) or "ρ")


def _atom_weights(density: SkewDensity | RawDensity,
                  locations: FloatArrayT) -> FloatArrayT:
    """ν_ρ({y}) / (ρ(y) + ρ(y−)), `nan` where both one-sided values vanish."""
    right = density.value(locations, "right")
    left = density.value(locations, "left")
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(right + left > 0, (right - left) / (right + left),
                        np.nan)


def measure_density_roundtrip(rho: SkewDensity) -> CheckedMeasure:
    """Recover μ(dz) = ν_ρ(dz)/(ρ(z) + ρ(z−)) from a skew density.

    Only positions are taken from the measure ρ was built from: atom
    locations, the members of atom families and the ends of density pieces.
    Every value is read off ρ. Atom weights are the normalized jumps of ρ,
    weight families are fitted to the leading jumps and the continuous part
    is (log ρ)'/2 fitted stretch by stretch.

    Raises: `NotBoundedVariation` when ρ is certified not locally of bounded
    variation on some effective interval, `RoundTripMismatch` when what ρ
    shows has no closed form.
    """
    _require_bv(semimartingale_verdict(rho))
    m = rho.measure
    weights = _atom_weights(rho, m.atom_locations)
    unseen = np.isnan(weights)
    if np.any(unseen):
        _logger.warning("%d atoms lie where ρ vanishes on both sides, their "
                        "weights are carried over", int(np.sum(unseen)))
        weights = np.where(unseen, m.atom_weights, weights)
    if m.gaps is not None:
        return measure_from_arrays(m.atom_locations, weights, m.gaps)
    spec = SignedMeasureSpec(
        atoms=[
            AtomSpec(location=float(y), weight=float(w))
            for y, w in zip(m.atom_locations, weights)
        ],
        atom_rules=[_recovered_rule(rho, rule) for rule in m.infinite_rules],
        density_pieces=_recovered_pieces(rho),
        declared_infinite_regions=list(m.infinite_regions))
    return validate_measure(spec)


def _split_power(c: float, x0: float, p: float, sign: int, lo: float,
                 hi: float) -> list[DensityPiece]:
    """c·|x − x0|^p on (lo, hi), with sign −`sign` left of x0 and `sign`
    right of it."""
    pieces = []
    if x0 > lo:
        pieces.append(
            DensityPiece(lo=lo,
                         hi=min(hi, x0),
                         expression=PowerExpr(c=c, x0=x0, p=p),
                         sign=-sign))
    if x0 < hi:
        pieces.append(
            DensityPiece(lo=max(lo, x0),
                         hi=hi,
                         expression=PowerExpr(c=c, x0=x0, p=p),
                         sign=sign))
    return pieces


def _log_derivative_pieces(expression: Expression, lo: float,
                           hi: float) -> list[DensityPiece]:
    """(log f)'/2 on (lo, hi) as measure density pieces."""
    match expression:
        case PowerExpr() if expression.p != 0:
            sign = 1 if expression.p > 0 else -1
            return _split_power(
                abs(expression.p) / 2, expression.x0, -1.0, sign, lo, hi)
        case ExponentialExpr() if expression.q != 0:
            return [
                DensityPiece(lo=lo,
                             hi=hi,
                             expression=ConstantExpr(c=abs(expression.q) / 2),
                             sign=1 if expression.q > 0 else -1)
            ]
        case ExpPowerExpr() if expression.q != 0:
            sign = 1 if expression.q > 0 else -1
            return _split_power(
                abs(expression.q) * expression.p / 2, expression.x0,
                expression.p - 1, sign, lo, hi)
        case _:
            return []


def _derivative_pieces(expression: Expression, lo: float,
                       hi: float) -> list[DensityPiece] | None:
    """f' on (lo, hi) as signed pieces, `None` without a closed form."""
    if getattr(expression, "c", 1.0) == 0:
        return []
    match expression:
        case ConstantExpr():
            return []
        case PowerExpr() if expression.p == 0:
            return []
        case PowerExpr():
            sign = 1 if expression.p > 0 else -1
            return _split_power(expression.c * abs(expression.p),
                                expression.x0, expression.p - 1, sign, lo, hi)
        case ExponentialExpr() if expression.q == 0:
            return []
        case ExponentialExpr():
            return [
                DensityPiece(lo=lo,
                             hi=hi,
                             expression=ExponentialExpr(
                                 c=expression.c * abs(expression.q),
                                 q=expression.q),
                             sign=1 if expression.q > 0 else -1)
            ]
        case _:
            return None


def measure_from_density(rho: RawDensity) -> CheckedMeasure:
    """μ(dz) = ν_ρ(dz)/(ρ(z) + ρ(z−)) for a raw closed-form density.

    Stretches where ρ is a single closed-form piece give closed-form density
    pieces. Stretches covered by several pieces, or by a non-constant piece
    plus jumps, have no closed-form continuous part and are skipped with a
    warning. Jumps of infinite rules are truncated once the remaining jump
    sizes drop below `JUMP_TAIL_TOLERANCE`.

    Raises: `NotBoundedVariation` when ρ is certified not locally of bounded
    variation on some effective interval, `AssumptionAViolated` when ρ does
    not vanish on S(ρ).
    """
    es = density_to_effective_intervals(rho)
    _require_bv(semimartingale_verdict(rho, es))
    edges = sorted({p.lo for p in rho.pieces} | {p.hi for p in rho.pieces})
    pieces: list[DensityPiece] = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        covering = [
            p for p in rho.pieces
            if p.lo <= lo and hi <= p.hi and getattr(p.expression, "c", 1) != 0
        ]
        if not covering:
            continue
        jumped = any(rule.lo < hi and lo < rule.hi for rule in rho.jumps)
        constant = all(
            isinstance(p.expression, ConstantExpr) for p in covering)
        if len(covering) > 1 and not constant or (jumped and not constant):
            _logger.warning("The continuous part of μ on (%g, %g) has no "
                            "closed form and is omitted", lo, hi)
            continue
        if not constant:
            pieces.extend(_log_derivative_pieces(covering[0].expression, lo,
                                                 hi))
    candidates = [np.array(edges)]
    for rule in rho.jumps:
        candidates.append(np.array([rule.lo, rule.hi]))
        locations, _ = rule.table(_near_accumulation(rule))
        candidates.append(locations)
        if rule.stop is None:
            _logger.debug("Jumps of %s truncated below %g", rule.name,
                          JUMP_TAIL_TOLERANCE)
    locations = np.unique(np.concatenate(candidates))
    locations = locations[np.isfinite(locations)]
    weights = _atom_weights(rho, locations)
    keep = np.isfinite(weights) & (np.abs(weights) > 1e-15)
    spec = SignedMeasureSpec(atoms=[
        AtomSpec(location=float(y), weight=float(w))
        for y, w in zip(locations[keep], weights[keep])
    ],
                             density_pieces=pieces)
    return validate_measure(spec)


def local_time_from_pcaf(rho: SkewDensity | RawDensity, z: float,
                         ell: FloatArrayT | float) -> FloatArrayT:
    """Symmetric semimartingale local time L^z = (ρ(z) + ρ(z−))/2 · ℓ^z from
    the local time ℓ^z of the additive functional with Revuz measure δ_z."""
    scale = float((rho.value(z, "right")[0] + rho.value(z, "left")[0]) / 2)
    return scale * np.asarray(ell, dtype=np.float64)

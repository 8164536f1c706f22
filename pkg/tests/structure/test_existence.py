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

import math

import numpy as np
import pytest

from skewbm.analysis.decomposition import IntervalDecomposition
from skewbm.analysis.errors import ConditionsNotMet
from skewbm.analysis.measure import (
    AtomSpec,
    DensityPiece,
    SignedMeasureSpec,
    validate_measure,
)
from skewbm.analysis.profile import StatsTable
from skewbm.structure.connection import construct_constants
from skewbm.structure.conservative import check_conservative
from skewbm.structure.existence import (
    all_of,
    analyze_structure,
    check_existence_conditions,
)
from skewbm.structure.semimartingale import (
    measure_density_roundtrip,
    semimartingale_verdict,
)
from skewbm.structure.skew_density import (
    SkewDensity,
    glue_effective_intervals,
)


def skew(alpha: float) -> SignedMeasureSpec:
    return SignedMeasureSpec(atoms=[AtomSpec(location=0.0, weight=alpha)])


def log_singular(alpha: float) -> SignedMeasureSpec:
    return SignedMeasureSpec(
        atoms=[AtomSpec(location=0.0, weight=1.0)],
        density_pieces=[
            DensityPiece(lo=float("-inf"),
                         hi=0.0,
                         sign=-1,
                         expression={
                             "kind": "power",
                             "c": alpha / 2,
                             "p": -1
                         })
        ])


def skew_density(spec: SignedMeasureSpec,
                 target: str = "any_valid") -> SkewDensity:
    m = validate_measure(spec)
    analysis = analyze_structure(m)
    existence = check_existence_conditions(m, analysis=analysis)
    assert existence.exists == "true"
    constants = construct_constants(analysis.decomposition,
                                    analysis.stats,
                                    target,
                                    failed=existence.failed)
    return SkewDensity(m, analysis.decomposition, analysis.profiles,
                       analysis.stats, constants.values, constants.ratio)


def test_all_of() -> None:
    assert all_of(["true", "true"]) == "true"
    assert all_of(["true", "unknown"]) == "unknown"
    assert all_of(["unknown", "false"]) == "false"


@pytest.mark.parametrize("alpha", [-0.9, 0.0, 0.3])
def test_skew_measure_exists(alpha: float) -> None:
    report = check_existence_conditions(validate_measure(skew(alpha)))

    assert report.exists == "true"
    assert report.unique == "true"
    assert report.irreducible_exists == "true"
    assert report.confidence == "certified"
    assert not report.failed


def test_unit_atom_alone_does_not_exist() -> None:
    report = check_existence_conditions(validate_measure(skew(1.0)))

    assert report.conditions[1].holds == "false"
    assert report.exists == "false"
    assert report.unique == "false"
    assert report.irreducible_exists == "false"
    assert report.failed[0].startswith("condition (1)")


def test_failed_conditions_block_constants() -> None:
    m = validate_measure(skew(1.0))
    analysis = analyze_structure(m)
    report = check_existence_conditions(m, analysis=analysis)

    with pytest.raises(ConditionsNotMet):
        construct_constants(analysis.decomposition,
                            analysis.stats,
                            failed=report.failed)


def test_pseudo_barrier_gives_many_diffusions() -> None:
    report = check_existence_conditions(validate_measure(log_singular(0.5)))

    assert report.exists == "true"
    assert report.unique == "false"
    assert report.irreducible_exists == "true"


def test_real_barrier_gives_unique_reducible_diffusion() -> None:
    report = check_existence_conditions(validate_measure(log_singular(1.5)))

    assert report.exists == "true"
    assert report.unique == "true"
    assert report.irreducible_exists == "false"


def test_infinite_region_fails_complement_condition() -> None:
    spec = SignedMeasureSpec(declared_infinite_regions=[{"lo": 0, "hi": 1}])

    report = check_existence_conditions(validate_measure(spec))

    assert report.conditions[2].holds == "false"
    assert report.exists == "false"


def test_pseudo_barrier_glues_to_the_line() -> None:
    rho = skew_density(log_singular(0.5))

    es = glue_effective_intervals(rho)

    assert es.flags() == [(-math.inf, math.inf, False, False)]
    assert es.locate(0.0) == 0


def test_real_barrier_keeps_intervals_apart() -> None:
    rho = skew_density(log_singular(1.5))

    es = glue_effective_intervals(rho)

    # ∫1/ρ is finite right of 0, so 0 is adjoined to (0, ∞).
    assert es.flags() == [(-math.inf, 0.0, False, False),
                          (0.0, math.inf, True, False)]
    assert es.locate(0.0) == 1


@pytest.mark.parametrize("target", ["any_valid", "maximally_glued"])
def test_density_values_at_the_barrier(target: str) -> None:
    rho = skew_density(log_singular(0.5), target)

    right = float(rho.value(0.0, "right")[0])
    left = float(rho.value(0.0, "left")[0])

    assert right > 0
    assert left == 0.0


def test_skew_density_ratio() -> None:
    rho = skew_density(skew(0.3))

    ratio = rho.value(0.5) / rho.value(-0.5)

    assert ratio[0] == pytest.approx(1.3 / 0.7, rel=1e-9)


@pytest.mark.parametrize("factor", [1e-3, 1.0, 1e3])
def test_verdicts_do_not_depend_on_scale(factor: float) -> None:
    rho = skew_density(log_singular(0.5)).scaled(factor)

    es = glue_effective_intervals(rho)

    assert es.flags() == [(-math.inf, math.inf, False, False)]
    assert check_conservative(es).verdict == "conservative"
    assert semimartingale_verdict(rho, es).verdict == "semimartingale"


def test_scaled_rejects_nonpositive_factor() -> None:
    with pytest.raises(ValueError):
        skew_density(skew(0.3)).scaled(0.0)


def test_roundtrip_recovers_atoms() -> None:
    rho = skew_density(skew(0.3))

    m = measure_density_roundtrip(rho)

    np.testing.assert_allclose(m.atom_locations, [0.0])
    np.testing.assert_allclose(m.atom_weights, [0.3], rtol=1e-9)


def test_roundtrip_recovers_barrier() -> None:
    rho = skew_density(log_singular(0.5))

    m = measure_density_roundtrip(rho)

    assert m.xi_plus.tolist() == [0.0]
    assert len(m.density_pieces) == 1
    (piece,) = m.density_pieces
    assert (piece.lo, piece.hi, piece.sign) == (-math.inf, 0.0, -1)
    assert piece.expression.kind == "power"
    assert piece.expression.x0 == 0.0
    assert piece.expression.c == pytest.approx(0.25, rel=1e-6)
    assert piece.expression.p == pytest.approx(-1.0, rel=1e-6)


def test_any_valid_caps_runs_toward_bounded_ends() -> None:
    decomposition = IntervalDecomposition(
        lower=np.array([-math.inf, 0.0, 1.0, 2.0]),
        upper=np.array([-1.0, 1.0, 2.0, 3.0]),
        reference=np.array([-2.0, 0.5, 1.5, 2.5]),
        level=np.zeros(4, dtype=np.int64))
    ones = np.ones(4)
    stats = StatsTable(A=np.array([math.inf, 1.0, 1.0, 1.0]),
                       B=np.array([math.inf, 0.01, 0.01, 0.01]),
                       A_left=ones,
                       A_right=ones,
                       B_left=ones,
                       B_right=ones,
                       V=np.array([math.inf, 1.0, 1.0, 1.0]),
                       certified=np.ones(4, dtype=np.bool_))

    values = construct_constants(decomposition, stats).values

    # 1/(n²Aₙ) for the first two, then Bₙ·Σ cₘAₘ over (0, 1), (1, 2), ...
    np.testing.assert_allclose(values, [1.0, 0.25, 0.0025, 0.002525])

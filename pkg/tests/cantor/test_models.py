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

import numpy as np
import pytest

from skewbm.analysis.errors import BetaOutOfRange, DepthOverflow
from skewbm.analysis.gaps import (
    AlphaRule,
    CantorSpec,
    level_counts,
    level_lengths,
)
from skewbm.cantor.models import (
    MAX_DEPTH,
    beta_range,
    cantor_constants,
    cantor_verdict,
    generate_cantor,
)
from skewbm.structure.existence import check_existence_conditions


def spec(alpha: float,
         depth: int = 6,
         gap_model: str = "power_law") -> CantorSpec:
    return CantorSpec(alphas=AlphaRule(alpha=alpha),
                      depth=depth,
                      gap_model=gap_model)


def test_middle_thirds() -> None:
    decomposition, m = generate_cantor(spec(1 / 3, 2, "middle_proportion"))

    np.testing.assert_allclose(decomposition.lower,
                               [-np.inf, 1 / 9, 1 / 3, 7 / 9, 1.0])
    np.testing.assert_allclose(decomposition.upper,
                               [0.0, 2 / 9, 2 / 3, 8 / 9, np.inf])
    assert decomposition.level.tolist() == [0, 2, 1, 2, 0]
    assert decomposition.reference[0] == -1.0
    assert decomposition.reference[-1] == 2.0
    np.testing.assert_allclose(m.xi_plus, [1 / 9, 1 / 3, 7 / 9, 1.0])
    np.testing.assert_allclose(m.xi_minus, [0.0, 2 / 9, 2 / 3, 8 / 9])


def test_models_agree_on_thirds() -> None:
    power_law, _ = generate_cantor(spec(1 / 3, 5))
    middle, _ = generate_cantor(spec(1 / 3, 5, "middle_proportion"))

    np.testing.assert_allclose(power_law.lower, middle.lower)
    np.testing.assert_allclose(power_law.upper, middle.upper)


def test_level_counts_and_lengths() -> None:
    np.testing.assert_allclose(level_counts(4), [1, 2, 4, 8])
    np.testing.assert_allclose(level_lengths(spec(0.2), 3),
                               [0.2, 0.04, 0.008])

    decomposition, _ = generate_cantor(spec(0.2, 7))

    assert np.bincount(decomposition.level)[1:].tolist() == [
        1, 2, 4, 8, 16, 32, 64
    ]


def test_power_law_needs_small_alpha() -> None:
    with pytest.raises(ValueError):
        spec(0.5)


def test_depth_overflow() -> None:
    with pytest.raises(DepthOverflow):
        generate_cantor(spec(0.2, MAX_DEPTH + 1))


@pytest.mark.parametrize("alpha", [0.25, 0.3, 1 / 3])
def test_unique_regime(alpha: float) -> None:
    report = cantor_verdict(spec(alpha))

    assert report.verdict == "unique"
    assert report.confidence == "certified"
    assert report.residue is not None


@pytest.mark.parametrize("alpha", [0.1, 0.2])
def test_irreducible_regime(alpha: float) -> None:
    report = cantor_verdict(spec(alpha))

    assert report.verdict == "infinitely_many_irreducible"
    assert report.beta_range == pytest.approx((2 * alpha, 0.5))
    assert report.beta == pytest.approx(alpha + 0.25)
    assert report.complement_measure == 0.0


def test_fat_cantor_set() -> None:
    fat = CantorSpec(alphas=AlphaRule(kind="geometric", alpha=0.5, r=0.5),
                     depth=6,
                     gap_model="middle_proportion")

    report = cantor_verdict(fat)

    assert report.complement_measure > 0
    assert report.confidence == "numeric"
    assert report.verdict != "infinitely_many_irreducible"


def test_beta_range() -> None:
    assert beta_range(spec(0.2)) == pytest.approx((0.4, 0.5))
    assert beta_range(spec(0.3)) is None
    assert beta_range(spec(1 / 3, gap_model="middle_proportion")) is None


def test_cantor_constants() -> None:
    choice = cantor_constants(spec(0.2, 3), 0.45)
    decomposition, _ = generate_cantor(spec(0.2, 3))

    expected = np.where(decomposition.level > 0,
                        0.45**(decomposition.level - 1.0), 1.0)
    np.testing.assert_allclose(choice.values, expected)
    assert choice.ratio == 0.45


@pytest.mark.parametrize("alpha,beta", [(0.2, 0.6), (0.2, 0.4), (0.3, 0.61)])
def test_beta_out_of_range(alpha: float, beta: float) -> None:
    with pytest.raises(BetaOutOfRange):
        cantor_constants(spec(alpha, 3), beta)


@pytest.mark.parametrize("alpha,unique", [(0.1, "false"), (0.3, "true")])
def test_generated_structures_exist(alpha: float, unique: str) -> None:
    _, m = generate_cantor(spec(alpha, 5))

    report = check_existence_conditions(m)

    assert report.exists == "true"
    assert report.unique == unique

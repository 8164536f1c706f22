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

from skewbm.analysis.atom_rules import AtomRule
from skewbm.analysis.errors import AtomMagnitudeError, DuplicateAtomError
from skewbm.analysis.measure import (
    AtomSpec,
    SignedMeasureSpec,
    atom_at,
    mass_on_interval,
    validate_measure,
)


def skew_measure(alpha: float) -> SignedMeasureSpec:
    return SignedMeasureSpec(
        atoms=[AtomSpec(location=0.0, weight=2 * alpha - 1)])


def test_sub_unit_atom_has_no_barriers() -> None:
    m = validate_measure(SignedMeasureSpec(atoms=[{
        "location": 0,
        "weight": 0.5
    }]))

    assert len(m.xi) == 0
    assert m.atom_weights.tolist() == [0.5]


def test_unit_atom_is_right_barrier() -> None:
    m = validate_measure(SignedMeasureSpec(atoms=[{
        "location": 0,
        "weight": 1.0
    }]))

    assert m.xi_plus.tolist() == [0.0]
    assert len(m.xi_minus) == 0


def test_atom_too_heavy() -> None:
    with pytest.raises(AtomMagnitudeError):
        validate_measure(
            SignedMeasureSpec(atoms=[{
                "location": 0,
                "weight": 1.2
            }]))


def test_duplicate_atoms() -> None:
    with pytest.raises(DuplicateAtomError):
        validate_measure(
            SignedMeasureSpec(atoms=[
                {
                    "location": 1,
                    "weight": 0.1
                },
                {
                    "location": 1,
                    "weight": -0.2
                },
            ]))


def test_rational_weights() -> None:
    spec = SignedMeasureSpec(atoms=[{"location": "1/3", "weight": "-2/3"}])

    assert spec.atoms[0].location == 1 / 3
    assert spec.atoms[0].weight == -2 / 3


def test_overlapping_density_pieces_rejected() -> None:
    with pytest.raises(ValueError):
        SignedMeasureSpec(density_pieces=[
            {
                "lo": 0,
                "hi": 2,
                "expression": {
                    "kind": "constant",
                    "c": 1
                }
            },
            {
                "lo": 1,
                "hi": 3,
                "expression": {
                    "kind": "constant",
                    "c": 1
                }
            },
        ])


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_mass_of_skew_atom(alpha: float) -> None:
    m = validate_measure(skew_measure(alpha))

    total = mass_on_interval(m, -1.0, 1.0)

    assert total.is_finite
    assert total.as_float() == pytest.approx(abs(2 * alpha - 1), abs=1e-15)
    assert atom_at(m, 0.0) == 2 * alpha - 1
    assert atom_at(m, 1.0) == 0.0


def test_non_integrable_density_has_infinite_mass() -> None:
    m = validate_measure(
        SignedMeasureSpec(density_pieces=[{
            "lo": -math.inf,
            "hi": 0,
            "sign": -1,
            "expression": {
                "kind": "power",
                "c": 0.25,
                "p": -1
            },
        }]))

    mass = mass_on_interval(m, -1.0, 0.0)

    assert mass.is_infinite
    assert mass.confidence == "certified"
    assert mass_on_interval(m, -1.0, 0.0, "plus").as_float() == 0.0


def test_divergent_rule_has_infinite_plus_mass() -> None:
    # β_k = k/(k + 2) at −1/(2k), non-summable toward 0.
    rule = AtomRule(name="plus",
                    locations={
                        "kind": "reciprocal",
                        "scale": -1,
                        "p": 2
                    },
                    weights={
                        "kind": "rational_linear",
                        "c": 1,
                        "v": 2
                    },
                    accumulation=0.0)
    m = validate_measure(SignedMeasureSpec(atom_rules=[rule]))

    assert mass_on_interval(m, -1.0, 0.0, "plus").is_infinite
    assert mass_on_interval(m, -1.0, 0.0, "minus").as_float() == 0.0
    assert atom_at(m, -0.5) == pytest.approx(1 / 3)


def test_mass_is_additive() -> None:
    rng = np.random.default_rng(11)
    locations = rng.uniform(-5, 5, size=30)
    weights = rng.uniform(-0.9, 0.9, size=30)
    m = validate_measure(
        SignedMeasureSpec(atoms=[
            AtomSpec(location=x, weight=w)
            for x, w in zip(locations, weights)
        ],
                          density_pieces=[{
                              "lo": -2,
                              "hi": 3,
                              "expression": {
                                  "kind": "exponential",
                                  "c": 0.1,
                                  "q": 0.3
                              },
                          }]))

    cut = 0.123
    left = mass_on_interval(m, -6.0, cut, closed=(False, True))
    right = mass_on_interval(m, cut, 6.0)
    whole = mass_on_interval(m, -6.0, 6.0)

    assert left.as_float() + right.as_float() == pytest.approx(
        whole.as_float(), rel=1e-10)


def test_scaling_by_zero_removes_everything() -> None:
    m = validate_measure(skew_measure(0.75)).scaled(0.0)

    assert len(m.atom_locations) == 0
    assert mass_on_interval(m, -math.inf, math.inf).as_float() == 0.0

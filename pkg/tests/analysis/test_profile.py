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

from skewbm.analysis.measure import (
    AtomSpec,
    CheckedMeasure,
    SignedMeasureSpec,
    validate_measure,
)
from skewbm.analysis.errors import AtomOnBoundary, OutOfInterval
from skewbm.analysis.profile import (
    IntervalStats,
    build_profile,
    endpoint_limit,
    eval_density,
    integral_stats,
)


def skew(alpha: float) -> CheckedMeasure:
    return validate_measure(
        SignedMeasureSpec(atoms=[AtomSpec(location=0, weight=2 * alpha - 1)]))


def log_singular(alpha: float) -> CheckedMeasure:
    """−(α/2)|z|⁻¹dz on (−∞, 0) and a unit atom at 0."""
    return validate_measure(
        SignedMeasureSpec(atoms=[{
            "location": 0,
            "weight": 1
        }],
                          density_pieces=[{
                              "lo": -math.inf,
                              "hi": 0,
                              "sign": -1 if alpha > 0 else 1,
                              "expression": {
                                  "kind": "power",
                                  "c": abs(alpha) / 2,
                                  "p": -1
                              },
                          }]))


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_skew_profile_is_a_step(alpha: float) -> None:
    p = build_profile(skew(alpha), (-math.inf, math.inf, 1.0))

    assert eval_density(p, 1.0) == 1.0
    assert eval_density(p, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert eval_density(p, 7.5) == pytest.approx(1.0, abs=1e-12)
    assert eval_density(p, 0.0, "left") == pytest.approx((1 - alpha) / alpha,
                                                         abs=1e-12)
    assert eval_density(p, -3.0) == pytest.approx((1 - alpha) / alpha,
                                                  abs=1e-12)


def test_skew_endpoint_limits() -> None:
    p = build_profile(skew(0.75), (-math.inf, math.inf, 0.0))

    lower = endpoint_limit(p, "a")

    assert lower.kind == "positive"
    assert lower.value == pytest.approx(1 / 3, abs=1e-12)
    assert endpoint_limit(p, "b").kind == "positive"


def test_continuous_profile_is_exponential() -> None:
    m = validate_measure(
        SignedMeasureSpec(density_pieces=[{
            "lo": -1,
            "hi": 1,
            "expression": {
                "kind": "constant",
                "c": 0.5
            }
        }]))
    p = build_profile(m, (-math.inf, math.inf, 0.0))

    z = np.array([-2.0, -0.5, 0.25, 0.75, 3.0])
    expected = np.exp(2 * 0.5 * np.clip(z, -1, 1))

    np.testing.assert_allclose(p.value(z), expected, rtol=1e-12)
    np.testing.assert_allclose(p.value(z), p.value(z, "left"), rtol=1e-12)


def test_log_singular_profile_is_a_power() -> None:
    alpha = 0.5
    p = build_profile(log_singular(alpha), (-math.inf, 0.0, -1.0))

    z = np.array([-4.0, -1.0, -0.3, -1e-3])

    np.testing.assert_allclose(p.value(z), np.abs(z)**alpha, rtol=1e-10)
    assert endpoint_limit(p, "b").kind == "zero"


def test_power_profile_integrals() -> None:
    p = build_profile(log_singular(0.5), (-2.0, 0.0, -1.0))

    stats = integral_stats(p)

    assert stats.A.as_float() == pytest.approx(2**1.5 / 1.5, rel=1e-4)
    assert stats.B.as_float() == pytest.approx(2 * math.sqrt(2), rel=1e-4)
    assert stats.B_right.as_float() == pytest.approx(2.0, rel=1e-4)


def test_power_profile_inverse_diverges_at_infinity() -> None:
    p = build_profile(log_singular(0.5), (-math.inf, 0.0, -1.0))

    stats = integral_stats(p)

    assert stats.B_left.is_infinite
    assert stats.B_right.is_finite


def test_uniform_gap_statistics() -> None:
    stats = IntervalStats.uniform(0.25)

    assert stats.A.as_float() == 0.25
    assert stats.B.as_float() == 0.25
    assert stats.V.as_float() == 2.0


def test_unit_atom_inside_interval() -> None:
    m = validate_measure(SignedMeasureSpec(atoms=[{
        "location": 0,
        "weight": 1
    }]))

    with pytest.raises(AtomOnBoundary):
        build_profile(m, (-math.inf, math.inf, 1.0))


def test_evaluation_outside_interval() -> None:
    p = build_profile(log_singular(0.5), (-math.inf, 0.0, -1.0))

    with pytest.raises(OutOfInterval):
        eval_density(p, 0.5)


def test_random_profiles_satisfy_jump_identity() -> None:
    rng = np.random.default_rng(2024)
    for _ in range(200):
        count = int(rng.integers(1, 51))
        locations = np.unique(np.round(rng.uniform(-10, 10, count), 6))
        weights = rng.uniform(-0.9, 0.9, len(locations))
        weights *= min(1.0, 4.9 / np.sum(np.abs(weights)))
        pieces = []
        if rng.random() < 0.5:
            pieces.append({
                "lo": -5,
                "hi": 5,
                "sign": int(rng.choice([-1, 1])),
                "expression": {
                    "kind": "constant",
                    "c": float(rng.uniform(0, 0.1))
                },
            })
        m = validate_measure(
            SignedMeasureSpec(atoms=[
                AtomSpec(location=x, weight=w)
                for x, w in zip(locations, weights)
            ],
                              density_pieces=pieces))
        reference = float(rng.uniform(-11, 11))
        if np.any(locations == reference):
            continue
        p = build_profile(m, (-math.inf, math.inf, reference))

        assert p.value(reference)[0] == pytest.approx(1.0, abs=1e-12)
        right = p.value(locations, "right")
        left = p.value(locations, "left")
        np.testing.assert_allclose((right - left) / (right + left),
                                   weights,
                                   atol=1e-9)
        grid = np.sort(rng.uniform(-12, 12, 100))
        plus = p.value(grid, variant="plus")
        minus = p.value(grid, variant="minus")
        np.testing.assert_allclose(p.value(grid), plus / minus, rtol=1e-9)
        assert np.all(np.diff(plus) >= -1e-9 * plus[1:])
        assert np.all(np.diff(minus) >= -1e-9 * minus[1:])

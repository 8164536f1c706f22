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

from skewbm.analysis.errors import AssumptionAViolated, NotBoundedVariation
from skewbm.analysis.expressions import Piece
from skewbm.structure.conservative import check_conservative
from skewbm.structure.raw_density import (
    JumpRule,
    RawDensity,
    density_to_effective_intervals,
    scale_function,
)
from skewbm.structure.semimartingale import (
    local_time_from_pcaf,
    measure_from_density,
    semimartingale_verdict,
)

LINE = (-math.inf, math.inf)


def power_density(alpha: float) -> RawDensity:
    return RawDensity(pieces=[
        Piece(lo=LINE[0],
              hi=LINE[1],
              expression={
                  "kind": "power",
                  "c": 1,
                  "p": alpha
              })
    ])


def indicator_density() -> RawDensity:
    """1 plus unit jumps alternating in sign, accumulating at 0 from the
    right."""
    up = JumpRule(name="up",
                  lo=0,
                  hi=1,
                  anchor="hi",
                  locations={
                      "kind": "reciprocal",
                      "scale": 1,
                      "p": 2,
                      "q": 1
                  },
                  sizes={
                      "kind": "constant",
                      "c": 1
                  })
    down = JumpRule(name="down",
                    lo=0,
                    hi=1,
                    anchor="hi",
                    locations={
                        "kind": "reciprocal",
                        "scale": 1,
                        "p": 2
                    },
                    sizes={
                        "kind": "constant",
                        "c": -1
                    })
    return RawDensity(pieces=[
        Piece(lo=LINE[0], hi=LINE[1], expression={
            "kind": "constant",
            "c": 1
        })
    ],
                      jumps=[up, down])


def rational_density() -> RawDensity:
    jumps = JumpRule(name="rationals",
                     locations={"kind": "rationals"},
                     sizes={
                         "kind": "geometric",
                         "c": 1,
                         "r": 0.5
                     })
    return RawDensity(pieces=[
        Piece(lo=LINE[0], hi=LINE[1], expression={
            "kind": "constant",
            "c": 1
        })
    ],
                      jumps=[jumps])


def test_sub_unit_power_is_one_interval() -> None:
    es = density_to_effective_intervals(power_density(0.5))

    assert es.flags() == [(-math.inf, math.inf, False, False)]


def test_steep_power_splits_at_its_zero() -> None:
    es = density_to_effective_intervals(power_density(1.5))

    assert es.flags() == [(-math.inf, 0.0, False, False),
                          (0.0, math.inf, False, False)]
    assert es.locate(0.0) is None


def test_gap_in_the_pieces_adjoins_ends() -> None:
    rho = RawDensity(pieces=[
        Piece(lo=-math.inf, hi=-1, expression={
            "kind": "constant",
            "c": 1
        }),
        Piece(lo=1, hi=math.inf, expression={
            "kind": "constant",
            "c": 2
        }),
    ])

    es = density_to_effective_intervals(rho)

    assert es.flags() == [(-math.inf, -1.0, False, True),
                          (1.0, math.inf, True, False)]


def test_jumps_on_singular_set_violate_assumption() -> None:
    rho = RawDensity(pieces=[
        Piece(lo=1, hi=math.inf, expression={
            "kind": "constant",
            "c": 1
        })
    ],
                     jumps=[
                         JumpRule(name="stray",
                                  lo=-2,
                                  hi=-1,
                                  locations={
                                      "kind": "arithmetic",
                                      "origin": -2,
                                      "step": 0.25
                                  },
                                  sizes={
                                      "kind": "constant",
                                      "c": 1
                                  },
                                  stop=3)
                     ])

    with pytest.raises(AssumptionAViolated):
        density_to_effective_intervals(rho)


def test_jumps_accumulating_on_anchor_side_are_rejected() -> None:
    with pytest.raises(ValueError):
        JumpRule(name="bad",
                 lo=0,
                 hi=1,
                 anchor="lo",
                 locations={
                     "kind": "reciprocal",
                     "scale": 1
                 },
                 sizes={
                     "kind": "constant",
                     "c": 1
                 })


def test_scale_function_of_constant_density() -> None:
    rho = RawDensity(pieces=[
        Piece(lo=LINE[0], hi=LINE[1], expression={
            "kind": "constant",
            "c": 2
        })
    ])

    s = scale_function(density_to_effective_intervals(rho))

    np.testing.assert_allclose(s(np.array([-1.0, 0.0, 3.0])),
                               [-0.5, 0.0, 1.5])
    assert s.inverse(1.5) == pytest.approx(3.0, abs=1e-9)
    assert s.image == (-math.inf, math.inf)


def test_scale_function_outside_intervals() -> None:
    with pytest.raises(LookupError):
        scale_function(density_to_effective_intervals(power_density(1.5)))


def test_indicator_steps() -> None:
    rho = indicator_density()

    np.testing.assert_allclose(rho.value(np.array([-1.0, 0.9, 0.4])),
                               [1.0, 1.0, 2.0])
    assert float(rho.value(0.5, "right")[0]) == 1.0
    assert float(rho.value(0.5, "left")[0]) == 2.0


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_power_density_is_a_semimartingale(alpha: float) -> None:
    report = semimartingale_verdict(power_density(alpha))

    assert report.verdict == "semimartingale"
    assert report.nu is not None
    assert report.nu.continuous
    assert report.nu.atom_count == 0


@pytest.mark.slow
def test_oscillating_jumps_are_not_a_semimartingale() -> None:
    report = semimartingale_verdict(indicator_density())

    assert report.verdict == "not_semimartingale"
    assert report.nu is None


def test_unbounded_power_is_not_a_semimartingale() -> None:
    report = semimartingale_verdict(power_density(-0.5))

    assert report.verdict == "not_semimartingale"
    with pytest.raises(NotBoundedVariation):
        measure_from_density(power_density(-0.5))


@pytest.mark.slow
def test_rational_jumps_are_a_semimartingale() -> None:
    report = semimartingale_verdict(rational_density())

    assert report.verdict == "semimartingale"
    assert report.nu is not None
    assert report.nu.dense_atoms
    assert report.nu.atom_count is None
    assert not report.nu.continuous


def test_measure_from_power_density() -> None:
    m = measure_from_density(power_density(0.5))

    # (log |z|^0.5)'/2 = ±1/(4|z|) on either side of 0.
    assert len(m.atom_locations) == 0
    assert [(p.lo, p.hi, p.sign) for p in m.density_pieces] == [
        (-math.inf, 0.0, -1), (0.0, math.inf, 1)
    ]
    assert all(p.expression.c == 0.25 for p in m.density_pieces)


def test_measure_from_step_density() -> None:
    rho = RawDensity(pieces=[
        Piece(lo=-math.inf, hi=0, expression={
            "kind": "constant",
            "c": 1
        }),
        Piece(lo=0, hi=math.inf, expression={
            "kind": "constant",
            "c": 3
        }),
    ])

    m = measure_from_density(rho)

    np.testing.assert_allclose(m.atom_locations, [0.0])
    np.testing.assert_allclose(m.atom_weights, [0.5])


def test_constant_density_gives_zero_measure() -> None:
    rho = RawDensity(pieces=[
        Piece(lo=LINE[0],
              hi=LINE[1],
              expression={
                  "kind": "constant",
                  "c": 2.5
              })
    ])

    m = measure_from_density(rho)
    report = semimartingale_verdict(rho)

    assert len(m.atom_locations) == 0
    assert m.density_pieces == ()
    assert report.nu is not None
    assert not report.nu.continuous
    assert report.nu.density_pieces == []
    assert report.nu.density_complete


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.5])
def test_power_density_both_ways(alpha: float) -> None:
    rho = power_density(alpha)

    m = measure_from_density(rho)
    nu = semimartingale_verdict(rho).nu

    # μ(dz) = (α/2)·sgn(z)/|z| dz.
    assert [(p.lo, p.hi, p.sign) for p in m.density_pieces] == [
        (-math.inf, 0.0, -1), (0.0, math.inf, 1)
    ]
    for piece in m.density_pieces:
        assert piece.expression.c == pytest.approx(alpha / 2)
        assert piece.expression.p == -1.0
        assert piece.expression.x0 == 0.0
    # ν_ρ(dz) = α·sgn(z)|z|^(α−1) dz.
    assert nu is not None
    assert nu.density_complete
    assert [(p.lo, p.hi, p.sign) for p in nu.density_pieces] == [
        (-math.inf, 0.0, -1), (0.0, math.inf, 1)
    ]
    for piece in nu.density_pieces:
        assert piece.expression.c == pytest.approx(alpha)
        assert piece.expression.p == pytest.approx(alpha - 1)
    x = np.array([-2.0, -0.5, 0.5, 2.0])
    derivative = sum(
        np.where((x > p.lo) & (x < p.hi), p.sign * p.expression.value(x), 0.0)
        for p in nu.density_pieces)
    np.testing.assert_allclose(derivative,
                               alpha * np.sign(x) * np.abs(x)**(alpha - 1))


def test_exp_power_density_has_no_closed_form_derivative() -> None:
    rho = RawDensity(pieces=[
        Piece(lo=LINE[0],
              hi=LINE[1],
              expression={
                  "kind": "exp_power",
                  "c": 1,
                  "q": 1,
                  "p": 2
              })
    ])

    nu = semimartingale_verdict(rho).nu

    assert nu is not None
    assert nu.continuous
    assert not nu.density_complete


def test_exploding_end() -> None:
    rho = RawDensity(pieces=[
        Piece(lo=0,
              hi=math.inf,
              expression={
                  "kind": "exp_power",
                  "c": 1,
                  "q": 1,
                  "p": 3
              })
    ])

    report = check_conservative(density_to_effective_intervals(rho))

    assert report.verdict == "explodes"
    assert [end.end for end in report.exploding_ends] == ["+inf"]
    assert report.confidence == "certified"


def test_gaussian_growth_is_conservative() -> None:
    rho = RawDensity(pieces=[
        Piece(lo=LINE[0],
              hi=LINE[1],
              expression={
                  "kind": "exp_power",
                  "c": 1,
                  "q": 1,
                  "p": 2
              })
    ])

    report = check_conservative(density_to_effective_intervals(rho))

    assert report.verdict == "conservative"
    assert len(report.ends) == 2


def test_local_time_from_pcaf() -> None:
    rho = RawDensity(pieces=[
        Piece(lo=-math.inf, hi=0, expression={
            "kind": "constant",
            "c": 1
        }),
        Piece(lo=0, hi=math.inf, expression={
            "kind": "constant",
            "c": 3
        }),
    ])

    np.testing.assert_allclose(local_time_from_pcaf(rho, 0.0, [1.0, 0.5]),
                               [2.0, 1.0])

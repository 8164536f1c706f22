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

from skewbm.analysis.atom_rules import AtomRule
from skewbm.analysis.measure import (
    AtomSpec,
    CheckedMeasure,
    DensityPiece,
    SignedMeasureSpec,
    validate_measure,
)
from skewbm.reports.analysis import analyze_measure
from skewbm.structure.semimartingale import measure_density_roundtrip
from skewbm.structure.skew_density import SkewDensity


def density_of(m: CheckedMeasure) -> SkewDensity:
    run = analyze_measure(m, spec_hash="0" * 64)
    assert run.density is not None
    return run.density


def continuous_part(pieces: tuple[DensityPiece, ...],
                    x: np.ndarray) -> np.ndarray:
    total = np.zeros_like(x)
    for piece in pieces:
        inside = (x > piece.lo) & (x < piece.hi)
        total[inside] += piece.sign * piece.expression.value(x[inside])
    return total


def random_spec(rng: np.random.Generator) -> SignedMeasureSpec:
    """Up to three atoms with |weight| ≤ 0.9 and up to two disjoint
    constant or power pieces."""
    atoms = [
        AtomSpec(location=float(y), weight=float(rng.uniform(-0.9, 0.9)))
        for y in rng.uniform(-5, 5, size=int(rng.integers(0, 4)))
    ]
    ends = np.sort(rng.uniform(-6, 6, size=2 * int(rng.integers(0, 3))))
    pieces = []
    for lo, hi in zip(ends[::2], ends[1::2]):
        if rng.random() < 0.5:
            expression = {"kind": "constant", "c": rng.uniform(0.05, 1.0)}
        else:
            expression = {
                "kind": "power",
                "c": rng.uniform(0.05, 0.5),
                "x0": lo if rng.random() < 0.5 else hi,
                "p": rng.choice([-0.5, 0.5, 1.5]),
            }
        pieces.append(
            DensityPiece(lo=lo,
                         hi=hi,
                         sign=int(rng.choice([-1, 1])),
                         expression=expression))
    return SignedMeasureSpec(atoms=atoms, density_pieces=pieces)


@pytest.mark.slow
def test_random_measures_survive_the_roundtrip() -> None:
    rng = np.random.default_rng(seed=20231)
    x = np.linspace(-6.5, 6.5, 1000)

    for _ in range(50):
        m = validate_measure(random_spec(rng))

        recovered = measure_density_roundtrip(density_of(m))

        np.testing.assert_array_equal(recovered.atom_locations,
                                      m.atom_locations)
        np.testing.assert_allclose(recovered.atom_weights,
                                   m.atom_weights,
                                   rtol=0,
                                   atol=1e-10)
        np.testing.assert_allclose(continuous_part(recovered.density_pieces,
                                                   x),
                                   continuous_part(m.density_pieces, x),
                                   rtol=1e-5,
                                   atol=1e-9)


def test_roundtrip_reads_rho_not_its_measure() -> None:
    """ρ keeps its own values when the measure it carries is replaced."""

    def flat(c: float) -> CheckedMeasure:
        return validate_measure(
            SignedMeasureSpec(density_pieces=[
                DensityPiece(lo=-1,
                             hi=1,
                             expression={
                                 "kind": "constant",
                                 "c": c
                             })
            ]))

    rho = density_of(flat(0.3))
    rho.profile(0)
    swapped = SkewDensity(flat(0.7), rho.decomposition, rho.profiles,
                          rho.stats, rho.constants)

    (piece,) = measure_density_roundtrip(swapped).density_pieces

    assert (piece.lo, piece.hi, piece.sign) == (-1.0, 1.0, 1)
    assert piece.expression.kind == "constant"
    assert piece.expression.c == pytest.approx(0.3, rel=1e-6)


def test_roundtrip_refits_atom_families() -> None:
    rule = AtomRule(name="fast",
                    locations={
                        "kind": "geometric",
                        "scale": 1,
                        "r": 0.5
                    },
                    weights={
                        "kind": "geometric",
                        "c": 0.5,
                        "r": 0.5
                    },
                    accumulation=0.0)
    m = validate_measure(SignedMeasureSpec(atom_rules=[rule]))

    recovered = measure_density_roundtrip(density_of(m))

    (fitted,) = recovered.infinite_rules
    assert fitted.weights.kind == "geometric"
    assert fitted.weights.c == pytest.approx(0.5, rel=1e-8)
    assert fitted.weights.r == pytest.approx(0.5, rel=1e-8)
    assert recovered.density_pieces == ()


def test_roundtrip_without_continuous_part() -> None:
    m = validate_measure(
        SignedMeasureSpec(atoms=[
            AtomSpec(location=-1.0, weight=-0.4),
            AtomSpec(location=2.0, weight=0.6)
        ]))

    recovered = measure_density_roundtrip(density_of(m))

    assert recovered.density_pieces == ()
    np.testing.assert_allclose(recovered.atom_weights, [-0.4, 0.6],
                               rtol=0,
                               atol=1e-10)


def test_roundtrip_recovers_exponential_drift() -> None:
    m = validate_measure(
        SignedMeasureSpec(density_pieces=[
            DensityPiece(lo=0,
                         hi=2,
                         sign=-1,
                         expression={
                             "kind": "exponential",
                             "c": 0.2,
                             "q": 1.5
                         })
        ]))

    (piece,) = measure_density_roundtrip(density_of(m)).density_pieces

    assert (piece.lo, piece.hi, piece.sign) == (0.0, 2.0, -1)
    assert piece.expression.kind == "exponential"
    assert piece.expression.c == pytest.approx(0.2, rel=1e-6)
    assert piece.expression.q == pytest.approx(1.5, rel=1e-6)

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

import pytest

from skewbm.analysis.atom_rules import AtomRule
from skewbm.analysis.errors import NotABarrier
from skewbm.analysis.measure import (
    AtomSpec,
    DensityPiece,
    SignedMeasureSpec,
    validate_measure,
)
from skewbm.structure.barriers import classify_barrier, classify_barriers
from skewbm.structure.existence import analyze_structure


def log_singular(alpha: float) -> SignedMeasureSpec:
    """δ₀ plus −α/(2|z|)dz on the negative half-line, so that ϱ ≍ |z|^α
    left of the barrier."""
    return SignedMeasureSpec(
        atoms=[AtomSpec(location=0.0, weight=1.0)],
        density_pieces=[
            DensityPiece(lo=float("-inf"),
                         hi=0.0,
                         sign=-1 if alpha > 0 else 1,
                         expression={
                             "kind": "power",
                             "c": abs(alpha) / 2,
                             "p": -1
                         })
        ])


def oscillating_atoms() -> SignedMeasureSpec:
    """Unit atom at 0 with alternating atoms of weight ±k/(k+2) from the
    left."""
    plus = AtomRule(name="plus",
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
    minus = AtomRule(name="minus",
                     locations={
                         "kind": "reciprocal",
                         "scale": -1,
                         "p": 2,
                         "q": 1
                     },
                     weights={
                         "kind": "rational_linear",
                         "c": -1,
                         "v": 2
                     },
                     accumulation=0.0)
    return SignedMeasureSpec(atoms=[AtomSpec(location=0.0, weight=1.0)],
                             atom_rules=[plus, minus])


def telescoping_atoms(alpha: float) -> SignedMeasureSpec:
    """Atoms whose factors multiply to ϱ ≍ |z|^α left of 0."""
    plus = AtomRule(name="plus",
                    locations={
                        "kind": "reciprocal",
                        "scale": -1,
                        "p": 2
                    },
                    weights={
                        "kind": "ratio_power",
                        "u": 1,
                        "v": 0,
                        "gamma": alpha,
                        "sign": 1
                    },
                    accumulation=0.0)
    minus = AtomRule(name="minus",
                     locations={
                         "kind": "reciprocal",
                         "scale": -1,
                         "p": 2,
                         "q": 1
                     },
                     weights={
                         "kind": "ratio_power",
                         "u": 1,
                         "v": 0,
                         "gamma": 2 * alpha,
                         "sign": -1
                     },
                     accumulation=0.0)
    return SignedMeasureSpec(atoms=[AtomSpec(location=0.0, weight=1.0)],
                             atom_rules=[plus, minus])


def label(spec: SignedMeasureSpec, z: float = 0.0) -> str:
    m = validate_measure(spec)
    analysis = analyze_structure(m)
    return classify_barrier(m, analysis.decomposition, analysis.profiles,
                            z).label


@pytest.mark.parametrize("alpha,expected", [
    (-1.0, "nonsensical"),
    (0.5, "pseudo"),
    (1.0, "real"),
    (1.5, "real"),
])
def test_log_singularity_labels(alpha: float, expected: str) -> None:
    assert label(log_singular(alpha)) == expected


def test_barrier_inside_g_is_nonsensical() -> None:
    m = validate_measure(
        SignedMeasureSpec(atoms=[AtomSpec(location=0.0, weight=1.0)]))
    analysis = analyze_structure(m)

    classification = classify_barriers(m, analysis.decomposition,
                                       analysis.profiles)

    assert classification.nonsensical == [0.0]
    entry = classification.entries[0]
    assert entry.side == "right"
    assert "inside an interval" in entry.evidence.notes[0]


def test_left_barrier_mirrors_right_barrier() -> None:
    m = validate_measure(
        SignedMeasureSpec(atoms=[AtomSpec(location=0.0, weight=-1.0)],
                          density_pieces=[
                              DensityPiece(lo=0.0,
                                           hi=float("inf"),
                                           sign=1,
                                           expression={
                                               "kind": "power",
                                               "c": 0.75,
                                               "p": -1
                                           })
                          ]))
    analysis = analyze_structure(m)

    entry = classify_barrier(m, analysis.decomposition, analysis.profiles,
                             0.0)

    # ϱ ≍ z^1.5 right of 0, so ∫1/ϱ diverges there.
    assert entry.side == "left"
    assert entry.label == "real"


@pytest.mark.slow
def test_oscillating_atoms_are_nonsensical() -> None:
    assert label(oscillating_atoms()) == "nonsensical"


@pytest.mark.slow
@pytest.mark.parametrize("alpha,expected", [(1.0, "real"), (0.5, "pseudo")])
def test_telescoping_atoms(alpha: float, expected: str) -> None:
    assert label(telescoping_atoms(alpha)) == expected


def test_not_a_barrier() -> None:
    m = validate_measure(
        SignedMeasureSpec(atoms=[AtomSpec(location=0.0, weight=0.5)]))
    analysis = analyze_structure(m)

    with pytest.raises(NotABarrier):
        classify_barrier(m, analysis.decomposition, analysis.profiles, 0.0)

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

from skewbm.analysis.atom_rules import (
    AtomRule,
    ConstantWeights,
    GeometricWeights,
    PowerWeights,
    TailCertificate,
    check_tail_certificate,
    derive_tail,
)
from skewbm.analysis.decomposition import locally_finite_decomposition
from skewbm.analysis.errors import (
    InconsistentTailCertificate,
    UndecidableLocalFiniteness,
)
from skewbm.analysis.measure import SignedMeasureSpec, validate_measure
from skewbm.analysis.quadrature import extrapolated_sum, ratio_verdict


def test_radon_measure_gives_the_whole_line() -> None:
    m = validate_measure(SignedMeasureSpec(atoms=[{
        "location": 0,
        "weight": 0.5
    }]))

    d = locally_finite_decomposition(m)

    assert len(d) == 1
    assert d.interval(0) == (-math.inf, math.inf, 0.0)


def test_log_singularity_splits_the_line() -> None:
    m = validate_measure(
        SignedMeasureSpec(atoms=[{
            "location": 0,
            "weight": 1
        }],
                          density_pieces=[{
                              "lo": -math.inf,
                              "hi": 0,
                              "sign": -1,
                              "expression": {
                                  "kind": "power",
                                  "c": 0.25,
                                  "p": -1
                              },
                          }]))

    d = locally_finite_decomposition(m)

    assert len(d) == 2
    assert d.interval(0) == (-math.inf, 0.0, -1.0)
    assert d.interval(1) == (0.0, math.inf, 1.0)
    assert d.locate(-0.5) == 0
    assert d.locate(0.0) is None


def test_declared_region_is_removed() -> None:
    m = validate_measure(
        SignedMeasureSpec(declared_infinite_regions=[{
            "lo": 1,
            "hi": 2
        }]))

    d = locally_finite_decomposition(m)

    assert d.lower.tolist() == [-math.inf, 2.0]
    assert d.upper.tolist() == [1.0, math.inf]
    assert d.reference.tolist() == [0.0, 3.0]


def test_divergent_rule_needs_accumulation_point() -> None:
    rule = AtomRule(name="slow",
                    locations={
                        "kind": "reciprocal",
                        "scale": 1
                    },
                    weights={
                        "kind": "constant",
                        "c": 0.1
                    })
    m = validate_measure(SignedMeasureSpec(atom_rules=[rule]))

    with pytest.raises(UndecidableLocalFiniteness):
        locally_finite_decomposition(m)


def test_summable_rule_keeps_g_whole() -> None:
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

    assert len(locally_finite_decomposition(m)) == 1


def test_derived_tails() -> None:
    assert derive_tail(PowerWeights(c=0.5, p=2)).kind == "summable"
    assert derive_tail(PowerWeights(c=0.5, p=1)).kind == "divergent"
    assert derive_tail(GeometricWeights(c=-2, r=0.5)).ratio == 0.5
    assert derive_tail(ConstantWeights(c=0)).bound == 0.0


def test_certificate_contradicting_weights() -> None:
    rule = AtomRule(name="liar",
                    locations={
                        "kind": "reciprocal",
                        "scale": 1
                    },
                    weights={
                        "kind": "power",
                        "c": 0.5,
                        "p": 2
                    },
                    accumulation=0.0,
                    tail=TailCertificate(kind="summable",
                                         bound=0.1,
                                         exponent=2))

    with pytest.raises(InconsistentTailCertificate):
        check_tail_certificate(rule)


def test_ratio_verdict() -> None:
    k = np.arange(1, 60, dtype=np.float64)

    assert ratio_verdict(0.5**k) is True
    assert ratio_verdict(np.ones_like(k)) is False
    assert ratio_verdict(np.array([1.0, 0.5])) is None
    assert extrapolated_sum(0.5**k[:30]) == pytest.approx(1.0, rel=1e-12)

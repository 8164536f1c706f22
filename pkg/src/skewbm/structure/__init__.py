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
"""Barriers, existence and uniqueness, gluing and the density side."""

from skewbm.structure.barriers import BarrierClassification
from skewbm.structure.barriers import classify_barrier
from skewbm.structure.barriers import classify_barriers
from skewbm.structure.connection import ConstantChoice
from skewbm.structure.connection import construct_constants
from skewbm.structure.connection import decide_scale_connectable
from skewbm.structure.conservative import ConservativeReport
from skewbm.structure.conservative import check_conservative
from skewbm.structure.existence import ExistenceReport
from skewbm.structure.existence import StructureAnalysis
from skewbm.structure.existence import analyze_structure
from skewbm.structure.existence import check_existence_conditions
from skewbm.structure.existence import check_uniqueness_irreducibility
from skewbm.structure.raw_density import JumpRule
from skewbm.structure.raw_density import RawDensity
from skewbm.structure.raw_density import density_to_effective_intervals
from skewbm.structure.raw_density import scale_function
from skewbm.structure.semimartingale import SemimartingaleReport
from skewbm.structure.semimartingale import local_time_from_pcaf
from skewbm.structure.semimartingale import measure_density_roundtrip
from skewbm.structure.semimartingale import measure_from_density
from skewbm.structure.semimartingale import semimartingale_verdict
from skewbm.structure.skew_density import EffectiveIntervalSet
from skewbm.structure.skew_density import ScaleFunction
from skewbm.structure.skew_density import SkewDensity
from skewbm.structure.skew_density import glue_effective_intervals

__all__ = [
    "BarrierClassification",
    "ConservativeReport",
    "ConstantChoice",
    "EffectiveIntervalSet",
    "ExistenceReport",
    "JumpRule",
    "RawDensity",
    "ScaleFunction",
    "SemimartingaleReport",
    "SkewDensity",
    "StructureAnalysis",
    "analyze_structure",
    "check_conservative",
    "check_existence_conditions",
    "check_uniqueness_irreducibility",
    "classify_barrier",
    "classify_barriers",
    "construct_constants",
    "decide_scale_connectable",
    "density_to_effective_intervals",
    "glue_effective_intervals",
    "local_time_from_pcaf",
    "measure_density_roundtrip",
    "measure_from_density",
    "scale_function",
    "semimartingale_verdict",
]

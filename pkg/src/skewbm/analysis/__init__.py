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
"""Signed measures, their interval decomposition and the profiles ϱ."""

from skewbm.analysis.atom_rules import AtomRule
from skewbm.analysis.atom_rules import TailCertificate
from skewbm.analysis.decomposition import IntervalDecomposition
from skewbm.analysis.decomposition import locally_finite_decomposition
from skewbm.analysis.expressions import Piece
from skewbm.analysis.extended_real import ExtendedReal
from skewbm.analysis.gaps import CantorSpec
from skewbm.analysis.gaps import GapTail
from skewbm.analysis.gaps import MaterializedGaps
from skewbm.analysis.measure import AtomSpec
from skewbm.analysis.measure import CheckedMeasure
from skewbm.analysis.measure import DensityPiece
from skewbm.analysis.measure import Region
from skewbm.analysis.measure import SignedMeasureSpec
from skewbm.analysis.measure import atom_at
from skewbm.analysis.measure import mass_on_interval
from skewbm.analysis.measure import validate_measure
from skewbm.analysis.profile import DensityProfile
from skewbm.analysis.profile import IntervalStats
from skewbm.analysis.profile import ProfileOptions
from skewbm.analysis.profile import StatsTable
from skewbm.analysis.profile import build_profile
from skewbm.analysis.profile import bv_certificate
from skewbm.analysis.profile import endpoint_limit
from skewbm.analysis.profile import eval_density
from skewbm.analysis.profile import integral_stats
from skewbm.analysis.profile import profiles_and_stats

__all__ = [
    "AtomRule",
    "AtomSpec",
    "CantorSpec",
    "CheckedMeasure",
    "DensityPiece",
    "DensityProfile",
    "ExtendedReal",
    "GapTail",
    "IntervalDecomposition",
    "IntervalStats",
    "MaterializedGaps",
    "Piece",
    "ProfileOptions",
    "Region",
    "SignedMeasureSpec",
    "StatsTable",
    "TailCertificate",
    "atom_at",
    "build_profile",
    "bv_certificate",
    "endpoint_limit",
    "eval_density",
    "integral_stats",
    "locally_finite_decomposition",
    "mass_on_interval",
    "profiles_and_stats",
    "validate_measure",
]

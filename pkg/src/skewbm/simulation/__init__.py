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
"""Monte Carlo simulation of skew Brownian motions."""

from skewbm.simulation.ensemble import PathEnsemble
from skewbm.simulation.ensemble import SimulationOptions
from skewbm.simulation.ensemble import simulate_grid_walk
from skewbm.simulation.ensemble import simulate_paths
from skewbm.simulation.estimators import DriftReport
from skewbm.simulation.estimators import LocalTimeEstimate
from skewbm.simulation.estimators import drift_consistency_check
from skewbm.simulation.estimators import estimate_local_time
from skewbm.simulation.estimators import estimate_occupation
from skewbm.simulation.estimators import one_sided_occupation
from skewbm.simulation.export import write_paths
from skewbm.simulation.export import write_statistics
from skewbm.simulation.natural_scale import NaturalScaleTransform
from skewbm.simulation.natural_scale import natural_scale

__all__ = [
    "DriftReport",
    "LocalTimeEstimate",
    "NaturalScaleTransform",
    "PathEnsemble",
    "SimulationOptions",
    "drift_consistency_check",
    "estimate_local_time",
    "estimate_occupation",
    "natural_scale",
    "one_sided_occupation",
    "simulate_grid_walk",
    "simulate_paths",
    "write_paths",
    "write_statistics",
]

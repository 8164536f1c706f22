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
"""Type aliases shared across the package."""

from typing import Literal

import numpy as np
import numpy.typing as npt
from typing_extensions import TypeAlias

# Vectorized real arguments and results.
FloatArrayT: TypeAlias = npt.NDArray[np.float64]

# How a finiteness statement was obtained. Certified verdicts come from
# closed-form tail tests or rule metadata, numeric ones from heuristics.
ConfidenceT: TypeAlias = Literal["certified", "numeric"]

# Which part of a signed measure is measured.
MassVariantT: TypeAlias = Literal["total", "plus", "minus"]

# One-sided evaluation of a cadlag function.
SideT: TypeAlias = Literal["right", "left"]

# Interval endpoints, a is the left one.
EndpointT: TypeAlias = Literal["a", "b"]

# Halves of an interval split at its reference point.
HalfT: TypeAlias = Literal["left", "right"]

# Labels of points carrying a unit atom.
BarrierLabelT: TypeAlias = Literal["real", "pseudo", "nonsensical", "unknown"]

# A right barrier belongs to Ξ⁺ (weight +1), a left one to Ξ⁻ (weight -1).
BarrierSideT: TypeAlias = Literal["right", "left"]

# Verdicts in reports are never plain booleans.
TriStateT: TypeAlias = Literal["true", "false", "unknown"]

# Limit of the profile at an endpoint.
LimitKindT: TypeAlias = Literal["positive", "zero", "diverges", "unknown"]

# Bounded variation of a profile on a closed half.
BVKindT: TypeAlias = Literal["bv", "not_bv", "unknown"]

# Feasibility of gluing two intervals.
ConnectionT: TypeAlias = Literal["connectable", "not_connectable", "unknown"]

# Strategy for choosing the constants c_n.
ConstantsTargetT: TypeAlias = Literal["any_valid", "maximally_glued"]

# Cantor gap lengths.
GapModelT: TypeAlias = Literal["middle_proportion", "power_law"]

# Regime of a Cantor measure.
CantorVerdictT: TypeAlias = Literal["unique", "infinitely_many_irreducible",
                                    "unknown"]

# Simulation schemes.
SchemeT: TypeAlias = Literal["euler_natural_scale", "grid_walk"]

# Closed-form expression families.
ExpressionKindT: TypeAlias = Literal["constant", "power", "exponential",
                                     "exp_power"]


def tri_state(value: bool | None) -> TriStateT:
    """Convert an optional boolean into a report verdict.

    Args:

      value (bool | None): The verdict, `None` meaning undecided.
    """
    if value is None:
        return "unknown"
    return "true" if value else "false"

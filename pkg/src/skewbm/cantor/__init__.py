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
"""Generalized Cantor constructions."""

from skewbm.cantor.models import CantorReport
from skewbm.cantor.models import beta_range
from skewbm.cantor.models import cantor_constants
from skewbm.cantor.models import cantor_verdict
from skewbm.cantor.models import generate_cantor

__all__ = [
    "CantorReport",
    "beta_range",
    "cantor_constants",
    "cantor_verdict",
    "generate_cantor",
]

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
"""Errors raised only by the simulation code."""


class StepTooCoarse(ValueError):
    """The time step is too large for the natural-scale image."""

    def __init__(self, dt: float, diameter: float) -> None:
        """Represents a step dt > (diameter / 100)².

        Args:

          dt (float): The requested step.

          diameter (float): Length of the image of the interval under the
          natural scale.
        """
        super().__init__(f"Step dt = {dt} is too coarse for a natural-scale "
                         f"image of length {diameter}, use at most "
                         f"{(diameter / 100)**2}")
        self.dt = dt
        self.diameter = diameter


class AtomOffGrid(ValueError):
    """An atom is not a point of the random walk grid."""

    def __init__(self, location: float, spacing: float) -> None:
        """Represents an atom between grid points.

        Args:

          location (float): The atom.

          spacing (float): Grid spacing.
        """
        super().__init__(f"Atom at {location} is not on the grid of spacing "
                         f"{spacing}")
        self.location = location
        self.spacing = spacing


class WindowTooNarrow(ValueError):
    """A local time window is not wider than the step resolution."""

    def __init__(self, epsilon: float, resolution: float) -> None:
        """Represents a window ε below the resolution √dt.

        Args:

          epsilon (float): Half width of the window.

          resolution (float): √dt of the scheme.
        """
        super().__init__(f"Window ε = {epsilon} is narrower than the "
                         f"resolution {resolution}")
        self.epsilon = epsilon
        self.resolution = resolution

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
"""Errors raised while validating measures and deciding their structure.

Values that are merely undecided are not errors: they are reported as unknown
verdicts. The exceptions below signal inputs outside the admissible class or
operations that cannot be carried out on the given object.
"""

from collections.abc import Sequence


class AtomMagnitudeError(ValueError):
    """An atom has weight of absolute value larger than one."""

    def __init__(self, location: float, weight: float) -> None:
        """Represents an atom violating |μ({z})| ≤ 1.

        Args:

          location (float): Position of the atom.

          weight (float): The offending weight.
        """
        super().__init__(f"Atom at {location} has weight {weight}, the "
                         f"absolute value of an atom may not exceed 1.")
        self.location = location
        self.weight = weight


class DuplicateAtomError(ValueError):
    """Two atoms (explicit or generated) share a location."""

    def __init__(self, location: float) -> None:
        """Represents a repeated atom location.

        Args:

          location (float): The repeated location.
        """
        super().__init__(f"More than one atom is placed at {location}.")
        self.location = location


class InconsistentTailCertificate(ValueError):
    """A declared tail certificate contradicts its generator rule."""

    def __init__(self, rule_name: str, reason: str) -> None:
        """Represents a tail certificate which does not hold.

        Args:

          rule_name (str): Name of the atom rule.

          reason (str): Human readable explanation.
        """
        super().__init__(f"Tail certificate of rule {rule_name!r} is "
                         f"inconsistent: {reason}")
        self.rule_name = rule_name
        self.reason = reason


class UndecidableLocalFiniteness(ValueError):
    """Local finiteness of |μ| cannot be decided from the rule metadata."""

    def __init__(self, rule_name: str, reason: str) -> None:
        """Represents a rule lacking accumulation or tail metadata.

        Args:

          rule_name (str): Name of the atom rule.

          reason (str): What is missing.
        """
        super().__init__(f"Cannot decide local finiteness for rule "
                         f"{rule_name!r}: {reason}")
        self.rule_name = rule_name
        self.reason = reason


class AtomOnBoundary(ValueError):
    """A barrier atom (weight ±1) lies inside an interval used for a profile."""

    def __init__(self, location: float, interval: tuple[float, float]) -> None:
        """Represents a unit atom inside the open interval of a profile.

        Args:

          location (float): Position of the unit atom.

          interval (tuple[float, float]): The open interval (a, b).
        """
        super().__init__(f"Atom of weight ±1 at {location} lies inside "
                         f"{interval}, profiles need |μ_z| < 1.")
        self.location = location
        self.interval = interval


class NonRadonError(ValueError):
    """|μ| is not Radon on the open interval of a profile."""

    def __init__(self, interval: tuple[float, float], reason: str) -> None:
        """Represents a request to build a profile where |μ| is not Radon.

        Args:

          interval (tuple[float, float]): The open interval (a, b).

          reason (str): Which part of the measure is not locally finite.
        """
        super().__init__(f"|μ| is not Radon on {interval}: {reason}")
        self.interval = interval
        self.reason = reason


class OutOfInterval(ValueError):
    """Evaluation point outside of the interval of a profile."""

    def __init__(self, z: float, interval: tuple[float, float]) -> None:
        """Represents evaluating a profile outside of its interval.

        Args:

          z (float): The evaluation point.

          interval (tuple[float, float]): The open interval (a, b).
        """
        super().__init__(f"Point {z} is outside of the interval {interval}.")
        self.z = z
        self.interval = interval


class NotABarrier(LookupError):
    """The point asked to classify carries no atom of weight ±1."""

    def __init__(self, z: float, weight: float) -> None:
        """Represents a classification request for a non-barrier.

        Args:

          z (float): The point.

          weight (float): μ({z}) at the point.
        """
        super().__init__(f"{z} is not a barrier, μ({{{z}}}) = {weight}.")
        self.z = z
        self.weight = weight


class ConditionsNotMet(ValueError):
    """Existence conditions fail, so no constants can be constructed."""

    def __init__(self, failed: Sequence[str]) -> None:
        """Represents a construction request for a measure without solutions.

        Args:

          failed (Sequence[str]): Names of the failing conditions.
        """
        super().__init__(f"Existence conditions not met: {', '.join(failed)}")
        self.failed = tuple(failed)


class NotBoundedVariation(ValueError):
    """A density is not locally of bounded variation where it must be."""

    def __init__(self, where: str) -> None:
        """Represents a density failing local bounded variation.

        Args:

          where (str): Description of the effective interval.
        """
        super().__init__(f"Density is not locally of bounded variation on "
                         f"{where}.")
        self.where = where


class RoundTripMismatch(ValueError):
    """The measure read off a density does not fit any closed form, or
    disagrees with what the density shows."""

    def __init__(self, where: str, reason: str) -> None:
        """Represents a failed recovery of μ from ρ.

        Args:

          where (str): The stretch or atom family concerned.

          reason (str): What does not match.
        """
        super().__init__(f"Cannot recover μ on {where}: {reason}")
        self.where = where
        self.reason = reason


class AssumptionAViolated(ValueError):
    """A raw density does not vanish almost everywhere on its singular set or
    is not locally integrable."""

    def __init__(self, reason: str) -> None:
        """Represents an inadmissible raw density.

        Args:

          reason (str): Description of the violation.
        """
        super().__init__(f"Density violates assumption (A): {reason}")
        self.reason = reason


class DepthOverflow(OverflowError):
    """The requested Cantor depth cannot be generated."""

    def __init__(self, depth: int, reason: str) -> None:
        """Represents a Cantor construction which cannot reach `depth`.

        Args:

          depth (int): The requested depth.

          reason (str): Why the level cannot be generated.
        """
        super().__init__(f"Cannot generate Cantor set to depth {depth}: "
                         f"{reason}")
        self.depth = depth
        self.reason = reason


class BetaOutOfRange(ValueError):
    """The witness parameter β lies outside of its feasible range."""

    def __init__(self, beta: float, lower: float, upper: float) -> None:
        """Represents an infeasible β.

        Args:

          beta (float): The requested β.

          lower (float): Exclusive lower bound 2r.

          upper (float): Exclusive upper bound 1/2.
        """
        super().__init__(f"β = {beta} is not in the open interval "
                         f"({lower}, {upper}).")
        self.beta = beta
        self.lower = lower
        self.upper = upper


class SpecFileError(ValueError):
    """A spec file cannot be read or does not describe a valid input."""

    def __init__(self, path: str, location: str, reason: str) -> None:
        """Represents an invalid spec file.

        Args:

          path (str): The file.

          location (str): "line L, column C" for syntax errors, the dotted
          field path for invalid values.

          reason (str): What is wrong.
        """
        super().__init__(f"{path}: {location}: {reason}")
        self.path = path
        self.location = location
        self.reason = reason

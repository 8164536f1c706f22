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
"""Nonnegative extended reals carrying how they were obtained."""

from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, field_validator
from typing_extensions import Self

from skewbm.analysis.types import ConfidenceT


def weakest(*confidences: ConfidenceT) -> ConfidenceT:
    """The weakest of several confidence flags ("numeric" wins)."""
    if "numeric" in confidences:
        return "numeric"
    return "certified"


class ExtendedReal(BaseModel):
    """A value in [0, +∞] or an unknown, e.g., |μ|(J) or ∫ϱ over a half.

    Attributes:

      kind (Literal["finite", "infinite", "unknown"]): Which case.

      value (float | None): The value when finite.

      confidence (ConfidenceT): "certified" when obtained from closed forms or
      rule metadata, "numeric" when from a heuristic.
    """
    model_config = ConfigDict(frozen=True)

    kind: Literal["finite", "infinite", "unknown"]
    value: float | None = None
    confidence: ConfidenceT = "certified"

    @field_validator("value")
    @classmethod
    def value_nonnegative(cls, v: float | None) -> float | None:
        if v is not None and (math.isnan(v) or v < 0):
            raise ValueError(f"Extended reals here are nonnegative, got {v}")
        return v

    @classmethod
    def finite(cls, value: float, confidence: ConfidenceT = "certified") -> Self:
        if math.isinf(value):
            return cls(kind="infinite", confidence=confidence)
        return cls(kind="finite", value=float(value), confidence=confidence)

    @classmethod
    def infinite(cls, confidence: ConfidenceT = "certified") -> Self:
        return cls(kind="infinite", confidence=confidence)

    @classmethod
    def unknown(cls) -> Self:
        return cls(kind="unknown", confidence="numeric")

    @classmethod
    def zero(cls) -> Self:
        return cls(kind="finite", value=0.0)

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def is_infinite(self) -> bool:
        return self.kind == "infinite"

    @property
    def is_unknown(self) -> bool:
        return self.kind == "unknown"

    def as_float(self) -> float:
        """The value as a float: `inf` when infinite and `nan` when unknown."""
        match self.kind:
            case "finite":
                assert self.value is not None
                return self.value
            case "infinite":
                return math.inf
            case _:
                return math.nan

    def finiteness(self) -> bool | None:
        """`True` when finite, `False` when infinite, `None` when unknown."""
        if self.is_unknown:
            return None
        return self.is_finite

    def scaled(self, factor: float) -> ExtendedReal:
        """Multiply by a positive constant."""
        if factor <= 0:
            raise ValueError(f"Scaling factor must be positive, got {factor}")
        if not self.is_finite:
            return self
        return ExtendedReal.finite(self.as_float() * factor, self.confidence)

    def downgraded(self) -> ExtendedReal:
        """The same value flagged as numeric."""
        return self.model_copy(update={"confidence": "numeric"})

    def __add__(self, other: ExtendedReal) -> ExtendedReal:
        confidence = weakest(self.confidence, other.confidence)
        for term in (self, other):
            if term.is_infinite and term.confidence == "certified":
                return ExtendedReal.infinite("certified")
        if self.is_infinite or other.is_infinite:
            return ExtendedReal.infinite("numeric")
        if self.is_unknown or other.is_unknown:
            return ExtendedReal.unknown()
        return ExtendedReal.finite(self.as_float() + other.as_float(),
                                   confidence)

    def __str__(self) -> str:
        match self.kind:
            case "finite":
                text = f"{self.as_float():.6g}"
            case "infinite":
                text = "+inf"
            case _:
                text = "unknown"
        if self.confidence == "numeric" and not self.is_unknown:
            text += " (numeric)"
        return text


def extended_sum(terms: list[ExtendedReal]) -> ExtendedReal:
    """Sum of nonnegative extended reals, empty sum being zero."""
    total = ExtendedReal.zero()
    for term in terms:
        total = total + term
    return total

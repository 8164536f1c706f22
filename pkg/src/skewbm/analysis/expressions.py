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
"""Closed-form expression families for measure densities and raw speed
densities.

Every family is nonnegative. Signs of measure densities are carried by the
piece using the expression.
"""

from __future__ import annotations

from fractions import Fraction
import math
from typing import Annotated, Any, Literal, Union

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field
from pydantic import PlainSerializer
from pydantic import ValidationInfo, field_validator
from scipy import integrate

from skewbm.analysis.types import FloatArrayT


def parse_real(value: Any) -> Any:
    """Accept rational strings "p/q" in addition to what pydantic accepts."""
    if isinstance(value, str) and "/" in value:
        return float(Fraction(value.replace(" ", "")))
    if isinstance(value, str) and value.strip().lstrip("+-") == "inf":
        return float(value)
    if isinstance(value, Fraction):
        return float(value)
    return value


def dump_real(value: float) -> float | str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


# A float which may be written as "p/q", "inf" or "-inf" in spec files and
# reports.
Real = Annotated[float,
                 BeforeValidator(parse_real),
                 PlainSerializer(dump_real, when_used="json")]


class _ExpressionBase(BaseModel):
    model_config = ConfigDict(frozen=True)

    def value(self, x: FloatArrayT) -> FloatArrayT:
        """Evaluate the expression at each point of `x`."""
        raise NotImplementedError

    def log_value(self, x: FloatArrayT) -> FloatArrayT:
        """Natural logarithm of `value`, `-inf` where it vanishes."""
        with np.errstate(divide="ignore"):
            return np.log(self.value(x))

    def derivative(self, x: FloatArrayT) -> FloatArrayT:
        """Pointwise derivative (away from singular points)."""
        raise NotImplementedError

    def antiderivative(self, x: FloatArrayT) -> FloatArrayT | None:
        """A primitive valid on each side of `singular_point`, or `None` when
        the family has no closed-form primitive."""
        return None

    @property
    def singular_point(self) -> float | None:
        """A point at which the expression is not smooth, if any."""
        return None

    def integral(self, lo: float, hi: float) -> float:
        """∫_lo^hi of the expression for lo ≤ hi, possibly `inf`.

        Uses the closed-form primitive when available, adaptive quadrature
        otherwise. Intervals containing the singular point are split there.
        """
        if hi <= lo or getattr(self, "c", 1.0) == 0:
            return 0.0
        x0 = self.singular_point
        if x0 is not None and lo < x0 < hi:
            return self.integral(lo, x0) + self.integral(x0, hi)
        primitive = self.antiderivative(np.array([lo, hi], dtype=np.float64))
        if primitive is not None:
            with np.errstate(invalid="ignore"):
                total = float(primitive[1] - primitive[0])
            if math.isnan(total) or math.isinf(total):
                return math.inf
            return total
        total, _ = integrate.quad(lambda t: float(self.value(np.array([t]))[0]),
                                  lo,
                                  hi,
                                  limit=200)
        return float(total)


class ConstantExpr(_ExpressionBase):
    """c on the whole piece."""
    kind: Literal["constant"] = "constant"
    c: Real = Field(ge=0)

    def value(self, x: FloatArrayT) -> FloatArrayT:
        return np.full_like(np.asarray(x, dtype=np.float64), self.c)

    def derivative(self, x: FloatArrayT) -> FloatArrayT:
        return np.zeros_like(np.asarray(x, dtype=np.float64))

    def antiderivative(self, x: FloatArrayT) -> FloatArrayT | None:
        return self.c * np.asarray(x, dtype=np.float64)


class PowerExpr(_ExpressionBase):
    """c·|x − x0|^p."""
    kind: Literal["power"] = "power"
    c: Real = Field(ge=0)
    x0: Real = 0.0
    p: Real

    def value(self, x: FloatArrayT) -> FloatArrayT:
        distance = np.abs(np.asarray(x, dtype=np.float64) - self.x0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.c * distance**self.p

    def log_value(self, x: FloatArrayT) -> FloatArrayT:
        distance = np.abs(np.asarray(x, dtype=np.float64) - self.x0)
        if self.c == 0:
            return np.full_like(distance, -np.inf)
        with np.errstate(divide="ignore"):
            return math.log(self.c) + self.p * np.log(distance)

    def derivative(self, x: FloatArrayT) -> FloatArrayT:
        shifted = np.asarray(x, dtype=np.float64) - self.x0
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.c * self.p * np.sign(shifted) * np.abs(shifted)**(
                self.p - 1)

    def antiderivative(self, x: FloatArrayT) -> FloatArrayT | None:
        shifted = np.asarray(x, dtype=np.float64) - self.x0
        side = np.where(shifted >= 0, 1.0, -1.0)
        distance = np.abs(shifted)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.p == -1:
                return side * self.c * np.log(distance)
            return side * self.c * distance**(self.p + 1) / (self.p + 1)

    @property
    def singular_point(self) -> float | None:
        return self.x0

    @property
    def locally_integrable(self) -> bool:
        """Whether the expression is integrable near x0."""
        return self.c == 0 or self.p > -1


class ExponentialExpr(_ExpressionBase):
    """c·e^{qx}."""
    kind: Literal["exponential"] = "exponential"
    c: Real = Field(ge=0)
    q: Real

    def value(self, x: FloatArrayT) -> FloatArrayT:
        with np.errstate(over="ignore"):
            return self.c * np.exp(self.q * np.asarray(x, dtype=np.float64))

    def log_value(self, x: FloatArrayT) -> FloatArrayT:
        x = np.asarray(x, dtype=np.float64)
        if self.c == 0:
            return np.full_like(x, -np.inf)
        return math.log(self.c) + self.q * x

    def derivative(self, x: FloatArrayT) -> FloatArrayT:
        return self.q * self.value(x)

    def antiderivative(self, x: FloatArrayT) -> FloatArrayT | None:
        if self.q == 0:
            return self.c * np.asarray(x, dtype=np.float64)
        return self.value(x) / self.q


class ExpPowerExpr(_ExpressionBase):
    """c·exp(q·|x − x0|^p), used for raw speed densities."""
    kind: Literal["exp_power"] = "exp_power"
    c: Real = Field(gt=0)
    q: Real
    x0: Real = 0.0
    p: Real = Field(gt=0)

    def log_value(self, x: FloatArrayT) -> FloatArrayT:
        distance = np.abs(np.asarray(x, dtype=np.float64) - self.x0)
        return math.log(self.c) + self.q * distance**self.p

    def value(self, x: FloatArrayT) -> FloatArrayT:
        with np.errstate(over="ignore"):
            return np.exp(self.log_value(x))

    def log_derivative(self, x: FloatArrayT) -> FloatArrayT:
        """Derivative of `log_value`."""
        shifted = np.asarray(x, dtype=np.float64) - self.x0
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.q * self.p * np.sign(shifted) * np.abs(shifted)**(
                self.p - 1)

    def derivative(self, x: FloatArrayT) -> FloatArrayT:
        return self.value(x) * self.log_derivative(x)

    @property
    def singular_point(self) -> float | None:
        return self.x0 if self.p < 1 else None


# Union of all closed-form families, discriminated by `kind`.
Expression = Annotated[Union[ConstantExpr, PowerExpr, ExponentialExpr,
                             ExpPowerExpr],
                       Field(discriminator="kind")]


# Largest relative deviation accepted by `fit_expression`.
FIT_TOLERANCE: float = 1e-6


def _fits(expression: _ExpressionBase, x: FloatArrayT, magnitude: FloatArrayT,
          slack: FloatArrayT) -> bool:
    with np.errstate(over="ignore", invalid="ignore"):
        error = np.abs(expression.value(x) - magnitude)
    return bool(np.all(np.isfinite(error)) and np.all(error <= slack))


def fit_expression(
        x: FloatArrayT,
        y: FloatArrayT,
        centers: tuple[float, ...] = (),
        tolerance: float = FIT_TOLERANCE,
        noise: FloatArrayT | None = None) -> tuple[int, Expression] | None:
    """Identify y = sign·f(x) with f constant, exponential or a power
    centred at one of `centers`.

    Candidates are tried in that order and the first one reproducing every
    sample within `tolerance` (relative) plus its noise is returned.
    Exponents and coefficients come from least squares on log |y|, with
    noisy samples down-weighted.

    Args:

      x (FloatArrayT): Sample points, at least three.

      y (FloatArrayT): Samples, all of one sign.

      centers (tuple[float, ...]): Admissible x0 of power candidates.

      tolerance (float): Largest relative deviation at any sample.

      noise (FloatArrayT | None): Absolute error bound of every sample,
      zero when `None`.

    Returns: (sign, f), or `None` when no candidate fits.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    noise = (np.zeros_like(y)
             if noise is None else np.asarray(noise, dtype=np.float64))
    # Samples within their noise of zero carry no sign.
    kept = np.isfinite(x) & np.isfinite(y) & (np.abs(y) > noise)
    x, y, noise = x[kept], y[kept], noise[kept]
    if len(x) < 3:
        return None
    if np.all(y > 0):
        sign = 1
    elif np.all(y < 0):
        sign = -1
    else:
        return None
    magnitude = np.abs(y)
    log_magnitude = np.log(magnitude)
    weights = magnitude / (magnitude + noise)
    candidates: list[Expression] = [ConstantExpr(c=float(np.median(magnitude)))]
    q, log_c = np.polyfit(x, log_magnitude, deg=1, w=weights)
    if log_c < 700:
        candidates.append(ExponentialExpr(c=math.exp(log_c), q=float(q)))
    for x0 in centers:
        if not math.isfinite(x0) or np.any(x == x0):
            continue
        p, log_c = np.polyfit(np.log(np.abs(x - x0)),
                              log_magnitude,
                              deg=1,
                              w=weights)
        if log_c < 700:
            candidates.append(
                PowerExpr(c=math.exp(log_c), x0=float(x0), p=float(p)))
    slack = tolerance * magnitude + noise
    for candidate in candidates:
        if _fits(candidate, x, magnitude, slack):
            return sign, candidate
    return None


class Piece(BaseModel):
    """An open interval (lo, hi) carrying an expression."""
    model_config = ConfigDict(frozen=True)

    lo: Real
    hi: Real
    expression: Expression

    @field_validator("hi")
    @classmethod
    def nonempty(cls, hi: float, info: ValidationInfo) -> float:
        lo = info.data.get("lo")
        if lo is not None and not lo < hi:
            raise ValueError(f"Piece interval ({lo}, {hi}) is empty")
        return hi

    def overlaps(self, lo: float, hi: float) -> bool:
        return self.lo < hi and lo < self.hi

    def clipped_integral(self, lo: float, hi: float) -> float:
        """∫ of the expression over (lo, hi) ∩ (self.lo, self.hi)."""
        left = max(lo, self.lo)
        right = min(hi, self.hi)
        if right <= left:
            return 0.0
        return self.expression.integral(left, right)

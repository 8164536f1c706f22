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
"""Closed-form behaviour of a profile f = exp(L) near one endpoint.

Near an endpoint covered by a single closed-form density piece the profile
either converges to a positive constant, behaves like a power of the distance
(logarithmic L), or grows or decays faster than any power. These shapes decide
∫ f^σ and the Feller integral without quadrature.
"""

from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict

from skewbm.analysis.expressions import ConstantExpr, ExponentialExpr
from skewbm.analysis.expressions import ExpPowerExpr, Piece, PowerExpr
from skewbm.analysis.measure import CheckedMeasure
from skewbm.analysis.types import EndpointT


class TailBehavior(BaseModel):
    """Shape of f = exp(L) when approaching an endpoint from inside.

    Attributes:

      kind (Literal["converges", "log", "superpolynomial", "unknown"]):
      "converges" when f has a positive finite limit, "log" when
      f ≍ distance^kappa (finite endpoint) or |x|^kappa (infinite endpoint),
      "superpolynomial" when L tends to direction·∞ faster than a logarithm.

      endpoint (float): The endpoint.

      kappa (float): Exponent of the "log" kind.

      direction (Literal[1, -1]): Sign of the limit of L for the
      "superpolynomial" kind.

      growth (float): L' ≍ |x|^growth at an infinite endpoint.

      exponential (bool): L' grows exponentially at an infinite endpoint.
    """
    model_config = ConfigDict(frozen=True)

    kind: Literal["converges", "log", "superpolynomial", "unknown"]
    endpoint: float
    kappa: float = 0.0
    direction: Literal[1, -1] = 1
    growth: float = 0.0
    exponential: bool = False

    @property
    def finite_endpoint(self) -> bool:
        return math.isfinite(self.endpoint)

    def power_integral_finite(self, sigma: float) -> bool | None:
        """Whether ∫ f^σ is finite near the endpoint, `None` when unknown."""
        match self.kind:
            case "converges":
                return self.finite_endpoint
            case "log":
                if self.finite_endpoint:
                    return sigma * self.kappa > -1
                return sigma * self.kappa < -1
            case "superpolynomial":
                return sigma * self.direction == -1
            case _:
                return None

    def feller_finite(self) -> bool | None:
        """Whether ∫^end (1/f)(x) ∫_e^x f(y) dy dx is finite at an infinite
        endpoint (finite means the diffusion explodes there)."""
        if self.finite_endpoint:
            raise ValueError("The Feller integral is taken at ±∞")
        match self.kind:
            case "converges" | "log":
                return False
            case "superpolynomial":
                if self.direction < 0:
                    return False
                return self.exponential or self.growth > 1
            case _:
                return None


def _adjacent(pieces: list[Piece], endpoint: float,
              side: EndpointT) -> Piece | None:
    """The piece covering a one-sided neighbourhood of the endpoint inside
    the interval."""
    for piece in pieces:
        if side == "b" and piece.lo < endpoint <= piece.hi:
            return piece
        if side == "a" and piece.lo <= endpoint < piece.hi:
            return piece
    return None


def _measure_piece_tail(piece: Piece, sign: int, endpoint: float,
                        side: EndpointT) -> TailBehavior:
    """Tail of L = 2∫_e^z sign·expression near the endpoint."""
    expression = piece.expression
    if getattr(expression, "c", 1.0) == 0:
        return TailBehavior(kind="converges", endpoint=endpoint)
    # Moving toward the endpoint increases z at b and decreases it at a.
    orientation = 1 if side == "b" else -1
    if math.isfinite(endpoint):
        if not isinstance(expression, PowerExpr) or expression.x0 != endpoint:
            return TailBehavior(kind="converges", endpoint=endpoint)
        if expression.p > -1:
            return TailBehavior(kind="converges", endpoint=endpoint)
        if expression.p == -1:
            return TailBehavior(kind="log",
                                endpoint=endpoint,
                                kappa=-2 * sign * orientation * expression.c)
        return TailBehavior(kind="superpolynomial",
                            endpoint=endpoint,
                            direction=sign * orientation,
                            growth=expression.p)
    match expression:
        case ConstantExpr():
            return TailBehavior(kind="superpolynomial",
                                endpoint=endpoint,
                                direction=sign * orientation,
                                growth=0.0)
        case PowerExpr():
            if expression.p < -1:
                return TailBehavior(kind="converges", endpoint=endpoint)
            if expression.p == -1:
                return TailBehavior(kind="log",
                                    endpoint=endpoint,
                                    kappa=2 * sign * orientation *
                                    expression.c)
            return TailBehavior(kind="superpolynomial",
                                endpoint=endpoint,
                                direction=sign * orientation,
                                growth=expression.p)
        case ExponentialExpr():
            if expression.q == 0:
                return TailBehavior(kind="superpolynomial",
                                    endpoint=endpoint,
                                    direction=sign * orientation,
                                    growth=0.0)
            toward = expression.q * endpoint
            if toward < 0:
                return TailBehavior(kind="converges", endpoint=endpoint)
            return TailBehavior(kind="superpolynomial",
                                endpoint=endpoint,
                                direction=sign * orientation,
                                growth=0.0,
                                exponential=toward > 0)
        case _:
            return TailBehavior(kind="unknown", endpoint=endpoint)


def measure_tail(m: CheckedMeasure, endpoint: float,
                 side: EndpointT) -> TailBehavior:
    """Tail of the profile built from μ near an endpoint of its interval.

    Args:

      m (CheckedMeasure): The measure.

      endpoint (float): aₙ when `side` is "a", bₙ when it is "b".

      side (EndpointT): Which end of the interval.

    Returns an "unknown" behaviour when atoms with a divergent tail or a
    declared region accumulate at the endpoint, or for Cantor structures.
    """
    if m.gaps is not None:
        return TailBehavior(kind="unknown", endpoint=endpoint)
    for region in m.infinite_regions:
        if region.lo <= endpoint <= region.hi:
            return TailBehavior(kind="unknown", endpoint=endpoint)
    for rule in m.infinite_rules:
        if rule.locations.limit == endpoint and not rule.summable:
            return TailBehavior(kind="unknown", endpoint=endpoint)
    piece = _adjacent(list(m.density_pieces), endpoint, side)
    if piece is None:
        return TailBehavior(kind="converges", endpoint=endpoint)
    return _measure_piece_tail(piece, piece.sign, endpoint, side)


def density_tail(pieces: list[Piece], endpoint: float,
                 side: EndpointT) -> TailBehavior:
    """Tail of a raw density given directly by closed-form pieces.

    A missing adjacent piece means ρ vanishes near the endpoint, which is
    reported as "unknown".
    """
    piece = _adjacent(pieces, endpoint, side)
    if piece is None:
        return TailBehavior(kind="unknown", endpoint=endpoint)
    expression = piece.expression
    if getattr(expression, "c", 1.0) == 0:
        return TailBehavior(kind="unknown", endpoint=endpoint)
    match expression:
        case ConstantExpr():
            return TailBehavior(kind="converges", endpoint=endpoint)
        case PowerExpr():
            if math.isfinite(endpoint) and expression.x0 != endpoint:
                return TailBehavior(kind="converges", endpoint=endpoint)
            return TailBehavior(kind="log",
                                endpoint=endpoint,
                                kappa=expression.p)
        case ExponentialExpr():
            if math.isfinite(endpoint) or expression.q == 0:
                return TailBehavior(kind="converges", endpoint=endpoint)
            toward = expression.q * endpoint
            return TailBehavior(kind="superpolynomial",
                                endpoint=endpoint,
                                direction=1 if toward > 0 else -1,
                                growth=0.0)
        case ExpPowerExpr():
            if math.isfinite(endpoint) or expression.q == 0:
                return TailBehavior(kind="converges", endpoint=endpoint)
            return TailBehavior(kind="superpolynomial",
                                endpoint=endpoint,
                                direction=1 if expression.q > 0 else -1,
                                growth=expression.p - 1)
        case _:
            return TailBehavior(kind="unknown", endpoint=endpoint)

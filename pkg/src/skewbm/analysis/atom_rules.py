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
"""Rule-generated countable families of atoms.

A rule pairs a location family k ↦ x_k with a weight family k ↦ w_k for
k = start, start + 1, ... (finitely or infinitely many). Locations are strictly
monotone in k, so the indices of atoms inside an interval form a contiguous
range and the only possible accumulation point is the limit of x_k.
"""

from __future__ import annotations

import math
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo
from pydantic import field_validator

from skewbm.analysis.errors import InconsistentTailCertificate
from skewbm.analysis.expressions import Real
from skewbm.analysis.types import FloatArrayT

# Number of leading terms checked against a declared tail certificate.
CERTIFICATE_CHECK_TERMS: int = 10_000


class _Family(BaseModel):
    model_config = ConfigDict(frozen=True)


class ReciprocalLocations(_Family):
    """x_k = center + scale / (p·k + q), accumulating at `center`."""
    kind: Literal["reciprocal"] = "reciprocal"
    center: Real = 0.0
    scale: Real
    p: Real = Field(default=1.0, gt=0)
    q: Real = 0.0

    def __call__(self, k: FloatArrayT) -> FloatArrayT:
        return self.center + self.scale / (self.p * k + self.q)

    @property
    def limit(self) -> float:
        return self.center

    def first_index_within(self, distance: float) -> int:
        """Smallest k with |x_k − limit| < distance."""
        return max(1, math.floor((abs(self.scale) / distance - self.q) /
                                 self.p) + 1)

    def min_index(self) -> int:
        """Indices must keep p·k + q positive."""
        return max(1, math.floor(-self.q / self.p) + 1)


class GeometricLocations(_Family):
    """x_k = center + scale·r^k, accumulating at `center`."""
    kind: Literal["geometric"] = "geometric"
    center: Real = 0.0
    scale: Real
    r: Real = Field(gt=0, lt=1)

    def __call__(self, k: FloatArrayT) -> FloatArrayT:
        return self.center + self.scale * self.r**k

    @property
    def limit(self) -> float:
        return self.center

    def first_index_within(self, distance: float) -> int:
        return max(
            0,
            math.floor(math.log(distance / abs(self.scale)) / math.log(self.r))
            + 1)

    def min_index(self) -> int:
        return 0


class ArithmeticLocations(_Family):
    """x_k = start + step·k, running off to ±∞."""
    kind: Literal["arithmetic"] = "arithmetic"
    origin: Real = 0.0
    step: Real

    @field_validator("step")
    @classmethod
    def step_nonzero(cls, step: float) -> float:
        if step == 0:
            raise ValueError("Arithmetic locations need a nonzero step")
        return step

    def __call__(self, k: FloatArrayT) -> FloatArrayT:
        return self.origin + self.step * k

    @property
    def limit(self) -> float:
        return math.copysign(math.inf, self.step)

    def first_index_within(self, distance: float) -> int:
        """Smallest k with |x_k| > 1 / distance (a neighbourhood of ±∞)."""
        radius = 1.0 / distance
        return max(0, math.floor((radius - self.origin * np.sign(self.step)) /
                                 abs(self.step)) + 1)

    def min_index(self) -> int:
        return 0


LocationRule = Annotated[Union[ReciprocalLocations, GeometricLocations,
                               ArithmeticLocations],
                         Field(discriminator="kind")]


class ConstantWeights(_Family):
    """w_k = c."""
    kind: Literal["constant"] = "constant"
    c: Real

    def __call__(self, k: FloatArrayT) -> FloatArrayT:
        return np.full_like(k, self.c, dtype=np.float64)

    @property
    def decay(self) -> tuple[str, float]:
        return ("power", 0.0) if self.c != 0 else ("zero", 0.0)

    @property
    def eventual_sign(self) -> int:
        return int(np.sign(self.c))


class GeometricWeights(_Family):
    """w_k = c·r^k."""
    kind: Literal["geometric"] = "geometric"
    c: Real
    r: Real = Field(gt=0, lt=1)

    def __call__(self, k: FloatArrayT) -> FloatArrayT:
        return self.c * self.r**k

    @property
    def decay(self) -> tuple[str, float]:
        return ("geometric", self.r)

    @property
    def eventual_sign(self) -> int:
        return int(np.sign(self.c))


class PowerWeights(_Family):
    """w_k = c·k^(−p)."""
    kind: Literal["power"] = "power"
    c: Real
    p: Real = Field(gt=0)

    def __call__(self, k: FloatArrayT) -> FloatArrayT:
        return self.c * np.asarray(k, dtype=np.float64)**(-self.p)

    @property
    def decay(self) -> tuple[str, float]:
        return ("power", self.p)

    @property
    def eventual_sign(self) -> int:
        return int(np.sign(self.c))


class RationalLinearWeights(_Family):
    """w_k = c·(k + u)/(k + v)."""
    kind: Literal["rational_linear"] = "rational_linear"
    c: Real
    u: Real = 0.0
    v: Real = 0.0

    def __call__(self, k: FloatArrayT) -> FloatArrayT:
        k = np.asarray(k, dtype=np.float64)
        return self.c * (k + self.u) / (k + self.v)

    @property
    def decay(self) -> tuple[str, float]:
        return ("power", 0.0) if self.c != 0 else ("zero", 0.0)

    @property
    def eventual_sign(self) -> int:
        return int(np.sign(self.c))


class RatioPowerWeights(_Family):
    """w_k = sign·(q_k − 1)/(q_k + 1) where q_k = ((k + u)/(k + v))^γ.

    Then (1 + w_k)/(1 − w_k) = q_k^sign, so products over atoms telescope.
    """
    kind: Literal["ratio_power"] = "ratio_power"
    u: Real = 1.0
    v: Real = 0.0
    gamma: Real
    sign: Literal[1, -1] = 1

    def __call__(self, k: FloatArrayT) -> FloatArrayT:
        k = np.asarray(k, dtype=np.float64)
        log_q = self.gamma * (np.log(k + self.u) - np.log(k + self.v))
        return self.sign * np.tanh(log_q / 2)

    @property
    def decay(self) -> tuple[str, float]:
        if self.gamma == 0 or self.u == self.v:
            return ("zero", 0.0)
        return ("power", 1.0)

    @property
    def eventual_sign(self) -> int:
        return int(self.sign * np.sign(self.gamma * (self.u - self.v)))


class OscillatingWeights(_Family):
    """w_k = c·cos(ω·k)·k^(−p)."""
    kind: Literal["oscillating"] = "oscillating"
    c: Real
    omega: Real
    p: Real = Field(gt=0)

    def __call__(self, k: FloatArrayT) -> FloatArrayT:
        k = np.asarray(k, dtype=np.float64)
        return self.c * np.cos(self.omega * k) * k**(-self.p)

    @property
    def decay(self) -> tuple[str, float]:
        return ("power", self.p)

    @property
    def eventual_sign(self) -> int:
        # cos(ωk) keeps a single sign only when ω is a multiple of 2π.
        turns = self.omega / (2 * math.pi)
        if math.isclose(turns, round(turns), abs_tol=1e-12):
            return int(np.sign(self.c))
        return 0


WeightRule = Annotated[Union[ConstantWeights, GeometricWeights, PowerWeights,
                             RationalLinearWeights, RatioPowerWeights,
                             OscillatingWeights],
                       Field(discriminator="kind")]


class TailCertificate(BaseModel):
    """Claim about Σ|w_k|.

    Attributes:

      kind (Literal["summable", "divergent"]): Whether the absolute weights
      are summable.

      bound (float): For summable tails, |w_k| ≤ bound·k^(−exponent) (or
      bound·ratio^k when `ratio` is set) for every k.

      exponent (float): Power decay exponent, must exceed 1.

      ratio (float | None): Geometric decay ratio in (0, 1).
    """
    model_config = ConfigDict(frozen=True)

    kind: Literal["summable", "divergent"]
    bound: Real = 1.0
    exponent: Real = 2.0
    ratio: Real | None = None

    def envelope(self, k: FloatArrayT) -> FloatArrayT:
        if self.ratio is not None:
            return self.bound * self.ratio**k
        return self.bound * np.asarray(k, dtype=np.float64)**(-self.exponent)

    def tail_sum(self, first: int) -> float:
        """Upper bound of Σ_{k ≥ first} |w_k|."""
        if self.ratio is not None:
            return self.bound * self.ratio**first / (1 - self.ratio)
        first = max(first, 1)
        # ∫_{first−1}^∞ t^(−s) dt dominates the sum for decreasing terms.
        start = max(first - 1.0, 0.5)
        return self.bound * start**(1 - self.exponent) / (self.exponent - 1)


class AtomRule(BaseModel):
    """A named family of atoms (x_k, w_k), k = start, ..., stop.

    Attributes:

      name (str): Used in error messages and reports.

      locations (LocationRule): k ↦ x_k, strictly monotone.

      weights (WeightRule): k ↦ w_k.

      start (int): First index.

      stop (int | None): Last index (inclusive) or `None` for an infinite run.

      accumulation (float | None): Declared accumulation point of an
      infinite run; required for infinite runs and cross-checked.

      tail (TailCertificate | None): Declared tail behaviour, derived from the
      weight family when omitted.
    """
    model_config = ConfigDict(frozen=True)

    name: str
    locations: LocationRule
    weights: WeightRule
    start: int = 1
    stop: int | None = None
    accumulation: Real | None = None
    tail: TailCertificate | None = None

    @field_validator("stop")
    @classmethod
    def stop_after_start(cls, stop: int | None,
                         info: ValidationInfo) -> int | None:
        start = info.data.get("start", 1)
        if stop is not None and stop < start:
            raise ValueError(f"Rule stops at {stop} before starting at "
                             f"{start}")
        return stop

    @property
    def infinite(self) -> bool:
        return self.stop is None

    @property
    def first_index(self) -> int:
        return max(self.start, self.locations.min_index())

    def materialize(self, last: int | None = None) -> tuple[FloatArrayT,
                                                            FloatArrayT]:
        """Locations and weights for indices first_index..last (inclusive).

        Args:

          last (int | None): Last index, defaults to `stop`; required for
          infinite runs.
        """
        if last is None:
            if self.stop is None:
                raise ValueError(f"Rule {self.name!r} is infinite, pass "
                                 f"the last index to materialize.")
            last = self.stop
        if self.stop is not None:
            last = min(last, self.stop)
        k = np.arange(self.first_index, last + 1, dtype=np.float64)
        return self.locations(k), self.weights(k)

    def effective_tail(self) -> TailCertificate:
        """The declared certificate, or one derived from the weight family."""
        if self.tail is not None:
            return self.tail
        return derive_tail(self.weights)

    @property
    def summable(self) -> bool:
        return not self.infinite or self.effective_tail().kind == "summable"


def derive_tail(weights: WeightRule) -> TailCertificate:
    """Analytic tail certificate of a weight family."""
    kind, rate = weights.decay
    match kind:
        case "zero":
            return TailCertificate(kind="summable", bound=0.0, exponent=2.0)
        case "geometric":
            return TailCertificate(kind="summable",
                                   bound=abs(weights.c),
                                   ratio=rate)
        case _:
            if rate > 1:
                return TailCertificate(kind="summable",
                                       bound=abs(weights.c),
                                       exponent=rate)
            return TailCertificate(kind="divergent")


def check_tail_certificate(rule: AtomRule) -> None:
    """Raise `InconsistentTailCertificate` when the declared certificate
    disagrees with the rule.

    A summable claim must dominate the first `CERTIFICATE_CHECK_TERMS`
    weights and must not contradict the analytic decay of the family; a
    divergent claim must match a family which is not absolutely summable.
    """
    if rule.tail is None:
        return
    derived = derive_tail(rule.weights)
    if rule.tail.kind == "summable":
        if rule.tail.ratio is None and rule.tail.exponent <= 1:
            raise InconsistentTailCertificate(
                rule.name, f"exponent {rule.tail.exponent} does not give a "
                f"summable envelope")
        if derived.kind == "divergent" and rule.infinite:
            raise InconsistentTailCertificate(
                rule.name, "weights decay too slowly to be summable")
        last = rule.first_index + CERTIFICATE_CHECK_TERMS - 1
        if rule.stop is not None:
            last = min(last, rule.stop)
        k = np.arange(rule.first_index, last + 1, dtype=np.float64)
        excess = np.abs(rule.weights(k)) - rule.tail.envelope(k)
        if np.any(excess > 1e-12):
            worst = int(k[np.argmax(excess)])
            raise InconsistentTailCertificate(
                rule.name, f"|w_{worst}| exceeds the declared envelope")
    elif derived.kind == "summable" and rule.infinite:
        raise InconsistentTailCertificate(
            rule.name, "declared divergent but the weights are summable")

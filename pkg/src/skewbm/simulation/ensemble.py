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
"""Reproducible path ensembles.

Paths are simulated in blocks of `SimulationOptions.block_size`. Block b
draws from the b-th child of `np.random.SeedSequence(seed)`, so the ensemble
depends on the seed and the block size only, never on the thread schedule.
"""

from __future__ import annotations

from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
import dataclasses
import logging
import math
import os

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field
from tqdm.auto import tqdm

from skewbm.analysis.errors import OutOfInterval
from skewbm.analysis.measure import CheckedMeasure
from skewbm.analysis.types import FloatArrayT, SchemeT
from skewbm.simulation.errors import AtomOffGrid, StepTooCoarse
from skewbm.simulation.errors import WindowTooNarrow
from skewbm.simulation.natural_scale import NaturalScaleTransform

# Relative default step dt = DEFAULT_STEP_FRACTION·T.
DEFAULT_STEP_FRACTION: float = 1e-4

# Tolerance for atoms sitting on grid points, in grid units.
GRID_TOLERANCE: float = 1e-9

_logger = logging.getLogger("skewbm.simulation.ensemble")


def num_threads() -> int:
    """Thread count from `SKEW_NUM_THREADS`, `os.cpu_count()` by default."""
    value = os.environ.get("SKEW_NUM_THREADS")
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1


class SimulationOptions(BaseModel):
    """Knobs shared by both schemes.

    Attributes:

      save_stride (int): Steps between saved states.

      block_size (int): Paths per random substream.

      windows (list[tuple[float, float]]): Levels z and half widths ε whose
      occupation times are accumulated at every step.

      num_threads (int | None): Worker threads, `num_threads()` when `None`.
    """
    model_config = ConfigDict(frozen=True)

    save_stride: int = Field(default=100, ge=1)
    block_size: int = Field(default=1000, ge=1)
    windows: list[tuple[float, float]] = Field(default_factory=list)
    show_progressbar: bool = False
    num_threads: int | None = Field(default=None, ge=1)


@dataclasses.dataclass(frozen=True)
class PathEnsemble:
    """Simulated paths thinned to every `save_stride` step.

    Attributes:

      times (FloatArrayT): Saved times, starting at 0 and ending at the
      horizon.

      paths (FloatArrayT): X at the saved times, one row per path.

      martingale (FloatArrayT): Accumulated martingale increments of X.

      occupation (dict[tuple[float, float], FloatArrayT]): For every tracked
      window (z, ε) the occupation times of [z − ε, z + ε), (z, z + ε] and
      [z − ε, z) up to each saved time, shaped (paths, times, 3).

      spacing (float | None): Grid spacing of the random walk scheme.
    """
    scheme: SchemeT
    x0: float
    horizon: float
    dt: float
    n_paths: int
    seed: int
    times: FloatArrayT
    paths: FloatArrayT
    martingale: FloatArrayT
    occupation: dict[tuple[float, float], FloatArrayT]
    spacing: float | None = None

    @property
    def terminal(self) -> FloatArrayT:
        return self.paths[:, -1]

    def time_index(self, at: float) -> int:
        """Index of the saved time `at`.

        Raises: `ValueError` when `at` is not a saved time.
        """
        index = int(np.argmin(np.abs(self.times - at)))
        if abs(self.times[index] - at) > self.dt / 2:
            raise ValueError(f"Time {at} is not a saved time, saved every "
                             f"{self.times[1] - self.times[0]:g} up to "
                             f"{self.horizon:g}")
        return index


@dataclasses.dataclass
class _Block:
    paths: FloatArrayT
    martingale: FloatArrayT
    occupation: FloatArrayT


class _Windows:
    """Occupation indicators of the tracked windows."""

    def __init__(self, windows: list[tuple[float, float]]) -> None:
        self.windows = list(windows)
        self.z = np.array([z for z, _ in windows], dtype=np.float64)
        self.eps = np.array([e for _, e in windows], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.windows)

    def indicators(self, x: FloatArrayT) -> FloatArrayT:
        """Shape (paths, windows, 3)."""
        shifted = x[:, None] - self.z[None, :]
        eps = self.eps[None, :]
        both = (shifted >= -eps) & (shifted < eps)
        right = (shifted > 0) & (shifted <= eps)
        left = (shifted >= -eps) & (shifted < 0)
        return np.stack([both, right, left], axis=-1).astype(np.float64)


def _saved_steps(n_steps: int, stride: int) -> npt.NDArray[np.int64]:
    steps = np.arange(0, n_steps + 1, stride, dtype=np.int64)
    if steps[-1] != n_steps:
        steps = np.append(steps, n_steps)
    return steps


def _run_blocks(worker: Callable[[np.random.Generator, int], _Block],
                n_paths: int, seed: int,
                options: SimulationOptions) -> _Block:
    sizes = [options.block_size] * (n_paths // options.block_size)
    if n_paths % options.block_size:
        sizes.append(n_paths % options.block_size)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    threads = options.num_threads or num_threads()
    _logger.info("Simulating %d paths in %d blocks on %d threads", n_paths,
                 len(sizes), threads)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        futures = [
            executor.submit(worker, np.random.default_rng(child), size)
            for child, size in zip(children, sizes)
        ]
        blocks = [
            future.result() for future in tqdm(futures,
                                               desc="Path blocks",
                                               disable=not options.
                                               show_progressbar)
        ]
    _logger.info("Finished %d paths", n_paths)
    return _Block(paths=np.concatenate([b.paths for b in blocks]),
                  martingale=np.concatenate([b.martingale for b in blocks]),
                  occupation=np.concatenate([b.occupation for b in blocks]))


def _check_windows(windows: _Windows, dt: float) -> None:
    for _, eps in windows.windows:
        if eps < math.sqrt(dt):
            raise WindowTooNarrow(eps, math.sqrt(dt))


def _ensemble(scheme: SchemeT, x0: float, n_steps: int, dt: float,
              n_paths: int, seed: int, saved: npt.NDArray[np.int64],
              windows: _Windows, block: _Block,
              spacing: float | None = None) -> PathEnsemble:
    occupation = {
        window: block.occupation[:, :, i, :]
        for i, window in enumerate(windows.windows)
    }
    return PathEnsemble(scheme=scheme,
                        x0=x0,
                        horizon=n_steps * dt,
                        dt=dt,
                        n_paths=n_paths,
                        seed=seed,
                        times=saved * dt,
                        paths=block.paths,
                        martingale=block.martingale,
                        occupation=occupation,
                        spacing=spacing)


def simulate_paths(transform: NaturalScaleTransform,
                   x0: float,
                   horizon: float,
                   dt: float | None = None,
                   n_paths: int = 1000,
                   seed: int = 0,
                   options: SimulationOptions | None = None) -> PathEnsemble:
    """Euler–Maruyama for dZ = h(Z)dW, Z₀ = f(x0), reported as X = g(Z).

    Adjoined ends reflect in natural scale.

    Args:

      transform (NaturalScaleTransform): f, g and h of the interval.

      x0 (float): Starting point.

      horizon (float): T > 0.

      dt (float | None): Time step, `DEFAULT_STEP_FRACTION`·T by default.

      n_paths (int): Number of paths.

      seed (int): Seed of the whole ensemble.

      options (SimulationOptions | None): Saving, blocking, threading and
      tracked windows.

    Raises: `OutOfInterval` when x0 is not in the interval, `StepTooCoarse`
    when dt exceeds (diameter of the image / 100)², `WindowTooNarrow` when a
    tracked window is narrower than √dt.
    """
    options = options or SimulationOptions()
    inside = transform.lower < x0 < transform.upper or (
        x0 == transform.lower and transform.closed_left) or (
            x0 == transform.upper and transform.closed_right)
    if not inside:
        raise OutOfInterval(x0, (transform.lower, transform.upper))
    if horizon <= 0:
        raise ValueError(f"Horizon must be positive, got {horizon}")
    dt = dt or DEFAULT_STEP_FRACTION * horizon
    low, high = transform.image
    diameter = high - low
    if math.isfinite(diameter) and dt > (diameter / 100)**2:
        raise StepTooCoarse(dt, diameter)
    n_steps = max(1, math.ceil(horizon / dt - 1e-9))
    dt = horizon / n_steps
    windows = _Windows(options.windows)
    _check_windows(windows, dt)
    saved = _saved_steps(n_steps, options.save_stride)
    start = float(transform.f(x0)[0])
    sqrt_dt = math.sqrt(dt)

    def worker(rng: np.random.Generator, count: int) -> _Block:
        z = np.full(count, start)
        x = transform.g(z)
        w = np.zeros(count)
        occupation = np.zeros((count, len(windows), 3))
        out = _Block(paths=np.empty((count, len(saved))),
                     martingale=np.empty((count, len(saved))),
                     occupation=np.empty((count, len(saved), len(windows),
                                          3)))
        column = 0
        for step in range(n_steps + 1):
            if column < len(saved) and step == saved[column]:
                out.paths[:, column] = x
                out.martingale[:, column] = w
                out.occupation[:, column] = occupation
                column += 1
            if step == n_steps:
                break
            noise = rng.standard_normal(count) * sqrt_dt
            if len(windows):
                occupation += dt * windows.indicators(x)
            z = transform.fold(z + transform.h(z) * noise)
            x = transform.g(z)
            w += noise
        return out

    block = _run_blocks(worker, n_paths, seed, options)
    return _ensemble("euler_natural_scale", x0, n_steps, dt, n_paths, seed,
                     saved, windows, block)


def simulate_grid_walk(m: CheckedMeasure,
                       x0: float,
                       horizon: float,
                       spacing: float,
                       n_paths: int = 1000,
                       seed: int = 0,
                       options: SimulationOptions | None = None
                      ) -> PathEnsemble:
    """Skew random walk on x0 + spacing·ℤ with time step spacing².

    The walk steps right with probability (1 + μ({x}))/2 at atoms and 1/2
    elsewhere; its compensated increments make up the martingale part.

    Raises: `ValueError` unless μ consists of finitely many atoms of
    magnitude below 1, `AtomOffGrid` when an atom is not a grid point,
    `WindowTooNarrow` when a tracked window is narrower than the spacing.
    """
    options = options or SimulationOptions()
    if (m.infinite_rules or m.density_pieces or m.gaps is not None or
            m.infinite_regions):
        raise ValueError("The random walk needs finitely many atoms and no "
                         "continuous part")
    if np.any(np.abs(m.atom_weights) >= 1):
        raise ValueError("The random walk needs atoms of magnitude below 1")
    grid = (m.atom_locations - x0) / spacing
    nearest = np.round(grid)
    off = np.abs(grid - nearest) > GRID_TOLERANCE
    if np.any(off):
        raise AtomOffGrid(float(m.atom_locations[off][0]), spacing)
    atom_index = nearest.astype(np.int64)
    atom_weight = np.asarray(m.atom_weights, dtype=np.float64)
    dt = spacing**2
    n_steps = max(1, round(horizon / dt))
    windows = _Windows(options.windows)
    _check_windows(windows, dt)
    saved = _saved_steps(n_steps, options.save_stride)

    def drift(index: npt.NDArray[np.int64]) -> FloatArrayT:
        """μ({x}) at every grid index, 0 off the atoms."""
        if len(atom_index) == 0:
            return np.zeros(len(index))
        position = np.clip(np.searchsorted(atom_index, index), 0,
                           len(atom_index) - 1)
        return np.where(atom_index[position] == index,
                        atom_weight[position], 0.0)

    def worker(rng: np.random.Generator, count: int) -> _Block:
        index = np.zeros(count, dtype=np.int64)
        w = np.zeros(count)
        occupation = np.zeros((count, len(windows), 3))
        out = _Block(paths=np.empty((count, len(saved))),
                     martingale=np.empty((count, len(saved))),
                     occupation=np.empty((count, len(saved), len(windows),
                                          3)))
        column = 0
        for step in range(n_steps + 1):
            x = x0 + spacing * index
            if column < len(saved) and step == saved[column]:
                out.paths[:, column] = x
                out.martingale[:, column] = w
                out.occupation[:, column] = occupation
                column += 1
            if step == n_steps:
                break
            if len(windows):
                occupation += dt * windows.indicators(x)
            mu = drift(index)
            steps = np.where(rng.random(count) < (1 + mu) / 2, 1, -1)
            index += steps
            w += spacing * (steps - mu)
        return out

    block = _run_blocks(worker, n_paths, seed, options)
    return _ensemble("grid_walk", x0, n_steps, dt, n_paths, seed, saved,
                     windows, block, spacing)

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

import math
from pathlib import Path

import numpy as np
import pytest

from skewbm.analysis.errors import OutOfInterval
from skewbm.analysis.expressions import Piece
from skewbm.analysis.measure import (
    AtomSpec,
    CheckedMeasure,
    SignedMeasureSpec,
    validate_measure,
)
from skewbm.analysis.profile import build_profile
from skewbm.simulation.ensemble import (
    PathEnsemble,
    SimulationOptions,
    simulate_grid_walk,
    simulate_paths,
)
from skewbm.simulation.errors import (
    AtomOffGrid,
    StepTooCoarse,
    WindowTooNarrow,
)
from skewbm.simulation.estimators import (
    drift_consistency_check,
    estimate_local_time,
    estimate_occupation,
    one_sided_occupation,
)
from skewbm.simulation.export import write_paths, write_statistics
from skewbm.simulation.natural_scale import (
    NaturalScaleTransform,
    natural_scale,
)
from skewbm.structure.raw_density import (
    RawDensity,
    density_to_effective_intervals,
)

LINE = (-math.inf, math.inf, 0.0)


def skew(beta: float) -> CheckedMeasure:
    return validate_measure(
        SignedMeasureSpec(atoms=[AtomSpec(location=0.0, weight=beta)]))


def brownian() -> NaturalScaleTransform:
    return natural_scale(build_profile(validate_measure(SignedMeasureSpec()),
                                       LINE))


def constant_on(lo: float, hi: float) -> NaturalScaleTransform:
    rho = RawDensity(pieces=[
        Piece(lo=lo, hi=hi, expression={
            "kind": "constant",
            "c": 1
        })
    ])
    return natural_scale(density_to_effective_intervals(rho))


def test_identity_scale() -> None:
    transform = brownian()
    x = np.array([-3.0, 0.0, 2.5, 75.0])

    np.testing.assert_allclose(transform.f(x), x, atol=1e-9)
    np.testing.assert_allclose(transform.g(x), x, atol=1e-9)
    np.testing.assert_allclose(transform.h(x), 1.0)
    assert transform.image == (-math.inf, math.inf)


def test_skew_scale_slopes() -> None:
    transform = natural_scale(build_profile(skew(0.3), LINE))

    right = float(transform.f(1.0)[0] - transform.f(0.0)[0])
    left = float(transform.f(0.0)[0] - transform.f(-1.0)[0])

    assert right / left == pytest.approx(0.7 / 1.3, rel=1e-6)


def test_square_root_scale() -> None:
    rho = RawDensity(pieces=[
        Piece(lo=-math.inf,
              hi=math.inf,
              expression={
                  "kind": "power",
                  "c": 1,
                  "p": 0.5
              })
    ])
    transform = natural_scale(density_to_effective_intervals(rho))

    z = np.array([-1.0, -0.25, -0.09])
    values = transform.f(z) - transform.f(-1.0)

    np.testing.assert_allclose(values, 2 - 2 * np.sqrt(np.abs(z)), atol=1e-3)


def test_adjoined_end_reflects() -> None:
    transform = constant_on(0.0, math.inf)

    assert transform.closed_left
    assert not transform.closed_right
    np.testing.assert_allclose(transform.fold(np.array([-1.5, -1.0, 0.5])),
                               [-0.5, -1.0, 0.5])

    e = simulate_paths(transform, 0.5, 1.0, dt=1e-3, n_paths=200, seed=2)

    assert np.all(e.paths >= 0.0)


def test_bounded_interval_folds_both_ends() -> None:
    transform = constant_on(0.0, 1.0)

    assert transform.image == (-0.5, 0.5)
    np.testing.assert_allclose(transform.fold(np.array([0.7, -0.6, 1.8])),
                               [0.3, -0.4, -0.2])
    with pytest.raises(StepTooCoarse):
        simulate_paths(transform, 0.5, 1.0, dt=1e-3, n_paths=10)


def test_start_outside_interval() -> None:
    with pytest.raises(OutOfInterval):
        simulate_paths(constant_on(0.0, math.inf), -1.0, 1.0, n_paths=10)


def test_window_too_narrow() -> None:
    options = SimulationOptions(windows=[(0.0, 0.001)])

    with pytest.raises(WindowTooNarrow):
        simulate_paths(brownian(), 0.0, 1.0, dt=1e-3, options=options)


def test_atom_off_grid() -> None:
    with pytest.raises(AtomOffGrid):
        simulate_grid_walk(skew(0.5), 0.013, 1.0, spacing=0.02)


def test_grid_walk_rejects_continuous_part() -> None:
    m = validate_measure(
        SignedMeasureSpec(density_pieces=[{
            "lo": 0,
            "hi": 1,
            "expression": {
                "kind": "constant",
                "c": 1
            }
        }]))

    with pytest.raises(ValueError):
        simulate_grid_walk(m, 0.0, 1.0, spacing=0.1)


def test_saved_times() -> None:
    options = SimulationOptions(save_stride=30)

    e = simulate_grid_walk(skew(0.0), 0.0, 1.0, 0.1, 50, 0, options)

    assert e.times[0] == 0.0
    assert e.times[-1] == pytest.approx(1.0)
    assert e.paths.shape == (50, len(e.times))
    assert e.time_index(1.0) == len(e.times) - 1
    with pytest.raises(ValueError):
        e.time_index(0.555)


def test_runs_are_reproducible() -> None:
    windows = [(0.0, 0.1)]
    first = simulate_paths(brownian(),
                           0.0,
                           0.5,
                           dt=1e-3,
                           n_paths=300,
                           seed=7,
                           options=SimulationOptions(block_size=64,
                                                     num_threads=1,
                                                     windows=windows))
    second = simulate_paths(brownian(),
                            0.0,
                            0.5,
                            dt=1e-3,
                            n_paths=300,
                            seed=7,
                            options=SimulationOptions(block_size=64,
                                                      num_threads=4,
                                                      windows=windows))

    np.testing.assert_array_equal(first.paths, second.paths)
    np.testing.assert_array_equal(first.occupation[(0.0, 0.1)],
                                  second.occupation[(0.0, 0.1)])


@pytest.mark.slow
def test_brownian_variance() -> None:
    e = simulate_paths(brownian(), 0.0, 1.0, dt=1e-3, n_paths=4000, seed=1)

    assert np.var(e.terminal) == pytest.approx(1.0, abs=0.1)
    assert np.mean(e.terminal) == pytest.approx(0.0, abs=0.06)
    np.testing.assert_allclose(e.paths, e.martingale, atol=1e-9)


@pytest.mark.slow
def test_brownian_local_time() -> None:
    options = SimulationOptions(windows=[(0.0, 0.05)])
    e = simulate_paths(brownian(),
                       0.0,
                       1.0,
                       dt=1e-3,
                       n_paths=4000,
                       seed=5,
                       options=options)

    estimate = estimate_local_time(e, 0.0, 0.05, 1.0)

    # E|B₁| = √(2/π).
    assert estimate.mean == pytest.approx(math.sqrt(2 / math.pi), abs=0.05)
    assert estimate.stderr < 0.02


def positive_fraction(e: PathEnsemble, at: float) -> float:
    right, _ = estimate_occupation(e, 0.0, math.inf, at)
    left, _ = estimate_occupation(e, -math.inf, 0.0, at)
    return right / (right + left)


@pytest.mark.slow
def test_skew_walk_occupation() -> None:
    e = simulate_grid_walk(skew(0.5), 0.0, 1.0, 0.02, 4000, 3)

    assert positive_fraction(e, 1.0) == pytest.approx(0.75, abs=0.03)


@pytest.mark.slow
def test_euler_matches_grid_walk() -> None:
    transform = natural_scale(build_profile(skew(0.5), LINE))
    euler = simulate_paths(transform, 0.0, 1.0, dt=1e-3, n_paths=4000, seed=4)
    walk = simulate_grid_walk(skew(0.5), 0.0, 1.0, 0.02, 4000, 4)

    assert positive_fraction(euler, 1.0) == pytest.approx(positive_fraction(
        walk, 1.0),
                                                          abs=0.05)


@pytest.mark.slow
def test_one_sided_occupation_ratio() -> None:
    options = SimulationOptions(windows=[(0.0, 0.1)])
    e = simulate_grid_walk(skew(0.5), 0.0, 1.0, 0.02, 4000, 6, options)

    _, _, ratio = one_sided_occupation(e, 0.0, 0.1, 1.0)

    # ρ(0)/ρ(0−) = (1 + 0.5)/(1 − 0.5).
    assert ratio == pytest.approx(3.0, rel=0.15)


@pytest.mark.slow
def test_drift_matches_local_time() -> None:
    m = skew(0.5)
    options = SimulationOptions(windows=[(0.0, 0.05)])
    e = simulate_grid_walk(m, 0.0, 1.0, 0.02, 4000, 8, options)

    report = drift_consistency_check(e, m)

    assert report.residual_mean > 0
    assert report.drift_mean == pytest.approx(report.residual_mean, rel=0.1)


def test_export(tmpdir: str | Path) -> None:
    e = simulate_grid_walk(skew(0.0), 0.0, 0.04, 0.1, 2, 0)
    paths_file = Path(tmpdir) / "paths.csv"
    statistics_file = Path(tmpdir) / "statistics.csv"

    write_paths(e, paths_file)
    write_statistics([{
        "name": "p",
        "estimate": 0.5,
        "stderr": 0.1
    }], statistics_file)

    rows = paths_file.read_text(encoding="utf-8").splitlines()
    assert rows[0] == "path_id,t,x"
    assert len(rows) == 1 + 2 * len(e.times)
    assert statistics_file.read_text(
        encoding="utf-8").splitlines() == ["name,estimate,stderr", "p,0.5,0.1"]
    with pytest.raises(ValueError):
        write_statistics([], statistics_file)

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
import json
from pathlib import Path

import pytest

from skewbm.cli import EXIT_EXISTS, EXIT_INPUT_ERROR, EXIT_NO_EXISTENCE, main


def write_spec(tmpdir: str | Path, name: str, weight: str) -> Path:
    path = Path(tmpdir) / name
    path.write_text(f"""
[[atoms]]
location = 0
weight = "{weight}"
""",
                    encoding="utf-8")
    return path


def test_analyze_skew(tmpdir: str | Path) -> None:
    spec = write_spec(tmpdir, "skew.toml", "3/10")

    assert main(["analyze", str(spec), "--no-color"]) == EXIT_EXISTS

    report = json.loads(
        spec.with_suffix(".report.json").read_text(encoding="utf-8"))
    assert report["exists"] == "true"


def test_analyze_unit_atom(tmpdir: str | Path) -> None:
    spec = write_spec(tmpdir, "dirac.toml", "1")
    out = Path(tmpdir) / "dirac.json"

    assert main(["analyze", str(spec), "--out",
                 str(out)]) == EXIT_NO_EXISTENCE

    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["exists"] == "false"
    assert report["conditions"]["1"]["holds"] == "false"


def test_malformed_spec(tmpdir: str | Path) -> None:
    spec = Path(tmpdir) / "broken.toml"
    spec.write_text("[[atoms]\n", encoding="utf-8")

    assert main(["analyze", str(spec)]) == EXIT_INPUT_ERROR
    assert main(["analyze", str(Path(tmpdir) / "missing.toml")
                ]) == EXIT_INPUT_ERROR


def test_construct(tmpdir: str | Path) -> None:
    spec = write_spec(tmpdir, "skew.toml", "3/10")
    out = Path(tmpdir) / "construct"

    assert main(["construct", str(spec), "--out", str(out)]) == EXIT_EXISTS

    density = (out / "density.csv").read_text(encoding="utf-8").splitlines()
    assert density[0].split(",")[:3] == ["n", "a", "b"]
    assert len(density) == 2
    assert (out / "effective_intervals.csv").exists()
    assert (out / "report.json").exists()


def test_construct_without_existence(tmpdir: str | Path) -> None:
    spec = write_spec(tmpdir, "dirac.toml", "1")
    out = Path(tmpdir) / "construct"

    assert main(["construct", str(spec), "--out",
                 str(out)]) == EXIT_NO_EXISTENCE
    assert not (out / "density.csv").exists()


@pytest.mark.parametrize("alpha,code", [
    ("1/3", EXIT_EXISTS),
    ("0.2", EXIT_EXISTS),
    ("1.2", EXIT_INPUT_ERROR),
])
def test_cantor(alpha: str, code: int) -> None:
    assert main(["cantor", "--alpha", alpha, "--depth", "8"]) == code


def test_cantor_report(tmpdir: str | Path) -> None:
    out = Path(tmpdir) / "cantor.json"

    assert main(["cantor", "--alpha", "0.2", "--depth", "6", "--out",
                 str(out)]) == EXIT_EXISTS

    study = json.loads(out.read_text(encoding="utf-8"))
    assert study["report"]["verdict"] == "infinitely_many_irreducible"
    assert len(study["census"]) == 6


def test_cantor_needs_input() -> None:
    assert main(["cantor"]) == EXIT_INPUT_ERROR


@pytest.mark.parametrize("scheme", [
    ["--scheme", "grid", "--spacing", "0.1"],
    ["--dt", "0.001"],
])
def test_simulate_is_deterministic(tmpdir: str | Path,
                                   scheme: list[str]) -> None:
    spec = write_spec(tmpdir, "skew.toml", "3/10")
    outputs = []
    for run in ("first", "second"):
        out = Path(tmpdir) / run
        argv = [
            "simulate",
            str(spec), "--paths", "20", "--horizon", "0.5", "--seed", "7",
            "--out",
            str(out), *scheme
        ]
        assert main(argv) == EXIT_EXISTS
        outputs.append(out)

    for name in ("paths.csv", "occupation.csv", "local_time.csv"):
        first, second = ((out / name).read_bytes() for out in outputs)
        assert first == second


def test_simulate_requires_existence(tmpdir: str | Path) -> None:
    spec = write_spec(tmpdir, "dirac.toml", "1")
    out = Path(tmpdir) / "sim"

    assert main(["simulate", str(spec), "--out",
                 str(out)]) == EXIT_NO_EXISTENCE
    assert not (out / "paths.csv").exists()

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
from pathlib import Path

import pytest

from skewbm.analysis.errors import SpecFileError
from skewbm.reports.spec_file import load_spec, loads_spec

SKEW = """
[[atoms]]
location = 0
weight = "3/10"
"""


def test_load_measure(tmpdir: str | Path) -> None:
    path = Path(tmpdir) / "skew.toml"
    path.write_text(SKEW, encoding="utf-8")

    loaded = load_spec(path)

    assert loaded.cantor is None
    assert loaded.measure is not None
    assert loaded.measure.atoms[0].weight == pytest.approx(0.3)
    assert len(loaded.digest) == 64
    assert loaded.checked().xi.tolist() == [0.0]


def test_load_cantor() -> None:
    loaded = loads_spec("""
[cantor]
depth = 5
gap_model = "middle_proportion"

[cantor.alphas]
alpha = "1/3"
""")

    assert loaded.measure is None
    assert loaded.cantor is not None
    assert loaded.cantor.alphas.alpha == pytest.approx(1 / 3)
    assert loaded.cantor.depth == 5


def test_digest_ignores_layout() -> None:
    reordered = """
# the same atom
[[atoms]]
weight   = 0.3
location = 0.0
"""

    assert loads_spec(SKEW).digest == loads_spec(reordered).digest
    assert loads_spec(SKEW).digest != loads_spec(
        SKEW.replace("3/10", "1/10")).digest


def test_syntax_error_position() -> None:
    with pytest.raises(SpecFileError) as error:
        loads_spec("[[atoms]]\nlocation = \n", Path("broken.toml"))

    assert error.value.location.startswith("line 2")
    assert error.value.path == "broken.toml"


def test_invalid_field_path() -> None:
    with pytest.raises(SpecFileError) as error:
        loads_spec("""
[[atoms]]
location = "inf"
weight = 1.0
""")

    assert error.value.location == "atoms.0.location"


def test_invalid_cantor_field() -> None:
    with pytest.raises(SpecFileError) as error:
        loads_spec("""
[cantor]
[cantor.alphas]
alpha = 1.2
""")

    assert error.value.location == "cantor.alphas.alpha"


def test_unknown_section() -> None:
    with pytest.raises(SpecFileError) as error:
        loads_spec("[[atomz]]\nlocation = 0\n")

    assert error.value.location == "atomz"


def test_cantor_excludes_measure() -> None:
    with pytest.raises(SpecFileError, match="cannot be combined"):
        loads_spec(SKEW + """
[cantor.alphas]
alpha = 0.2
""")


def test_missing_file(tmpdir: str | Path) -> None:
    with pytest.raises(SpecFileError) as error:
        load_spec(Path(tmpdir) / "missing.toml")

    assert error.value.location == "file"

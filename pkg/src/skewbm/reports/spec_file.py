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
"""Reading measure and Cantor specs from TOML files.

A spec file either describes a signed measure through the arrays of tables
`[[atoms]]`, `[[atom_rules]]`, `[[density_pieces]]` and
`[[declared_infinite_regions]]`, or a generalized Cantor structure through a
single `[cantor]` table. Numbers may be written as "p/q" strings and are then
parsed exactly before being rounded to floats.
"""

import dataclasses
import json
import logging
from pathlib import Path
import re
import tomllib
from typing import Any

from pydantic import ValidationError

from skewbm.analysis.errors import SpecFileError
from skewbm.analysis.gaps import CantorSpec
from skewbm.analysis.measure import (
    CheckedMeasure,
    SignedMeasureSpec,
    validate_measure,
)
from skewbm.cantor.models import generate_cantor
from skewbm.reports.utils import hash_text

MEASURE_SECTIONS: frozenset[str] = frozenset(SignedMeasureSpec.model_fields)
CANTOR_SECTION: str = "cantor"

_logger = logging.getLogger("skewbm.reports.spec_file")

_TOML_POSITION = re.compile(r"\(at line (\d+), column (\d+)\)")


@dataclasses.dataclass(frozen=True)
class LoadedSpec:
    """A validated spec file.

    Attributes:

      path (Path): Where it was read from.

      measure (SignedMeasureSpec | None): The measure, unless the file
      describes a Cantor structure.

      cantor (CantorSpec | None): The Cantor structure, if any.

      digest (str): SHA-256 of the normalized spec, independent of comments,
      whitespace and the order of keys in the file.
    """
    path: Path
    measure: SignedMeasureSpec | None
    cantor: CantorSpec | None
    digest: str

    def checked(self, show_progressbar: bool = False) -> CheckedMeasure:
        """Validate the measure or generate the Cantor structure."""
        if self.cantor is not None:
            _, m = generate_cantor(self.cantor,
                                   show_progressbar=show_progressbar)
            return m
        assert self.measure is not None
        return validate_measure(self.measure)


def _field_path(error: ValidationError, prefix: str = "") -> tuple[str, str]:
    first = error.errors()[0]
    location = ".".join(str(part) for part in (prefix, *first["loc"])
                        if part != "")
    return location or "<root>", first["msg"]


def normalized_digest(spec: SignedMeasureSpec | CantorSpec) -> str:
    """SHA-256 of a canonical JSON rendition of `spec`."""
    kind = "cantor" if isinstance(spec, CantorSpec) else "measure"
    canonical = json.dumps({kind: spec.model_dump(mode="python")},
                           sort_keys=True,
                           separators=(",", ":"),
                           default=str)
    return hash_text(canonical)


def parse_spec(document: dict[str, Any], path: Path) -> LoadedSpec:
    """Validate an already decoded TOML document.

    Args:

      document (dict[str, Any]): The decoded tables.

      path (Path): Only used in error messages.

    Raises: `SpecFileError` naming the offending field.
    """
    unknown = set(document) - MEASURE_SECTIONS - {CANTOR_SECTION}
    if unknown:
        raise SpecFileError(str(path),
                            sorted(unknown)[0], "unknown section, expected "
                            f"one of {sorted(MEASURE_SECTIONS)} or [cantor]")
    if CANTOR_SECTION in document:
        if set(document) & MEASURE_SECTIONS:
            raise SpecFileError(str(path), CANTOR_SECTION,
                                "a Cantor structure cannot be combined with "
                                "measure sections")
        try:
            cantor = CantorSpec.model_validate(document[CANTOR_SECTION])
        except ValidationError as error:
            raise SpecFileError(str(path),
                                *_field_path(error, CANTOR_SECTION)) from error
        return LoadedSpec(path, None, cantor, normalized_digest(cantor))
    try:
        measure = SignedMeasureSpec.model_validate(document)
    except ValidationError as error:
        raise SpecFileError(str(path), *_field_path(error)) from error
    return LoadedSpec(path, measure, None, normalized_digest(measure))


def loads_spec(text: str, path: Path = Path("<string>")) -> LoadedSpec:
    """Parse a spec given as TOML text.

    Raises: `SpecFileError` with the line and column of syntax errors or the
    dotted path of the invalid field.
    """
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as error:
        found = _TOML_POSITION.search(str(error))
        location = (f"line {found[1]}, column {found[2]}"
                    if found else "syntax")
        reason = _TOML_POSITION.sub("", str(error)).strip()
        raise SpecFileError(str(path), location, reason) from error
    return parse_spec(document, path)


def load_spec(path: Path) -> LoadedSpec:
    """Read and validate the spec file at `path`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as error:
        raise SpecFileError(str(path), "file", str(error)) from error
    loaded = loads_spec(text, Path(path))
    _logger.info("Loaded %s (%s)", path, loaded.digest[:12])
    return loaded

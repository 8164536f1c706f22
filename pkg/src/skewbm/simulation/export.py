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
"""Delimiter-separated export of paths and statistics."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Any, Mapping, Sequence

from skewbm.simulation.ensemble import PathEnsemble


def write_paths(e: PathEnsemble, path: str | Path, delimiter: str = ",") -> None:
    """One row per (path, saved time) with columns path_id, t, x."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, delimiter=delimiter)
        writer.writerow(["path_id", "t", "x"])
        for path_id, row in enumerate(e.paths):
            for t, x in zip(e.times, row):
                writer.writerow([path_id, repr(float(t)), repr(float(x))])


def write_statistics(rows: Sequence[Mapping[str, Any]],
                     path: str | Path,
                     delimiter: str = ",") -> None:
    """Statistics rows, e.g., name, estimate, stderr, sharing their keys."""
    if not rows:
        raise ValueError("No statistics to write")
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle,
                                fieldnames=list(rows[0]),
                                delimiter=delimiter)
        writer.writeheader()
        writer.writerows(rows)

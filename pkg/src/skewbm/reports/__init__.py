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
"""Spec files, analysis pipelines and persistent reports."""

from skewbm.reports.analysis import AnalysisRun
from skewbm.reports.analysis import analyze_measure
from skewbm.reports.analysis import density_rows
from skewbm.reports.analysis import effective_rows
from skewbm.reports.analysis import study_cantor
from skewbm.reports.metadata import AnalysisReport
from skewbm.reports.metadata import CantorStudy
from skewbm.reports.metadata import load_report
from skewbm.reports.metadata import save_report
from skewbm.reports.render import render_analysis
from skewbm.reports.render import render_cantor
from skewbm.reports.spec_file import LoadedSpec
from skewbm.reports.spec_file import load_spec
from skewbm.reports.spec_file import loads_spec

__all__ = [
    "AnalysisReport",
    "AnalysisRun",
    "CantorStudy",
    "LoadedSpec",
    "analyze_measure",
    "density_rows",
    "effective_rows",
    "load_report",
    "load_spec",
    "loads_spec",
    "render_analysis",
    "render_cantor",
    "save_report",
    "study_cantor",
]

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
"""Human-readable rendering of reports for the terminal."""

from tabulate import tabulate
from termcolor import colored

from skewbm.reports.metadata import AnalysisReport, CantorStudy

_COLORS: dict[str, str] = {
    "true": "green",
    "false": "red",
    "unknown": "yellow",
    "real": "cyan",
    "pseudo": "green",
    "nonsensical": "red",
    "conservative": "green",
    "explodes": "red",
    "semimartingale": "green",
    "not_semimartingale": "red",
    "unique": "green",
    "infinitely_many_irreducible": "cyan",
}


def verdict(value: str, color: bool = True) -> str:
    """`value` coloured by what it means, plain when `color` is False."""
    if not color or value not in _COLORS:
        return value
    return colored(value, _COLORS[value])


def render_analysis(report: AnalysisReport, color: bool = True) -> str:
    """Tables of conditions, barriers and effective intervals."""
    blocks = [
        tabulate(
            [[
                f"({number})",
                verdict(c.holds, color), c.confidence, "; ".join(c.evidence)
            ] for number, c in sorted(report.conditions.items())],
            headers=["condition", "holds", "confidence", "evidence"]),
        tabulate(
            [
                ["exists", verdict(report.exists, color)],
                ["unique", verdict(report.unique, color)],
                ["irreducible", verdict(report.irreducible_exists, color)],
                ["confidence", report.confidence],
                ["intervals of G", report.interval_count],
            ],
            tablefmt="plain",
        ),
    ]
    if report.barriers:
        blocks.append(
            tabulate([[
                entry.z, entry.side,
                verdict(entry.label, color), entry.evidence.confidence,
                entry.evidence.rule
            ] for entry in report.barriers],
                     headers=["z", "side", "label", "confidence", "rule"]))
    blocks.extend(report.barrier_notes)
    if report.effective_intervals:
        blocks.append(
            tabulate([[
                "[" if row.closed_left else "(", row.lower, row.upper,
                "]" if row.closed_right else ")"
            ] for row in report.effective_intervals],
                     headers=["", "lower", "upper", ""]))
    if report.conservative is not None:
        blocks.append("conservative: " +
                      verdict(report.conservative.verdict, color))
    if report.semimartingale is not None:
        blocks.append("semimartingale: " +
                      verdict(report.semimartingale.verdict, color))
    blocks.extend(report.notes)
    return "\n\n".join(blocks)


def render_cantor(study: CantorStudy, color: bool = True) -> str:
    """The verdict followed by the gap census."""
    report = study.report
    header = tabulate(
        [
            ["verdict", verdict(report.verdict, color)],
            ["confidence", report.confidence],
            ["β range", report.beta_range],
            ["β", study.beta],
            ["|K|", report.complement_measure],
        ],
        tablefmt="plain",
    )
    census = tabulate(
        [[row.level, row.gaps, row.length, row.constant]
         for row in study.census],
        headers=["level", "gaps", "length", "c"],
    )
    return "\n\n".join([header, census, *report.notes])

"""
Report writer and reader.

This module renders mean-rank, natural-extension, tower and Smith
normal form results as JSON, CSV or text.

The JSON form is the machine-readable one:
- keys are sorted and rationals are ``{"num": n, "den": d}`` objects
- everything except the ``timing`` section is deterministic
- :func:`load_report` reconstructs the result objects exactly

The CSV form is the rank-sequence hand-off for plotting, one row per
computed term with the ratio ``a_n / n`` as an exact fraction and as a
decimal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from io import StringIO
from pathlib import Path
from typing import TYPE_CHECKING, Any

import pandas as pd

from mdim_algebraic.exceptions import ReportWriteError
from mdim_algebraic.linalg import IntMatrix, SmithDecomposition
from mdim_algebraic.natext import NatextReport, TowerReport
from mdim_algebraic.trajectory import MeanRankReport, RankStatus, ScheduleEntry

if TYPE_CHECKING:
    from typing import TextIO

Result = MeanRankReport | NatextReport | TowerReport | SmithDecomposition

RULE = "=" * 70
THIN_RULE = "-" * 70


class ReportFormat(Enum):
    """Output formats."""

    JSON = "json"
    CSV = "csv"
    TEXT = "text"


@dataclass
class ReportDocument:
    """A complete report.

    Attributes:
        command: The CLI command that produced the result.
        input: Echo of the input (spec name and decoded spec).
        result: The result object.
        timing: Wall-clock and resource counters, excluded from determinism.
    """

    command: str
    input: dict[str, Any]
    result: Result
    timing: dict[str, Any] = field(default_factory=dict)


# -- dict conversion --------------------------------------------------


def rational_to_dict(value: Fraction | None) -> dict[str, int] | None:
    if value is None:
        return None
    return {"num": value.numerator, "den": value.denominator}


def rational_from_dict(value: dict[str, int] | None) -> Fraction | None:
    if value is None:
        return None
    return Fraction(value["num"], value["den"])


def _entry_to_dict(entry: ScheduleEntry) -> dict[str, Any]:
    return {
        "index": entry.index,
        "size": entry.size,
        "rank_sequence": list(entry.rank_sequence),
        "upper_bound": rational_to_dict(entry.upper_bound),
        "estimate": rational_to_dict(entry.estimate),
        "status": entry.status.value,
        "reason": entry.reason,
    }


def _entry_from_dict(data: dict[str, Any]) -> ScheduleEntry:
    upper = rational_from_dict(data["upper_bound"])
    assert upper is not None
    return ScheduleEntry(
        index=data["index"],
        size=data["size"],
        rank_sequence=tuple(data["rank_sequence"]),
        upper_bound=upper,
        estimate=rational_from_dict(data["estimate"]),
        status=RankStatus(data["status"]),
        reason=data["reason"],
    )


def _mean_rank_to_dict(report: MeanRankReport) -> dict[str, Any]:
    return {
        "type": "mean-rank",
        "label": report.label,
        "rank_sequence": list(report.rank_sequence),
        "increments": report.increments,
        "upper_bound": rational_to_dict(report.upper_bound),
        "estimate": rational_to_dict(report.estimate),
        "status": report.status.value,
        "ceiling": report.ceiling,
        "reason": report.reason,
        "schedule_trace": [_entry_to_dict(e) for e in report.schedule_trace],
        "parameters": dict(report.parameters),
        "citations": list(report.citations),
        "budget_exhausted": report.budget_exhausted,
    }


def _mean_rank_from_dict(data: dict[str, Any]) -> MeanRankReport:
    upper = rational_from_dict(data["upper_bound"])
    assert upper is not None
    return MeanRankReport(
        label=data["label"],
        rank_sequence=tuple(data["rank_sequence"]),
        upper_bound=upper,
        estimate=rational_from_dict(data["estimate"]),
        status=RankStatus(data["status"]),
        ceiling=data["ceiling"],
        reason=data["reason"],
        schedule_trace=tuple(_entry_from_dict(e) for e in data["schedule_trace"]),
        parameters=dict(data["parameters"]),
        citations=tuple(data["citations"]),
        budget_exhausted=data["budget_exhausted"],
    )


def report_to_dict(result: Result) -> dict[str, Any]:
    """Convert a result object to JSON-ready data."""
    if isinstance(result, MeanRankReport):
        return _mean_rank_to_dict(result)
    if isinstance(result, NatextReport):
        return {
            "type": "natural-extension",
            "legs": [{"leg": name, "report": _mean_rank_to_dict(r)} for name, r in result.legs],
            "verdict": result.verdict,
            "kernel_exponent": result.kernel_exponent,
            "citations": list(result.citations),
        }
    if isinstance(result, TowerReport):
        return {
            "type": "tower",
            "levels": [_mean_rank_to_dict(r) for r in result.levels],
            "running_supremum": [rational_to_dict(x) for x in result.running_supremum],
            "supremum": rational_to_dict(result.supremum),
            "status": result.status.value,
            "citations": list(result.citations),
        }
    return {
        "type": "smith-normal-form",
        "u": result.u.to_rows(),
        "d": result.d.to_rows(),
        "v": result.v.to_rows(),
        "shape": [result.d.rows, result.d.cols],
        "diagonal": list(result.diagonal),
    }


def report_from_dict(data: dict[str, Any]) -> Result:
    """Inverse of :func:`report_to_dict`.

    Raises:
        ValueError: If the result type is unknown.
    """
    kind = data.get("type")
    if kind == "mean-rank":
        return _mean_rank_from_dict(data)
    if kind == "natural-extension":
        return NatextReport(
            legs=tuple((leg["leg"], _mean_rank_from_dict(leg["report"])) for leg in data["legs"]),
            verdict=data["verdict"],
            kernel_exponent=data["kernel_exponent"],
            citations=tuple(data["citations"]),
        )
    if kind == "tower":
        return TowerReport(
            levels=tuple(_mean_rank_from_dict(r) for r in data["levels"]),
            supremum=rational_from_dict(data["supremum"]),
            status=RankStatus(data["status"]),
            citations=tuple(data["citations"]),
        )
    if kind == "smith-normal-form":
        rows, cols = data["shape"]
        return SmithDecomposition(
            u=IntMatrix.from_rows(data["u"], rows),
            d=IntMatrix.from_rows(data["d"], cols),
            v=IntMatrix.from_rows(data["v"], cols),
            diagonal=tuple(data["diagonal"]),
        )
    raise ValueError(f"Unknown report type: {kind!r}")


def load_report(content: str) -> ReportDocument:
    """Parse a JSON report back into a :class:`ReportDocument`."""
    data = json.loads(content)
    return ReportDocument(
        command=data["command"],
        input=data["input"],
        result=report_from_dict(data["result"]),
        timing=data.get("timing", {}),
    )


# -- tables -----------------------------------------------------------


def sequence_frame(report: MeanRankReport) -> pd.DataFrame:
    """One row per term: ``n``, ``a_n``, the exact ratio and its decimal."""
    ratios = [Fraction(a, n) for n, a in enumerate(report.rank_sequence, start=1)]
    return pd.DataFrame(
        {
            "n": list(range(1, len(report.rank_sequence) + 1)),
            "a_n": list(report.rank_sequence),
            "ratio": [f"{r.numerator}/{r.denominator}" for r in ratios],
            "ratio_decimal": [f"{r.numerator / r.denominator:.6f}" for r in ratios],
        }
    )


def result_frame(result: Result) -> pd.DataFrame:
    """Rank sequences of a result as one table."""
    if isinstance(result, MeanRankReport):
        return sequence_frame(result)
    if isinstance(result, NatextReport):
        frames = [sequence_frame(r).assign(leg=name) for name, r in result.legs]
        return pd.concat(frames, ignore_index=True)[["leg", "n", "a_n", "ratio", "ratio_decimal"]]
    if isinstance(result, TowerReport):
        frames = [sequence_frame(r).assign(level=i) for i, r in enumerate(result.levels)]
        return pd.concat(frames, ignore_index=True)[["level", "n", "a_n", "ratio", "ratio_decimal"]]
    return pd.DataFrame(
        {"i": list(range(1, len(result.diagonal) + 1)), "d_i": list(result.diagonal)}
    )


class ReportWriter:
    """Writer for reports.

    Example:
        >>> writer = ReportWriter(ReportFormat.JSON)
        >>> writer.write_file(document, "report.json")
    """

    def __init__(self, fmt: ReportFormat | str = ReportFormat.JSON) -> None:
        """Initialize the writer.

        Args:
            fmt: Output format, as a ReportFormat or its string value.
        """
        self.format = ReportFormat(fmt)

    def write_file(self, document: ReportDocument, filepath: str | Path) -> None:
        """Write a report to disk.

        Raises:
            ReportWriteError: If writing fails.
        """
        filepath = Path(filepath)
        try:
            with filepath.open("w", encoding="utf-8", newline="") as f:
                self.write(document, f)
        except OSError as e:
            raise ReportWriteError(f"Failed to write report: {e}") from e

    def write_string(self, document: ReportDocument) -> str:
        """Render a report to a string."""
        buffer = StringIO()
        self.write(document, buffer)
        return buffer.getvalue()

    def write(self, document: ReportDocument, file_obj: TextIO) -> None:
        """Write a report to a file-like object."""
        if self.format is ReportFormat.JSON:
            self._write_json(document, file_obj)
        elif self.format is ReportFormat.CSV:
            result_frame(document.result).to_csv(file_obj, index=False, lineterminator="\n")
        else:
            self._write_text(document, file_obj)

    def _write_json(self, document: ReportDocument, file_obj: TextIO) -> None:
        payload = {
            "command": document.command,
            "input": document.input,
            "result": report_to_dict(document.result),
            "timing": document.timing,
        }
        json.dump(payload, file_obj, sort_keys=True, indent=2)
        file_obj.write("\n")

    def _write_text(self, document: ReportDocument, file_obj: TextIO) -> None:
        out = file_obj.write
        out(f"{RULE}\n")
        title = document.input.get("name") or document.command
        out(f"{document.command.upper()}: {title}\n")
        out(f"{RULE}\n\n")
        result = document.result
        if isinstance(result, MeanRankReport):
            self._text_mean_rank(result, out)
        elif isinstance(result, NatextReport):
            for name, leg in result.legs:
                out(f"LEG {name.upper()}:\n{THIN_RULE}\n")
                self._text_mean_rank(leg, out)
            out(f"Verdict: {result.verdict}\n")
            out(f"Eventual kernel exponent: {result.kernel_exponent}\n\n")
            self._text_citations(result.citations, out)
        elif isinstance(result, TowerReport):
            for i, level in enumerate(result.levels):
                out(f"LEVEL {i}:\n{THIN_RULE}\n")
                self._text_mean_rank(level, out)
            out(f"Supremum over provided levels: {_fmt(result.supremum)}\n")
            out(f"Status: {result.status.value}\n\n")
            self._text_citations(result.citations, out)
        else:
            out(f"U:\n{result.u}\n\nD:\n{result.d}\n\nV:\n{result.v}\n\n")
            out(f"Divisors: ({', '.join(str(x) for x in result.diagonal)})\n")
        if document.timing:
            out(f"\nTIMING:\n{THIN_RULE}\n")
            for key in sorted(document.timing):
                out(f"  {key}: {document.timing[key]}\n")

    def _text_mean_rank(self, report: MeanRankReport, out: Any) -> None:
        out(f"  {report.label}\n")
        out(f"  Estimate:    {_fmt(report.estimate)}\n")
        out(f"  Status:      {report.status.value} ({report.reason})\n")
        out(f"  Upper bound: {_fmt(report.upper_bound)}\n")
        head = ", ".join(str(a) for a in report.rank_sequence[:12])
        more = ", ..." if len(report.rank_sequence) > 12 else ""
        out(f"  a_n:         {head}{more}\n")
        for entry in report.schedule_trace:
            out(
                f"    E_{entry.index:<3} |E|={entry.size:<4} "
                f"{_fmt(entry.estimate):<10} {entry.status.value}\n"
            )
        out("\n")
        if report.citations:
            self._text_citations(report.citations, out)

    def _text_citations(self, citations: tuple[str, ...], out: Any) -> None:
        for citation in citations:
            out(f"  * {citation}\n")
        out("\n")


def _fmt(value: Fraction | None) -> str:
    if value is None:
        return "unresolved"
    return str(value)

"""
System spec file parser.

Spec files are TOML documents describing one system and its budgets.
Matrices are written row-major as nested integer lists; relation lattices
are given as a list of columns.

Example cellular automaton spec:
    kind = "cellular-automaton"
    name = "ledrappier"

    [automaton]
    d = 1
    support = [0, 1]

    [automaton.coefficients]
    "0" = [[1]]
    "1" = [[1]]

    [schedule]
    max_n = 64
    max_window = 8

Example matrix endomorphism spec:
    kind = "matrix-endo"

    [group]
    generators = 2
    relations = []

    [endomorphism]
    matrix = [[0, 1], [0, 0]]

A tower lists its levels as ``[[levels]]`` tables (each with a ``kind`` and
the fields of that kind inline) and a top-level ``connecting`` list of
matrices, the n-th mapping level n+1 onto level n.
"""

from __future__ import annotations

import re
import tomllib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any

from mdim_algebraic.abelian import GroupPresentation, PresEndomorphism
from mdim_algebraic.cellular import CASpec
from mdim_algebraic.exceptions import DimensionMismatchError, SpecParseError
from mdim_algebraic.linalg import IntMatrix
from mdim_algebraic.natext import System, TowerSpec
from mdim_algebraic.trajectory import MeanRankParams

if TYPE_CHECKING:
    from typing import TextIO


class SpecKind(Enum):
    """Kinds of system a spec file can describe."""

    MATRIX_ENDO = "matrix-endo"
    CELLULAR_AUTOMATON = "cellular-automaton"
    TOWER = "tower"


@dataclass(frozen=True)
class ScheduleConfig:
    """The ``[schedule]`` table; every value is at least 1."""

    max_n: int = 64
    max_window: int = 8
    stabilization_window: int = 5
    stable_schedule_steps: int = 2

    def to_params(self, **overrides: Any) -> MeanRankParams:
        """Engine parameters, with None-valued overrides ignored."""
        values: dict[str, Any] = {
            "max_n": self.max_n,
            "max_window": self.max_window,
            "stabilization_window": self.stabilization_window,
            "stable_schedule_steps": self.stable_schedule_steps,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return MeanRankParams(**values)


@dataclass
class SystemSpecFile:
    """A parsed spec file.

    Attributes:
        kind: The system kind.
        name: Name from the file (or its stem).
        system: A CASpec, a PresEndomorphism or a TowerSpec.
        schedule: Budgets from the ``[schedule]`` table.
        raw: The decoded TOML document, echoed into reports.
    """

    kind: SpecKind
    name: str
    system: System | TowerSpec
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    raw: dict[str, Any] = field(default_factory=dict)


class SpecParser:
    """Parser for system spec files.

    Example:
        >>> parser = SpecParser()
        >>> spec = parser.parse_file("specs/unit-ca-d1.toml")
        >>> spec.kind
        <SpecKind.CELLULAR_AUTOMATON: 'cellular-automaton'>
    """

    _LOCATION_PATTERN = re.compile(r"at line (\d+), column (\d+)")
    _HEADER_PATTERN = re.compile(r"^\s*\[\[?\s*([A-Za-z0-9_.\"-]+)\s*\]\]?")

    def __init__(self) -> None:
        self._lines: list[str] = []

    def parse_file(self, filepath: str | Path) -> SystemSpecFile:
        """Parse a spec file from disk.

        Raises:
            FileNotFoundError: If the file does not exist.
            SpecParseError: If the file is malformed.
        """
        filepath = Path(filepath)
        if not filepath.exists():
            raise FileNotFoundError(f"Spec file not found: {filepath}")
        with filepath.open(encoding="utf-8") as f:
            spec = self.parse(f)
        if spec.name == "":
            spec.name = filepath.stem
        return spec

    def parse_string(self, content: str) -> SystemSpecFile:
        """Parse spec content from a string."""
        from io import StringIO

        return self.parse(StringIO(content))

    def parse(self, file_obj: TextIO) -> SystemSpecFile:
        """Parse spec content from a file-like object.

        Raises:
            SpecParseError: If the content is not valid TOML or does not
                describe a valid system.
            NotEndomorphismError: If a matrix does not preserve its relations.
        """
        content = file_obj.read()
        self._lines = content.splitlines()
        try:
            doc = tomllib.loads(content)
        except tomllib.TOMLDecodeError as e:
            line = getattr(e, "lineno", None)
            column = getattr(e, "colno", None)
            match = self._LOCATION_PATTERN.search(str(e))
            if line is None and match:
                line, column = int(match.group(1)), int(match.group(2))
            message = str(getattr(e, "msg", "")) or self._LOCATION_PATTERN.sub("", str(e)).strip(" ()")
            raise SpecParseError(f"Invalid TOML: {message}", line, column) from e

        kind = self._kind(doc.get("kind"), "kind")
        name = doc.get("name", "")
        if not isinstance(name, str):
            raise self._error("name must be a string", "name")
        schedule = self._schedule(doc.get("schedule", {}))

        if kind is SpecKind.CELLULAR_AUTOMATON:
            system: System | TowerSpec = self._automaton(self._table(doc, "automaton"), "automaton")
        elif kind is SpecKind.MATRIX_ENDO:
            system = self._endomorphism(
                self._table(doc, "group"), self._table(doc, "endomorphism"), "group", "endomorphism"
            )
        else:
            system = self._tower(doc)
        return SystemSpecFile(kind=kind, name=name, system=system, schedule=schedule, raw=doc)

    # -- helpers ------------------------------------------------------

    def _locate(self, key: str) -> int | None:
        """Best-effort line number of a dotted key in the source."""
        parts = key.split(".")
        leaf = parts[-1]
        section = ".".join(parts[:-1])
        start = 0
        if section:
            for i, line in enumerate(self._lines):
                header = self._HEADER_PATTERN.match(line)
                if header and header.group(1).strip('"') in (section, section.split(".")[0]):
                    start = i
                    break
        assignment = re.compile(rf'^\s*"?{re.escape(leaf)}"?\s*=')
        for i in range(start, len(self._lines)):
            if assignment.match(self._lines[i]):
                return i + 1
        for i, line in enumerate(self._lines):
            header = self._HEADER_PATTERN.match(line)
            if header and header.group(1).strip('"') == key:
                return i + 1
        return None

    def _error(self, message: str, key: str) -> SpecParseError:
        return SpecParseError(message, self._locate(key), key=key)

    def _kind(self, value: Any, key: str) -> SpecKind:
        if value is None:
            raise self._error("Missing 'kind'", key)
        try:
            return SpecKind(value)
        except ValueError:
            allowed = ", ".join(k.value for k in SpecKind)
            raise self._error(f"Unknown kind '{value}' (expected one of {allowed})", key) from None

    def _table(self, doc: dict[str, Any], key: str) -> dict[str, Any]:
        value = doc.get(key)
        if not isinstance(value, dict):
            raise self._error(f"Missing table [{key}]", key)
        return value

    def _int(self, value: Any, key: str, minimum: int | None = None) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self._error("Expected an integer", key)
        if minimum is not None and value < minimum:
            raise self._error(f"Value must be at least {minimum}", key)
        return value

    def _matrix(self, value: Any, key: str, rows: int | None = None, cols: int | None = None) -> IntMatrix:
        if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
            raise self._error("Expected a matrix written as a list of integer rows", key)
        for row in value:
            for x in row:
                self._int(x, key)
        try:
            matrix = IntMatrix.from_rows(value, cols)
        except DimensionMismatchError as e:
            raise self._error(e.message if not e.details else str(e), key) from e
        if (rows is not None and matrix.rows != rows) or (cols is not None and matrix.cols != cols):
            raise self._error(
                f"Expected a {rows}x{cols} matrix, got {matrix.rows}x{matrix.cols}", key
            )
        return matrix

    def _schedule(self, table: Any) -> ScheduleConfig:
        if not isinstance(table, dict):
            raise self._error("[schedule] must be a table", "schedule")
        allowed = {"max_n", "max_window", "stabilization_window", "stable_schedule_steps"}
        unknown = sorted(set(table) - allowed)
        if unknown:
            raise self._error(f"Unknown schedule key '{unknown[0]}'", f"schedule.{unknown[0]}")
        values = {k: self._int(v, f"schedule.{k}", minimum=1) for k, v in table.items()}
        return ScheduleConfig(**values)

    def _automaton(self, table: dict[str, Any], prefix: str) -> CASpec:
        d = self._int(table.get("d"), f"{prefix}.d", minimum=1)
        support_raw = table.get("support")
        if not isinstance(support_raw, list) or not support_raw:
            raise self._error("support must be a nonempty list of integers", f"{prefix}.support")
        support = [self._int(j, f"{prefix}.support") for j in support_raw]
        if len(set(support)) != len(support):
            duplicates = sorted({j for j in support if support.count(j) > 1})
            raise self._error(f"Duplicate support index {duplicates[0]}", f"{prefix}.support")
        coefficients = table.get("coefficients")
        if not isinstance(coefficients, dict):
            raise self._error("coefficients must be a table keyed by support index", f"{prefix}.coefficients")
        keyed: dict[int, Any] = {}
        for raw_key, rows in coefficients.items():
            try:
                index = int(raw_key)
            except ValueError:
                raise self._error(f"Coefficient key '{raw_key}' is not an integer", f"{prefix}.coefficients") from None
            keyed[index] = rows
        if set(keyed) != set(support):
            raise self._error(
                f"Coefficient indices {sorted(keyed)} do not match support {sorted(support)}",
                f"{prefix}.coefficients",
            )
        matrices = tuple(
            self._matrix(keyed[j], f"{prefix}.coefficients.{j}", d, d) for j in support
        )
        try:
            return CASpec(d, tuple(support), matrices)
        except (ValueError, DimensionMismatchError) as e:
            raise self._error(str(e), prefix) from e

    def _endomorphism(
        self, group: dict[str, Any], endo: dict[str, Any], group_key: str, endo_key: str
    ) -> PresEndomorphism:
        g = self._int(group.get("generators"), f"{group_key}.generators", minimum=0)
        relations_raw = group.get("relations", [])
        if not isinstance(relations_raw, list):
            raise self._error("relations must be a list of columns", f"{group_key}.relations")
        columns = [self._matrix([col], f"{group_key}.relations", 1, g).row(0) for col in relations_raw]
        relations = IntMatrix.from_columns(columns, g)
        matrix = self._matrix(endo.get("matrix"), f"{endo_key}.matrix", g, g) if g else IntMatrix.zeros(0, 0)
        return PresEndomorphism(GroupPresentation(g, relations), matrix)

    def _tower(self, doc: dict[str, Any]) -> TowerSpec:
        levels_raw = doc.get("levels")
        if not isinstance(levels_raw, list) or not levels_raw:
            raise self._error("A tower needs a nonempty [[levels]] array", "levels")
        levels: list[System] = []
        for n, level in enumerate(levels_raw):
            key = f"levels.{n}"
            if not isinstance(level, dict):
                raise self._error("Each level must be a table", "levels")
            kind = self._kind(level.get("kind"), "kind")
            if kind is SpecKind.CELLULAR_AUTOMATON:
                levels.append(self._automaton(level, key))
            elif kind is SpecKind.MATRIX_ENDO:
                levels.append(self._endomorphism(level, level, key, key))
            else:
                raise self._error("Towers cannot be nested", key)
        connecting_raw = doc.get("connecting", [])
        if not isinstance(connecting_raw, list):
            raise self._error("connecting must be a list of matrices", "connecting")
        connecting = [self._matrix(m, "connecting") for m in connecting_raw]
        try:
            return TowerSpec(tuple(levels), tuple(connecting))
        except DimensionMismatchError as e:
            raise self._error(str(e), "connecting") from e


def parse_matrix_literal(text: str) -> IntMatrix:
    """Parse a JSON-style matrix literal such as ``[[2, 4], [6, 8]]``.

    Raises:
        SpecParseError: If the literal is not a rectangular integer matrix.
    """
    import json

    try:
        value = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecParseError(f"Invalid matrix literal: {e.msg}", e.lineno, e.colno) from e
    if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
        raise SpecParseError("Matrix literal must be a list of rows")
    if any(isinstance(x, bool) or not isinstance(x, int) for r in value for x in r):
        raise SpecParseError("Matrix entries must be integers")
    try:
        return IntMatrix.from_rows(value)
    except DimensionMismatchError as e:
        raise SpecParseError(str(e)) from e

"""
Machine-readable reports.
A report is one JSON document per run; the same values can be flattened to CSV tables.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from . import settings
from .util import round_floats


@dataclass(frozen=True)
class Table:
    name: str
    header: Sequence[str]
    rows: List[Sequence[Any]]


@dataclass(frozen=True)
class Report:
    command: str
    manifest_digest: str
    payload: Dict[str, Any]
    tables: List[Table] = field(default_factory=list)
    tool_version: str = settings.TOOL_VERSION

    def to_dict(self, round_digits: Optional[int] = None) -> Dict[str, Any]:
        payload = self.payload if round_digits is None else round_floats(self.payload, round_digits)
        return {
            "tool": settings.TOOL_NAME,
            "version": self.tool_version,
            "manifest_digest": self.manifest_digest,
            "command": self.command,
            "payload": payload,
        }

    def to_json(self, round_digits: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(round_digits), indent=2, ensure_ascii=False) + "\n"

    def to_csv(self, round_digits: Optional[int] = None) -> str:
        """Every table as a CSV block headed by `# <name>`; report metadata comes first."""
        out = io.StringIO()
        out.write(f"# {settings.TOOL_NAME} {self.tool_version} {self.command} {self.manifest_digest}\n")
        for table in self.tables:
            out.write(f"# {table.name}\n")
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(table.header)
            for row in table.rows:
                cells = row if round_digits is None else round_floats(list(row), round_digits)
                writer.writerow(["" if c is None else _cell(c) for c in cells])
        return out.getvalue()


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    # repr keeps full float precision
    return repr(value) if isinstance(value, float) else str(value)


def parse_csv(text: str) -> Dict[str, List[Dict[str, str]]]:
    """Read to_csv output back into {table name: [row dicts]}."""
    blocks: Dict[str, List[List[str]]] = {}
    current = None
    for row in csv.reader(io.StringIO(text)):
        if len(row) == 1 and row[0].startswith("# "):
            current = row[0][2:]
            blocks[current] = []
        elif current is not None:
            blocks[current].append(row)
    # the metadata block has no header row and is skipped
    return {
        name: [dict(zip(rows[0], r)) for r in rows[1:]]
        for name, rows in blocks.items()
        if rows
    }

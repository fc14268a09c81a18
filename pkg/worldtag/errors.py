"""
Exception hierarchy for worldtag.
Library code raises these; only the command line turns them into exit statuses.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, List, Optional

if TYPE_CHECKING:
    from .tag_parser import AlignmentReport, ParseDiagnostic


class WorldtagError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_status = 1


class UsageError(WorldtagError):
    """Bad arguments: k out of range, threshold outside (0, 1], too few documents."""

    exit_status = 2


class SpanOffsetError(WorldtagError):
    pass


class EmptyInputError(WorldtagError):
    pass


class UnsupportedKindError(WorldtagError):
    pass


class ManifestError(WorldtagError):
    pass


class ParseError(WorldtagError):
    """Raised when an annotation file has error-severity diagnostics."""

    def __init__(self, annotator_id: str, diagnostics: List["ParseDiagnostic"]):
        self.annotator_id = annotator_id
        self.diagnostics = diagnostics
        errors = [d for d in diagnostics if d.severity == "error"]
        first = errors[0] if errors else None
        detail = f"; first: {first.code} at offset {first.offset}" if first else ""
        super().__init__(f"{annotator_id}: {len(errors)} parse error(s){detail}")


class AlignmentError(WorldtagError):
    """Raised when annotations do not share one plain text."""

    def __init__(self, report: "AlignmentReport"):
        self.report = report
        div = report.first_divergence
        where = f" ({div[0]} vs {div[1]} at offset {div[2]})" if div else ""
        super().__init__(f"annotations are not aligned{where}")


class SidecarError(WorldtagError):
    """Malformed POS sidecar row; carries the 1-based line number."""

    def __init__(self, line: int, message: str, path: Optional[str] = None):
        self.line = line
        self.path = path
        prefix = f"{path}:" if path else "line "
        super().__init__(f"{prefix}{line}: {message}")

"""
Reader and writer for the inline tag markup used by the annotators.

The markup is not XML: only `<X>` / `</X>` with X one of T<n>, c<n>, p<n>, t[n], s[n]
is recognised. Anything else between angle brackets stays in the text as a literal
and produces a BadTagName warning. A recognised tag with element id 0 is a
BadTagName error.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import settings
from .errors import AlignmentError, ParseError, UsageError
from .model import AnnotatedDocument, Span, TagKind

log = logging.getLogger(__name__)

TAG_RE = re.compile(r"<(/?)(T\d+|c\d+|p\d+|t\d*|s\d*)>")
ANGLE_RE = re.compile(r"<[^<>]*>")

ERROR = "error"
WARNING = "warning"

# Diagnostic codes
UNCLOSED_TAG = "UnclosedTag"
UNEXPECTED_CLOSE = "UnexpectedClose"
CROSSING_TAGS = "CrossingTags"
BAD_TAG_NAME = "BadTagName"
DUPLICATE_OPEN = "DuplicateOpen"
EMPTY_SPAN = "EmptySpan"


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str
    offset: int
    code: str
    excerpt: str
    annotator_id: str = ""

    def to_dict(self) -> Dict[str, object]:
        return {
            "annotator": self.annotator_id,
            "severity": self.severity,
            "offset": self.offset,
            "code": self.code,
            "excerpt": self.excerpt,
        }


@dataclass(frozen=True)
class AlignmentReport:
    aligned: bool
    lengths: Dict[str, int] = field(default_factory=dict)
    # (annotator a, annotator b, character offset)
    first_divergence: Optional[Tuple[str, str, int]] = None

    def to_dict(self) -> Dict[str, object]:
        div = self.first_divergence
        return {
            "aligned": self.aligned,
            "first_divergence": None if div is None else {"pair": [div[0], div[1]], "offset": div[2]},
            "lengths": dict(self.lengths),
        }


def _excerpt(raw: str, offset: int) -> str:
    return raw[offset:offset + settings.EXCERPT_LENGTH]


def _parse_tag(name: str) -> Tuple[TagKind, Optional[int]]:
    kind = TagKind.from_letter(name[0])
    return kind, (int(name[1:]) if len(name) > 1 else None)


def strip_bom(raw: str) -> str:
    return raw[1:] if raw.startswith("\ufeff") else raw


def parse_annotation(raw: str, annotator_id: str) -> Union[AnnotatedDocument, List[ParseDiagnostic]]:
    """Parse inline-tagged text into a document.

    Returns the document, or the full diagnostic list when any error was found.
    Warnings of a successful parse are logged; use `parse_with_diagnostics` to get them.
    """
    doc, diagnostics = parse_with_diagnostics(raw, annotator_id)
    if doc is None:
        return diagnostics
    for diag in diagnostics:
        log.warning("%s: %s at offset %d: %r", annotator_id, diag.code, diag.offset, diag.excerpt)
    return doc


def parse_with_diagnostics(raw: str, annotator_id: str) -> Tuple[Optional[AnnotatedDocument], List[ParseDiagnostic]]:
    raw = strip_bom(raw)
    diagnostics: List[ParseDiagnostic] = []

    def report(severity: str, offset: int, code: str) -> None:
        diagnostics.append(ParseDiagnostic(severity, offset, code, _excerpt(raw, offset), annotator_id))

    text_parts: List[str] = []
    text_len = 0
    # open tags: (tag name, raw offset, plain-text start)
    stack: List[Tuple[str, int, int]] = []
    spans: List[Span] = []
    pos = 0

    for m in ANGLE_RE.finditer(raw):
        tag = TAG_RE.fullmatch(m.group(0))
        if tag is None:
            report(WARNING, m.start(), BAD_TAG_NAME)
            continue
        chunk = raw[pos:m.start()]
        text_parts.append(chunk)
        text_len += len(chunk)
        pos = m.end()

        closing, name = tag.group(1) == "/", tag.group(2)
        kind, element_id = _parse_tag(name)
        if element_id == 0:
            # ids count from 1
            report(ERROR, m.start(), BAD_TAG_NAME)
            continue
        if not closing:
            if any(open_name == name for open_name, _, _ in stack):
                report(ERROR, m.start(), DUPLICATE_OPEN)
                continue
            stack.append((name, m.start(), text_len))
            continue

        depth = next((i for i in range(len(stack) - 1, -1, -1) if stack[i][0] == name), None)
        if depth is None:
            report(ERROR, m.start(), UNEXPECTED_CLOSE)
            continue
        if depth != len(stack) - 1:
            report(ERROR, m.start(), CROSSING_TAGS)
            del stack[depth]
            continue
        _, open_offset, start = stack.pop()
        if start == text_len:
            report(WARNING, open_offset, EMPTY_SPAN)
            continue
        spans.append(Span(kind, start, text_len, element_id))

    text_parts.append(raw[pos:])
    for _, open_offset, _ in stack:
        report(ERROR, open_offset, UNCLOSED_TAG)

    diagnostics.sort(key=lambda d: (d.offset, d.code))
    if any(d.severity == ERROR for d in diagnostics):
        return None, diagnostics
    return AnnotatedDocument.create(annotator_id, "".join(text_parts), spans), diagnostics


def read_annotation(path: Union[str, Path], annotator_id: str) -> AnnotatedDocument:
    """Read a UTF-8 annotation file; raises ParseError on error diagnostics."""
    raw = Path(path).read_text(encoding="utf-8")
    doc, diagnostics = parse_with_diagnostics(raw, annotator_id)
    if doc is None:
        raise ParseError(annotator_id, diagnostics)
    for diag in diagnostics:
        log.warning("%s: %s at offset %d: %r", annotator_id, diag.code, diag.offset, diag.excerpt)
    log.info("Parsed %s: %d characters, %d spans", path, len(doc.plain_text), len(doc.spans))
    return doc


def serialize(doc: AnnotatedDocument) -> str:
    """Re-insert tags into the plain text.

    Spans are already in canonical order, so at equal offsets the longer span (or the
    earlier kind, T before c, p, t, s) opens first and closes last.
    """
    out: List[str] = []
    text = doc.plain_text
    pos = 0
    stack: List[Span] = []

    def close_until(offset: int) -> None:
        nonlocal pos
        while stack and stack[-1].end <= offset:
            top = stack.pop()
            out.append(text[pos:top.end])
            out.append(f"</{top.tag_name}>")
            pos = top.end

    for span in doc.spans:
        close_until(span.start)
        out.append(text[pos:span.start])
        out.append(f"<{span.tag_name}>")
        pos = span.start
        stack.append(span)
    close_until(len(text))
    out.append(text[pos:])
    return "".join(out)


def normalize_newlines(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


def validate_alignment(docs: Sequence[AnnotatedDocument]) -> AlignmentReport:
    """Check that every document carries the same plain text (modulo line endings).

    On mismatch, the first divergent pair in lexicographic annotator order and the first
    differing offset of the normalized texts are reported.
    """
    if len(docs) < 2:
        raise UsageError("alignment needs at least 2 documents")
    normalized = {d.annotator_id: normalize_newlines(d.plain_text) for d in docs}
    lengths = {d.annotator_id: len(d.plain_text) for d in docs}
    ids = sorted(normalized)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            ta, tb = normalized[a], normalized[b]
            if ta == tb:
                continue
            offset = next((k for k, (x, y) in enumerate(zip(ta, tb)) if x != y), min(len(ta), len(tb)))
            log.info("Texts of %s and %s diverge at offset %d", a, b, offset)
            return AlignmentReport(False, lengths, (a, b, offset))
    return AlignmentReport(True, lengths)


def ensure_aligned(docs: Sequence[AnnotatedDocument]) -> AlignmentReport:
    """validate_alignment that raises AlignmentError instead of returning a negative report."""
    report = validate_alignment(docs)
    if not report.aligned:
        raise AlignmentError(report)
    return report

"""
Shared document model: tag kinds, spans, annotated documents and tokens.
Every other module works on these types; all of them are immutable.
"""

from __future__ import annotations

import unicodedata
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from itertools import groupby
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from . import settings
from .errors import SpanOffsetError


class TagKind(Enum):
    TEXT_WORLD = "TextWorld"
    CHARACTER = "Character"
    PLACE = "Place"
    TIME = "Time"
    SWITCH = "Switch"

    @property
    def letter(self) -> str:
        """Tag name prefix used in the inline markup."""
        return _LETTERS[self]

    @property
    def rank(self) -> int:
        """Nesting preference at equal extents: text worlds outermost."""
        return _RANKS[self]

    @property
    def requires_id(self) -> bool:
        return self in (TagKind.TEXT_WORLD, TagKind.CHARACTER, TagKind.PLACE)

    @classmethod
    def from_letter(cls, letter: str) -> "TagKind":
        try:
            return _BY_LETTER[letter]
        except KeyError:
            raise ValueError(f"unknown tag letter {letter!r}") from None

    @classmethod
    def parse(cls, name: str) -> "TagKind":
        """Accept a value ("Character"), a member name or a CLI word ("character")."""
        for kind in cls:
            if name in (kind.value, kind.name) or name.lower() == kind.value.lower():
                return kind
        raise ValueError(f"unknown tag kind {name!r}")


_LETTERS = {
    TagKind.TEXT_WORLD: "T",
    TagKind.CHARACTER: "c",
    TagKind.PLACE: "p",
    TagKind.TIME: "t",
    TagKind.SWITCH: "s",
}
_BY_LETTER = {letter: kind for kind, letter in _LETTERS.items()}
_RANKS = {kind: i for i, kind in enumerate(_LETTERS)}


@dataclass(frozen=True)
class Span:
    """A tagged region [start, end) of the plain text."""

    kind: TagKind
    start: int
    end: int
    element_id: Optional[int] = None
    ordinal: int = 0

    @property
    def tag_name(self) -> str:
        suffix = "" if self.element_id is None else str(self.element_id)
        return f"{self.kind.letter}{suffix}"

    def sort_key(self) -> Tuple[int, int, int, int]:
        return (self.start, -self.end, self.kind.rank, -1 if self.element_id is None else self.element_id)

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class Token:
    index: int
    start: int
    end: int
    surface: str


@dataclass(frozen=True)
class TokenizerOptions:
    split_punctuation: bool = settings.SPLIT_PUNCTUATION
    punctuation_runs: bool = settings.PUNCTUATION_RUNS

    @classmethod
    def from_settings(cls) -> "TokenizerOptions":
        # read at call time so a settings.json overlay is honoured
        return cls(settings.SPLIT_PUNCTUATION, settings.PUNCTUATION_RUNS)


@dataclass(frozen=True)
class AnnotatedDocument:
    """One annotator's copy of the shared text.

    Spans are kept in canonical order (start asc, end desc, kind, element id) and must be
    well-nested; ordinals count 1..K per kind in that order. Use `create` to build a
    document from spans whose ordinals are not yet assigned.
    """

    annotator_id: str
    plain_text: str
    spans: Tuple[Span, ...] = field(default_factory=tuple)

    def __post_init__(self):
        n = len(self.plain_text)
        for span in self.spans:
            if not 0 <= span.start < span.end <= n:
                raise SpanOffsetError(
                    f"{self.annotator_id}: span {span.tag_name} ({span.start}, {span.end}) "
                    f"outside text of length {n}"
                )
            if span.element_id is None and span.kind.requires_id:
                raise ValueError(f"{self.annotator_id}: {span.kind.value} span ({span.start}, {span.end}) needs an element id")
            if span.element_id is not None and span.element_id <= 0:
                raise ValueError(f"{self.annotator_id}: element id must be positive, got {span.element_id}")
        keys = [s.sort_key() for s in self.spans]
        if keys != sorted(keys):
            raise ValueError(f"{self.annotator_id}: spans are not in canonical order")
        _check_nesting(self.annotator_id, self.spans)
        seen: Dict[TagKind, int] = {}
        for span in self.spans:
            expected = seen.get(span.kind, 0) + 1
            if span.ordinal != expected:
                raise ValueError(
                    f"{self.annotator_id}: {span.kind.value} ordinal {span.ordinal}, expected {expected}"
                )
            seen[span.kind] = expected

    @classmethod
    def create(cls, annotator_id: str, plain_text: str, spans: Iterable[Span]) -> "AnnotatedDocument":
        ordered = sorted(spans, key=Span.sort_key)
        counters: Dict[TagKind, int] = {}
        numbered = []
        for span in ordered:
            counters[span.kind] = counters.get(span.kind, 0) + 1
            numbered.append(replace(span, ordinal=counters[span.kind]))
        return cls(annotator_id, plain_text, tuple(numbered))

    def spans_of(self, kind: TagKind) -> List[Span]:
        return [s for s in self.spans if s.kind is kind]

    def elements(self, kind: TagKind) -> Dict[Optional[int], List[Span]]:
        """Spans of a kind grouped by element id, ids in first-appearance order."""
        grouped: Dict[Optional[int], List[Span]] = {}
        for span in self.spans_of(kind):
            grouped.setdefault(span.element_id, []).append(span)
        return grouped

    def span_text(self, span: Span) -> str:
        return self.plain_text[span.start:span.end]


def _check_nesting(annotator_id: str, spans: Tuple[Span, ...]) -> None:
    # canonical order puts containers first, so a stack scan suffices
    stack: List[Span] = []
    for span in spans:
        while stack and not stack[-1].overlaps(span):
            stack.pop()
        if stack and not stack[-1].contains(span):
            raise ValueError(
                f"{annotator_id}: spans {stack[-1].tag_name} ({stack[-1].start}, {stack[-1].end}) and "
                f"{span.tag_name} ({span.start}, {span.end}) partially overlap"
            )
        stack.append(span)


# Tokenization -----------------------------------------------------------------
_SPACE, _PUNCT, _WORD = 0, 1, 2


def _char_class(ch: str, split_punctuation: bool) -> int:
    if ch.isspace():
        return _SPACE
    if split_punctuation and unicodedata.category(ch).startswith("P"):
        return _PUNCT
    return _WORD


def tokenize(text: str, options: Optional[TokenizerOptions] = None) -> List[Token]:
    """Split text into word runs and punctuation runs; whitespace separates.

    Offsets are in code points. With punctuation_runs off, every punctuation
    character is its own token.
    """
    return list(_tokenize_cached(text, options or TokenizerOptions.from_settings()))


@lru_cache(maxsize=64)
def _tokenize_cached(text: str, options: TokenizerOptions) -> Tuple[Token, ...]:
    tokens: List[Token] = []
    pos = 0
    for cls, run in groupby(text, key=lambda ch: _char_class(ch, options.split_punctuation)):
        length = sum(1 for _ in run)
        if cls == _WORD or (cls == _PUNCT and options.punctuation_runs):
            tokens.append(Token(len(tokens), pos, pos + length, text[pos:pos + length]))
        elif cls == _PUNCT:
            for offset in range(pos, pos + length):
                tokens.append(Token(len(tokens), offset, offset + 1, text[offset]))
        pos += length
    return tuple(tokens)


@lru_cache(maxsize=64)
def _token_bounds(text: str, options: TokenizerOptions) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    tokens = _tokenize_cached(text, options)
    return tuple(t.start for t in tokens), tuple(t.end for t in tokens)


def span_tokens(doc: AnnotatedDocument, span: Span, options: Optional[TokenizerOptions] = None) -> FrozenSet[int]:
    """Indices of tokens overlapping [span.start, span.end) by at least one character."""
    if not 0 <= span.start < span.end <= len(doc.plain_text):
        raise SpanOffsetError(
            f"span ({span.start}, {span.end}) outside text of length {len(doc.plain_text)}"
        )
    starts, ends = _token_bounds(doc.plain_text, options or TokenizerOptions.from_settings())
    # first token ending after start, up to the last token starting before end
    lo = bisect_right(ends, span.start)
    hi = bisect_left(starts, span.end)
    return frozenset(range(lo, hi))


def kind_coverage(doc: AnnotatedDocument, kind: TagKind, options: Optional[TokenizerOptions] = None) -> FrozenSet[int]:
    """Union of span_tokens over every span of a kind."""
    covered = set()
    for span in doc.spans_of(kind):
        covered |= span_tokens(doc, span, options)
    return frozenset(covered)

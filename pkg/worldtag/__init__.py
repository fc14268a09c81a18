# Mark worldtag as a package and centralize exports.

from . import settings  # re-export for convenience
from .model import AnnotatedDocument, Span, TagKind, Token, TokenizerOptions, span_tokens, tokenize
from .tag_parser import parse_annotation, serialize, validate_alignment

__version__ = settings.TOOL_VERSION

__all__ = [
    "settings",
    "AnnotatedDocument",
    "Span",
    "TagKind",
    "Token",
    "TokenizerOptions",
    "parse_annotation",
    "serialize",
    "span_tokens",
    "tokenize",
    "validate_alignment",
]

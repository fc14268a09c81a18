"""
Corpus manifests and the settings.json overlay.
A manifest is a JSON file naming the annotators, their annotation files and options.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from . import settings
from .errors import ManifestError
from .model import AnnotatedDocument, TokenizerOptions
from .tag_parser import read_annotation
from .util import digest_files

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnotatorEntry:
    annotator_id: str
    path: Path


@dataclass(frozen=True)
class CorpusManifest:
    """Annotators and their files, plus tokenizer and analysis options."""

    entries: List[AnnotatorEntry]
    source: Optional[Path] = None
    tokenizer: TokenizerOptions = field(default_factory=TokenizerOptions.from_settings)
    pos_sidecar: Optional[Path] = None
    element_mode: Optional[str] = None
    threshold: Optional[float] = None

    def __post_init__(self):
        if not self.entries:
            raise ManifestError("manifest lists no annotators")
        seen = set()
        for entry in self.entries:
            if entry.annotator_id in seen:
                raise ManifestError(f"annotator id {entry.annotator_id!r} listed twice")
            seen.add(entry.annotator_id)

    @property
    def annotator_ids(self) -> List[str]:
        return [e.annotator_id for e in self.entries]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        data: Dict[str, Any] = {
            "annotators": [{"id": e.annotator_id, "path": str(e.path)} for e in self.entries],
            "tokenizer": {
                "split_punctuation": self.tokenizer.split_punctuation,
                "punctuation_runs": self.tokenizer.punctuation_runs,
            },
        }
        if self.pos_sidecar is not None:
            data["pos_sidecar"] = str(self.pos_sidecar)
        if self.element_mode is not None:
            data["element_mode"] = self.element_mode
        if self.threshold is not None:
            data["threshold"] = self.threshold
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[Path] = None,
                  source: Optional[Path] = None) -> "CorpusManifest":
        """Create a manifest from a dictionary; relative paths resolve against base_dir."""
        base = base_dir or Path(".")

        def resolve(p: str) -> Path:
            path = Path(p)
            return path if path.is_absolute() else base / path

        try:
            entries = [AnnotatorEntry(str(item["id"]), resolve(item["path"])) for item in data["annotators"]]
        except (KeyError, TypeError) as e:
            raise ManifestError(f"manifest annotators need 'id' and 'path': {e}") from None
        tok = data.get("tokenizer", {})
        defaults = TokenizerOptions.from_settings()
        tokenizer = TokenizerOptions(
            split_punctuation=bool(tok.get("split_punctuation", defaults.split_punctuation)),
            punctuation_runs=bool(tok.get("punctuation_runs", defaults.punctuation_runs)),
        )
        sidecar = data.get("pos_sidecar")
        threshold = data.get("threshold")
        return cls(
            entries=entries,
            source=source,
            tokenizer=tokenizer,
            pos_sidecar=resolve(sidecar) if sidecar else None,
            element_mode=data.get("element_mode"),
            threshold=float(threshold) if threshold is not None else None,
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "CorpusManifest":
        path = Path(path)
        if not path.exists():
            raise ManifestError(f"manifest not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ManifestError(f"{path}: invalid JSON ({e})") from None
        if not isinstance(data, dict):
            raise ManifestError(f"{path}: expected a JSON object")
        return cls.from_dict(data, base_dir=path.parent, source=path)

    def check_files(self) -> None:
        """Raise ManifestError naming every annotation file that does not exist."""
        missing = [str(e.path) for e in self.entries if not e.path.exists()]
        if missing:
            raise ManifestError(f"annotation file not found: {', '.join(missing)}")

    def digest(self) -> str:
        """SHA-256 over the manifest file and every annotation file, in manifest order."""
        self.check_files()
        paths = ([self.source] if self.source else []) + [e.path for e in self.entries]
        return digest_files(paths)

    def load_documents(self, jobs: int = 1) -> List[AnnotatedDocument]:
        """Parse every annotation file; order follows the manifest whatever `jobs` is."""
        self.check_files()
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                return list(pool.map(lambda e: read_annotation(e.path, e.annotator_id), self.entries))
        return [read_annotation(e.path, e.annotator_id) for e in self.entries]


def load_settings(path: Union[str, Path] = "settings.json") -> Dict[str, Any]:
    """Overlay settings.json values onto the settings module; returns what was applied.

    A missing file is fine; a broken one is logged and ignored.
    """
    path = Path(path)
    if not path.exists():
        return {}
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        log.warning("Ignoring %s: %s", path, e)
        return {}
    if not isinstance(data, dict):
        log.warning("Ignoring %s: expected a JSON object", path)
        return {}

    applied = {}
    for key, value in data.items():
        if key not in settings.OVERLAY_KEYS:
            log.warning("Unknown setting %r in %s", key, path)
            continue
        name, kind = settings.OVERLAY_KEYS[key]
        try:
            coerced = None if value is None else kind(value)
        except (TypeError, ValueError):
            log.warning("Bad value for %r in %s: %r", key, path, value)
            continue
        setattr(settings, name, coerced)
        applied[key] = coerced
        log.info("Loaded %s = %r", name, coerced)
    return applied

"""
Synthetic corpora for tests: a generated text plus scripted annotator variants.
Documents are built through the model and written with the real serializer.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from worldtag.model import AnnotatedDocument, Span, TagKind, tokenize
from worldtag.tag_parser import serialize

VOCAB = {
    "quail": "NOUN", "mars": "PROPN", "kirsten": "PROPN", "agent": "NOUN", "clerk": "NOUN",
    "room": "NOUN", "valley": "NOUN", "office": "NOUN", "city": "NOUN", "night": "NOUN",
    "awoke": "VERB", "descended": "VERB", "returned": "VERB", "walked": "VERB", "said": "VERB",
    "wanted": "VERB", "looked": "VERB", "arrived": "VERB", "red": "ADJ", "quiet": "ADJ",
    "old": "ADJ", "long": "ADJ", "the": "DET", "and": "CCONJ", "then": "ADV", "now": "ADV",
    "he": "PRON", "she": "PRON", "there": "ADV", "to": "ADP",
}
WORDS = sorted(VOCAB)


class Text:
    """Generated text with the character offsets of every word."""

    def __init__(self, n_words: int, seed: int = 7, punctuation_every: int = 9):
        rng = random.Random(seed)
        parts: List[str] = []
        self.words: List[Tuple[int, int]] = []
        pos = 0
        for i in range(n_words):
            word = rng.choice(WORDS)
            if i:
                sep = " — " if i % 23 == 0 else " "
                parts.append(sep)
                pos += len(sep)
            parts.append(word)
            self.words.append((pos, pos + len(word)))
            pos += len(word)
            if i % punctuation_every == punctuation_every - 1:
                parts.append(".")
                pos += 1
        self.text = "".join(parts)

    def word_span(self, kind: TagKind, first: int, last: int, element_id: Optional[int] = None) -> Span:
        return Span(kind, self.words[first][0], self.words[last][1], element_id)


def world_spans(text: Text, bounds: Sequence[int], ids: Optional[Sequence[int]] = None) -> List[Span]:
    """Text-world spans over word ranges [bounds[k], bounds[k+1])."""
    spans = []
    for k in range(len(bounds) - 1):
        element_id = ids[k] if ids else k + 1
        spans.append(text.word_span(TagKind.TEXT_WORLD, bounds[k], bounds[k + 1] - 1, element_id))
    return spans


# Scripted variants ------------------------------------------------------------
def scripted_corpus(n_words: int = 500, n_annotators: int = 6, seed: int = 11) -> List[AnnotatedDocument]:
    """Six annotators over one ~500-word text with known perturbations.

    Base: 10 worlds of 50 words, switch on each world's first word, 4 characters,
    3 places, times on every 10th word. Annotator 2 shifts boundaries, annotator 4
    splits every world, annotator 6 merges pairs, relabels character ids and leaves its
    last world boundary without a switch, and every annotator drops some element mentions.
    """
    text = Text(n_words, seed=seed)
    base_bounds = list(range(0, n_words, 50)) + [n_words]
    docs = []
    for a in range(1, n_annotators + 1):
        rng = random.Random(seed * 100 + a)
        bounds = list(base_bounds)
        if a == 2:
            inner = [b + rng.randint(-3, 3) for b in bounds[1:-1]]
            bounds = [0] + inner + [n_words]
        elif a == 4:
            bounds = sorted(set(bounds + [b + 25 for b in bounds[:-1]]))
        elif a == 6:
            bounds = bounds[::2] if bounds[-1] == bounds[::2][-1] else bounds[::2] + [n_words]
        spans = world_spans(text, bounds)
        switch_at = bounds[1:-1]
        if a == 6:
            # no switch into its last world
            switch_at = switch_at[:-1]
        spans += [text.word_span(TagKind.SWITCH, b, b) for b in switch_at]
        if a in (1, 3):
            spans.append(text.word_span(TagKind.SWITCH, bounds[1] + 1, bounds[1] + 1))

        relabel = {1: 1, 2: 4, 3: 2, 4: 3} if a == 6 else {k: k for k in range(1, 5)}
        for w in range(n_words):
            if w in bounds:
                continue
            keep = rng.random() < 0.85
            if w % 10 == 1 and keep:
                spans.append(text.word_span(TagKind.CHARACTER, w, w, relabel[(w // 10) % 4 + 1]))
            elif w % 10 == 4 and keep:
                spans.append(text.word_span(TagKind.PLACE, w, w, (w // 10) % 3 + 1))
            elif w % 10 == 7 and keep:
                spans.append(text.word_span(TagKind.TIME, w, w))
        docs.append(AnnotatedDocument.create(f"A{a}", text.text, spans))
    return docs


# Documents with exact element counts -------------------------------------------
def counted_corpus(rows: Sequence[Tuple[int, int, int, int, int]], n_words: int = 600) -> List[AnnotatedDocument]:
    """One document per row of (text worlds, switches, characters, places, times) counts."""
    text = Text(n_words, seed=3)
    docs = []
    for a, (n_worlds, n_switch, n_char, n_place, n_time) in enumerate(rows, 1):
        size = n_words // n_worlds
        bounds = [k * size for k in range(n_worlds)] + [n_words]
        spans = world_spans(text, bounds)
        pool = iter(range(n_words))
        for kind, n in ((TagKind.SWITCH, n_switch), (TagKind.CHARACTER, n_char),
                        (TagKind.PLACE, n_place), (TagKind.TIME, n_time)):
            for k in range(n):
                w = next(pool)
                element_id = k % 5 + 1 if kind in (TagKind.CHARACTER, TagKind.PLACE) else None
                spans.append(text.word_span(kind, w, w, element_id))
        docs.append(AnnotatedDocument.create(f"A{a}", text.text, spans))
    return docs


# Files on disk ----------------------------------------------------------------
def write_pos_sidecar(path: Path, text: str) -> Path:
    lines = []
    for token in tokenize(text):
        tag = VOCAB.get(token.surface, "PUNCT")
        lines.append(f"{token.index}\t{token.surface}\t{tag}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_corpus(directory: Path, docs: Sequence[AnnotatedDocument], pos: bool = False,
                 options: Optional[Dict[str, object]] = None) -> Path:
    """Serialize documents next to a manifest.json; returns the manifest path."""
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for doc in docs:
        name = f"{doc.annotator_id.lower()}.txt"
        (directory / name).write_text(serialize(doc), encoding="utf-8")
        entries.append({"id": doc.annotator_id, "path": name})
    manifest: Dict[str, object] = {"annotators": entries}
    if pos:
        write_pos_sidecar(directory / "pos.tsv", docs[0].plain_text)
        manifest["pos_sidecar"] = "pos.tsv"
    manifest.update(options or {})
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return path

"""
Fuzzy consensus over several annotations.

A token's membership in a tag kind is the share of annotators who put a span of that
kind over it. This count ratio is our own aggregation rule; annotators are unweighted
and kinds are independent, so a vehicle may be half Place and half Character.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import settings
from .errors import UsageError
from .metrics import jaccard
from .model import AnnotatedDocument, TagKind, TokenizerOptions, kind_coverage, tokenize
from .tag_parser import ensure_aligned

log = logging.getLogger(__name__)

# inclusive (first token, last token)
Run = Tuple[int, int]
CrispConsensus = Dict[TagKind, List[Run]]


@dataclass(frozen=True)
class FuzzyAnnotation:
    num_annotators: int
    counts: Dict[TagKind, np.ndarray]

    @property
    def num_tokens(self) -> int:
        return len(next(iter(self.counts.values())))

    def degrees(self, kind: TagKind) -> np.ndarray:
        """Membership degrees k / n of every token."""
        return self.counts[kind] / self.num_annotators

    def to_dict(self) -> Dict[str, object]:
        return {
            "annotators": self.num_annotators,
            "tokens": self.num_tokens,
            "degrees": {k.value: self.degrees(k).tolist() for k in TagKind},
        }


def fuzzy_membership(docs: Sequence[AnnotatedDocument],
                     options: Optional[TokenizerOptions] = None) -> FuzzyAnnotation:
    if len(docs) < 2:
        raise UsageError("fuzzy membership needs at least 2 documents")
    ensure_aligned(docs)
    n_tokens = len(tokenize(docs[0].plain_text, options))
    counts = {}
    for kind in TagKind:
        votes = np.zeros(n_tokens, dtype=np.int64)
        for doc in docs:
            covered = kind_coverage(doc, kind, options)
            if covered:
                votes[np.fromiter(covered, dtype=np.int64, count=len(covered))] += 1
        counts[kind] = votes
    log.info("Fuzzy membership over %d tokens from %d annotators", n_tokens, len(docs))
    return FuzzyAnnotation(len(docs), counts)


def _runs(mask: np.ndarray) -> List[Run]:
    edges = np.flatnonzero(np.diff(np.concatenate(([0], mask.astype(np.int8), [0]))))
    return [(int(s), int(e) - 1) for s, e in zip(edges[::2], edges[1::2])]


def crisp_consensus(fuzzy: FuzzyAnnotation, threshold: Optional[float] = None) -> CrispConsensus:
    """Maximal runs of tokens whose degree reaches the threshold, per kind."""
    threshold = settings.CONSENSUS_THRESHOLD if threshold is None else threshold
    if not 0 < threshold <= 1:
        raise UsageError(f"threshold must be in (0, 1], got {threshold}")
    return {kind: _runs(fuzzy.degrees(kind) >= threshold) for kind in TagKind}


def run_tokens(runs: Sequence[Run]) -> frozenset:
    return frozenset(t for first, last in runs for t in range(first, last + 1))


def annotator_vs_consensus(doc: AnnotatedDocument,
                           consensus: CrispConsensus,
                           kind: TagKind,
                           options: Optional[TokenizerOptions] = None) -> float:
    """Jaccard between one annotator's coverage of a kind and the consensus runs."""
    return jaccard(kind_coverage(doc, kind, options), run_tokens(consensus.get(kind, [])))


def consensus_agreement(docs: Sequence[AnnotatedDocument],
                        consensus: CrispConsensus,
                        options: Optional[TokenizerOptions] = None) -> Dict[str, Dict[TagKind, float]]:
    """annotator_vs_consensus for every annotator and kind."""
    return {
        doc.annotator_id: {kind: annotator_vs_consensus(doc, consensus, kind, options) for kind in TagKind}
        for doc in docs
    }

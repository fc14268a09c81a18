"""
Agreement metrics between annotators.

Covers text-world matching by minimum edit distance, element agreement by Jaccard
similarity, per-annotator counts with paired medians, and switch agreement.
"""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import AbstractSet, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import settings
from .errors import EmptyInputError, SidecarError, UnsupportedKindError, UsageError
from .model import AnnotatedDocument, TagKind, TokenizerOptions, kind_coverage, span_tokens, tokenize
from .tag_parser import ensure_aligned, normalize_newlines
from .util import DisjointSet, median_pair

log = logging.getLogger(__name__)

# column order of the count report
COUNT_COLUMNS = (TagKind.TEXT_WORLD, TagKind.SWITCH, TagKind.CHARACTER, TagKind.PLACE, TagKind.TIME)
ELEMENT_KINDS = (TagKind.CHARACTER, TagKind.PLACE)
ELEMENT_MODES = ("positions", "forms")


# ---------------------------------------------------------------------------
# Edit distance
# ---------------------------------------------------------------------------
def _codes(s: str) -> np.ndarray:
    return np.fromiter(map(ord, s), dtype=np.int64, count=len(s))


def edit_distance(a: str, b: str, cap: Optional[int] = None) -> Optional[int]:
    """Levenshtein distance over code points with unit insert/delete/substitute costs.

    Transpositions are not an operation: ("ab", "ba") is 2. With `cap`, the exact
    distance is returned when it is <= cap and None otherwise; only a band of
    2 * cap + 1 cells per row is computed in that mode.
    """
    if cap is not None and cap < 0:
        raise UsageError(f"cap must be non-negative, got {cap}")
    if a == b:
        return 0
    # iterate over the shorter string, vectorize over the longer one
    if len(a) > len(b):
        a, b = b, a
    n, m = len(a), len(b)
    if cap is not None and m - n > cap:
        return None
    if n == 0:
        return m
    if cap is None:
        return _full_distance(a, b)
    return _banded_distance(a, b, cap)


def _full_distance(a: str, b: str) -> int:
    codes_b = _codes(b)
    offsets = np.arange(len(b) + 1, dtype=np.int64)
    row = offsets.copy()
    for i, ch in enumerate(a, 1):
        new = np.empty_like(row)
        new[0] = i
        np.minimum(row[1:] + 1, row[:-1] + (codes_b != ord(ch)), out=new[1:])
        # insertions along the row: new[j] = min over k <= j of new[k] + (j - k)
        row = np.minimum.accumulate(new - offsets) + offsets
    return int(row[-1])


def _banded_distance(a: str, b: str, cap: int) -> Optional[int]:
    codes_b = _codes(b)
    m = len(b)
    inf = cap + 1
    offsets = np.arange(m + 1, dtype=np.int64)
    row = np.minimum(offsets, inf)
    for i, ch in enumerate(a, 1):
        lo, hi = max(1, i - cap), min(m, i + cap)
        new = np.full(m + 1, inf, dtype=np.int64)
        new[0] = min(i, inf)
        np.minimum(row[lo:hi + 1] + 1, row[lo - 1:hi] + (codes_b[lo - 1:hi] != ord(ch)), out=new[lo:hi + 1])
        band = slice(lo - 1, hi + 1)
        new[band] = np.minimum.accumulate(new[band] - offsets[band]) + offsets[band]
        np.minimum(new, inf, out=new)
        row = new
        # row minima never decrease, so nothing later can come back under the cap
        if row[band].min() > cap:
            return None
    d = int(row[-1])
    return d if d <= cap else None


# ---------------------------------------------------------------------------
# Text-world matching
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class WorldMatch:
    source_ordinal: int
    target_ordinal: int
    distance: int
    source_length: int = 0
    target_length: int = 0

    @property
    def ordinal_divergence(self) -> int:
        return abs(self.source_ordinal - self.target_ordinal)

    def to_dict(self) -> Dict[str, int]:
        return {
            "source": self.source_ordinal,
            "l_min": self.distance,
            "target": self.target_ordinal,
            "divergence": self.ordinal_divergence,
            "source_length": self.source_length,
            "target_length": self.target_length,
        }


def _best_target(i: int, source: str, targets: Sequence[str]) -> WorldMatch:
    # candidates in tie-break order: nearest ordinal first, then smaller ordinal,
    # so a later candidate only wins with a strictly smaller distance
    order = sorted(range(1, len(targets) + 1), key=lambda j: (abs(i - j), j))
    best_j, best = order[0], edit_distance(source, targets[order[0] - 1])
    for j in order[1:]:
        if best == 0:
            break
        d = edit_distance(source, targets[j - 1], cap=best - 1)
        if d is not None:
            best_j, best = j, d
    log.debug("Stretch %d -> %d (l_min %d)", i, best_j, best)
    return WorldMatch(i, best_j, best, len(source), len(targets[best_j - 1]))


def match_worlds(doc_a: AnnotatedDocument, doc_b: AnnotatedDocument, jobs: int = 1) -> List[WorldMatch]:
    """Match every text-world stretch of doc_a to its closest stretch in doc_b.

    Many sources may share one target. Ties go to the smaller |i - j|, then the
    smaller target ordinal. `jobs` > 1 evaluates source stretches on a thread pool;
    the result does not depend on it.
    """
    ensure_aligned([doc_a, doc_b])
    # compared modulo line endings, as in the alignment check
    sources = [normalize_newlines(doc_a.span_text(s)) for s in doc_a.spans_of(TagKind.TEXT_WORLD)]
    targets = [normalize_newlines(doc_b.span_text(s)) for s in doc_b.spans_of(TagKind.TEXT_WORLD)]
    if not sources or not targets:
        empty = doc_a.annotator_id if not sources else doc_b.annotator_id
        raise EmptyInputError(f"{empty} has no text-world stretches")

    log.info("Matching %d stretches of %s against %d of %s", len(sources), doc_a.annotator_id,
             len(targets), doc_b.annotator_id)
    work = list(enumerate(sources, 1))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda item: _best_target(item[0], item[1], targets), work))
    return [_best_target(i, src, targets) for i, src in work]


def ordinal_divergence_series(matches: Sequence[WorldMatch]) -> List[Tuple[int, int]]:
    """(l_min, |i - j|) pairs sorted by l_min; equal distances keep input order."""
    if not matches:
        raise EmptyInputError("no matches to plot")
    return [(m.distance, m.ordinal_divergence) for m in sorted(matches, key=lambda m: m.distance)]


MATCH = "match"
DISPLACED = "displaced"
RESEGMENTED = "resegmented"
UNRELATED = "unrelated"


def classify_mismatch(match: WorldMatch,
                      distance_ratio: Optional[float] = None,
                      ordinal_gap: Optional[int] = None) -> str:
    """Sort a match into the mismatch taxonomy.

    displaced: the text is similar but the stretches sit far apart in the narrative.
    resegmented: the stretches are neighbours but their text differs, e.g. one
    annotator split a world the other kept whole.
    """
    ratio = settings.MISMATCH_DISTANCE_RATIO if distance_ratio is None else distance_ratio
    gap = settings.MISMATCH_ORDINAL_GAP if ordinal_gap is None else ordinal_gap
    similar = match.distance <= ratio * max(match.source_length, 1)
    near = match.ordinal_divergence <= gap
    if similar and near:
        return MATCH
    if similar:
        return DISPLACED
    if near:
        return RESEGMENTED
    return UNRELATED


# ---------------------------------------------------------------------------
# Element agreement
# ---------------------------------------------------------------------------
def jaccard(a: AbstractSet, b: AbstractSet) -> float:
    """|A & B| / |A | B|, with two empty sets agreeing fully."""
    if not a and not b:
        return 1.0
    inter = len(a & b)
    return inter / (len(a) + len(b) - inter)


@dataclass(frozen=True)
class ElementMember:
    element_id: Optional[int]
    tokens: FrozenSet[int]
    forms: FrozenSet[str]

    def members(self, mode: str) -> FrozenSet:
        return self.tokens if mode == "positions" else self.forms


@dataclass(frozen=True)
class ElementAlignment:
    kind: TagKind
    number: int
    label: str
    members: Dict[str, Optional[ElementMember]]
    pairwise_j: Dict[Tuple[str, str], float]
    mean_j: float

    def to_dict(self) -> Dict[str, object]:
        return {
            "element": self.number,
            "label": self.label,
            "kind": self.kind.value,
            "ids": {a: (m.element_id if m else None) for a, m in self.members.items()},
            "pairwise": [{"pair": list(pair), "j": j} for pair, j in self.pairwise_j.items()],
            "mean_j": self.mean_j,
        }


def _resolve_mode(mode: Optional[str]) -> str:
    mode = mode or settings.ELEMENT_MODE
    if mode not in ELEMENT_MODES:
        raise UsageError(f"element mode must be one of {', '.join(ELEMENT_MODES)}, got {mode!r}")
    return mode


def align_elements(docs: Sequence[AnnotatedDocument],
                   kind: TagKind,
                   mode: Optional[str] = None,
                   annotators: Optional[Sequence[str]] = None,
                   options: Optional[TokenizerOptions] = None) -> List[ElementAlignment]:
    """Identify the same character or place across annotators and score agreement.

    Element ids are not trusted across annotators. Elements are clustered greedily by
    token-position Jaccard (best pair first, at most one element per annotator in a
    cluster), then every annotator pair is scored in `mode`. An annotator without a
    member in a cluster scores 0 against everybody.
    """
    if kind not in ELEMENT_KINDS:
        raise UnsupportedKindError(f"element agreement covers Character and Place, not {kind.value}")
    mode = _resolve_mode(mode)
    if annotators:
        by_id = {d.annotator_id: d for d in docs}
        missing = [a for a in annotators if a not in by_id]
        if missing:
            raise UsageError(f"unknown annotator(s): {', '.join(missing)}")
        docs = [by_id[a] for a in annotators]
    if len(docs) < 2:
        raise UsageError("element agreement needs at least 2 annotators")
    ensure_aligned(docs)

    tokens = tokenize(docs[0].plain_text, options)
    # element key: (document index, element id)
    members: Dict[Tuple[int, Optional[int]], ElementMember] = {}
    for d, doc in enumerate(docs):
        for element_id, spans in doc.elements(kind).items():
            covered = frozenset().union(*(span_tokens(doc, s, options) for s in spans))
            forms = frozenset(tokens[t].surface.lower() for t in covered)
            members[(d, element_id)] = ElementMember(element_id, covered, forms)

    clusters = _cluster_elements(members)
    ids = [doc.annotator_id for doc in docs]
    pairs = list(combinations(range(len(docs)), 2))
    results: List[ElementAlignment] = []
    for number, keys in enumerate(clusters, 1):
        by_doc = {d: members[(d, e)] for d, e in keys}
        pairwise: Dict[Tuple[str, str], float] = {}
        for x, y in pairs:
            mx, my = by_doc.get(x), by_doc.get(y)
            pairwise[(ids[x], ids[y])] = jaccard(mx.members(mode), my.members(mode)) if mx and my else 0.0
        first_doc, first_elem = keys[0]
        first_span = docs[first_doc].elements(kind)[first_elem][0]
        results.append(ElementAlignment(
            kind=kind,
            number=number,
            label=docs[first_doc].span_text(first_span).strip(),
            members={ids[d]: by_doc.get(d) for d in range(len(docs))},
            pairwise_j=pairwise,
            mean_j=sum(pairwise.values()) / len(pairwise),
        ))
    log.info("Aligned %d %s elements across %d annotators", len(results), kind.value, len(docs))
    return results


def _cluster_elements(members: Dict[Tuple[int, Optional[int]], ElementMember]) -> List[List[Tuple[int, Optional[int]]]]:
    keys = list(members)
    index_of = {k: i for i, k in enumerate(keys)}
    by_token: Dict[int, List[Tuple[int, Optional[int]]]] = {}
    for key in keys:
        for t in members[key].tokens:
            by_token.setdefault(t, []).append(key)

    candidates = set()
    for holders in by_token.values():
        for x, y in combinations(holders, 2):
            if x[0] != y[0]:
                candidates.add((x, y) if index_of[x] < index_of[y] else (y, x))
    scored = sorted(
        ((jaccard(members[x].tokens, members[y].tokens), x, y) for x, y in candidates),
        key=lambda item: (-item[0], index_of[item[1]], index_of[item[2]]),
    )

    groups = DisjointSet(keys)
    docs_in: Dict[Tuple[int, Optional[int]], set] = {k: {k[0]} for k in keys}
    for score, x, y in scored:
        if score <= 0:
            break
        rx, ry = groups.find(x), groups.find(y)
        if rx == ry or docs_in[rx] & docs_in[ry]:
            continue
        root = groups.union(rx, ry)
        docs_in[root] = docs_in[rx] | docs_in[ry]

    def position(group: List[Tuple[int, Optional[int]]]) -> Tuple[float, int]:
        first_token = min((min(members[k].tokens) for k in group if members[k].tokens), default=float("inf"))
        return first_token, min(index_of[k] for k in group)

    return sorted((sorted(g, key=lambda k: k[0]) for g in groups.groups()), key=position)


# ---------------------------------------------------------------------------
# Counts and medians
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CountSummary:
    counts: Dict[str, Dict[TagKind, int]]
    medians: Dict[TagKind, Tuple[int, int]]

    def to_dict(self) -> Dict[str, object]:
        return {
            "columns": [k.value for k in COUNT_COLUMNS],
            "rows": [{"annotator": a, **{k.value: c[k] for k in COUNT_COLUMNS}} for a, c in self.counts.items()],
            "median": {k.value: list(self.medians[k]) for k in COUNT_COLUMNS},
        }


def count_summary(docs: Sequence[AnnotatedDocument]) -> CountSummary:
    """Spans per kind per annotator, with the (lower, upper) median pair of each column."""
    if not docs:
        raise UsageError("count summary needs at least 1 document")
    counts: Dict[str, Dict[TagKind, int]] = {}
    for doc in docs:
        tally = Counter(s.kind for s in doc.spans)
        counts[doc.annotator_id] = {k: tally.get(k, 0) for k in COUNT_COLUMNS}
    medians = {k: median_pair([c[k] for c in counts.values()]) for k in COUNT_COLUMNS}
    return CountSummary(counts, medians)


def select_median_annotations(docs: Sequence[AnnotatedDocument], k: int) -> List[str]:
    """The k annotators whose text-world count is closest to the median midpoint."""
    if not 1 <= k <= len(docs):
        raise UsageError(f"k must be between 1 and {len(docs)}, got {k}")
    worlds = [len(doc.spans_of(TagKind.TEXT_WORLD)) for doc in docs]
    lo, hi = median_pair(worlds)
    mid = (lo + hi) / 2
    ranked = sorted(range(len(docs)), key=lambda i: (abs(worlds[i] - mid), i))
    return [docs[i].annotator_id for i in ranked[:k]]


# ---------------------------------------------------------------------------
# Switch agreement
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PosEntry:
    line: int
    surface: str
    tag: str


def read_pos_sidecar(source: Union[str, Path, Iterable[str]]) -> Dict[int, PosEntry]:
    """Read `token_index<TAB>surface<TAB>POS` rows; blank lines and # comments are skipped."""
    path = None
    if isinstance(source, (str, Path)):
        path = str(source)
        lines: Iterable[str] = Path(source).read_text(encoding="utf-8").splitlines()
    else:
        lines = source
    table: Dict[int, PosEntry] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise SidecarError(lineno, f"expected 3 tab-separated fields, got {len(fields)}", path)
        index, surface, tag = fields
        if not index.isdigit():
            raise SidecarError(lineno, f"token index {index!r} is not a non-negative integer", path)
        if not tag:
            raise SidecarError(lineno, "empty POS tag", path)
        if int(index) in table:
            raise SidecarError(lineno, f"token {index} listed twice (first on line {table[int(index)].line})", path)
        table[int(index)] = PosEntry(lineno, surface, tag)
    return table


def _check_sidecar(table: Dict[int, PosEntry], text: str, options: Optional[TokenizerOptions]) -> None:
    tokens = tokenize(text, options)
    for index, entry in table.items():
        if index >= len(tokens):
            raise SidecarError(entry.line, f"token {index} beyond the {len(tokens)} tokens of the text")
        if tokens[index].surface != entry.surface:
            raise SidecarError(entry.line, f"token {index} is {tokens[index].surface!r}, sidecar says {entry.surface!r}")


@dataclass(frozen=True)
class SwitchSite:
    tokens: FrozenSet[int]
    annotators: Tuple[str, ...]
    text: str

    @property
    def agreement(self) -> int:
        return len(self.annotators)

    def to_dict(self) -> Dict[str, object]:
        return {
            "tokens": sorted(self.tokens),
            "text": self.text,
            "agreement": self.agreement,
            "annotators": list(self.annotators),
        }


@dataclass(frozen=True)
class MissedBoundary:
    """Start of a text-world stretch with no switch of the same annotator on it."""

    stretch: int
    token: int
    surface: str

    def to_dict(self) -> Dict[str, object]:
        return {"stretch": self.stretch, "token": self.token, "surface": self.surface}


@dataclass(frozen=True)
class SwitchAgreement:
    num_annotators: int
    sites: List[SwitchSite]
    histogram: Dict[int, int]
    pos_distribution: Optional[Dict[str, int]] = None
    pos_groups: Optional[Dict[str, int]] = field(default=None)
    missed: Dict[str, List[MissedBoundary]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "annotators": self.num_annotators,
            "sites": [s.to_dict() for s in self.sites],
            "histogram": [{"agreement": level, "sites": n} for level, n in self.histogram.items()],
            "pos": self.pos_distribution,
            "pos_groups": self.pos_groups,
            "missed": {a: [m.to_dict() for m in found] for a, found in self.missed.items()},
        }


def missed_switches(doc: AnnotatedDocument, options: Optional[TokenizerOptions] = None) -> List[MissedBoundary]:
    """Boundaries between text worlds that the annotator did not mark as a switch.

    Every stretch after the first opens a boundary at its first token. A switch marks
    it when the switch covers that token or the one just before it.
    """
    tokens = tokenize(doc.plain_text, options)
    marked = kind_coverage(doc, TagKind.SWITCH, options)
    missed = []
    for world in doc.spans_of(TagKind.TEXT_WORLD)[1:]:
        covered = span_tokens(doc, world, options)
        if not covered:
            continue
        first = min(covered)
        if first in marked or first - 1 in marked:
            continue
        missed.append(MissedBoundary(world.ordinal, first, tokens[first].surface))
    return missed


def switch_agreement(docs: Sequence[AnnotatedDocument],
                     pos_table: Optional[Dict[int, PosEntry]] = None,
                     options: Optional[TokenizerOptions] = None) -> SwitchAgreement:
    """Cluster switch spans into sites and count how many annotators marked each.

    Spans sharing at least one token fall into one site (transitively), so sites are
    token-disjoint. With a POS table, every site token is tallied once. World
    boundaries each annotator left without a switch are listed per annotator.
    """
    ensure_aligned(docs)
    text = docs[0].plain_text
    tokens = tokenize(text, options)

    # span key: (document index, ordinal)
    span_sets: Dict[Tuple[int, int], FrozenSet[int]] = {}
    for d, doc in enumerate(docs):
        for span in doc.spans_of(TagKind.SWITCH):
            covered = span_tokens(doc, span, options)
            if covered:
                span_sets[(d, span.ordinal)] = covered

    groups = DisjointSet(span_sets)
    owner: Dict[int, Tuple[int, int]] = {}
    for key, covered in span_sets.items():
        for t in covered:
            if t in owner:
                groups.union(owner[t], key)
            else:
                owner[t] = key

    sites = []
    for group in groups.groups():
        covered = frozenset().union(*(span_sets[k] for k in group))
        who = tuple(docs[d].annotator_id for d in sorted({k[0] for k in group}))
        first, last = tokens[min(covered)], tokens[max(covered)]
        sites.append(SwitchSite(covered, who, text[first.start:last.end]))
    sites.sort(key=lambda s: min(s.tokens))

    levels = Counter(s.agreement for s in sites)
    histogram = {level: levels.get(level, 0) for level in range(1, len(docs) + 1)}

    pos_distribution = pos_groups = None
    if pos_table is not None:
        _check_sidecar(pos_table, text, options)
        site_tokens = sorted(frozenset().union(*(s.tokens for s in sites))) if sites else []
        tags = Counter(pos_table[t].tag if t in pos_table else settings.POS_UNKNOWN for t in site_tokens)
        pos_distribution = dict(sorted(tags.items(), key=lambda kv: (-kv[1], kv[0])))
        grouped = Counter()
        for tag, n in tags.items():
            grouped[settings.POS_GROUPS.get(tag, settings.POS_OTHER_GROUP)] += n
        pos_groups = dict(sorted(grouped.items(), key=lambda kv: (-kv[1], kv[0])))

    missed = {doc.annotator_id: missed_switches(doc, options) for doc in docs}
    log.info("Found %d switch sites across %d annotators; %d unmarked world boundaries",
             len(sites), len(docs), sum(map(len, missed.values())))
    return SwitchAgreement(len(docs), sites, histogram, pos_distribution, pos_groups, missed)

"""
Command-line entry point.

    worldtag <command> MANIFEST [options]

Reports go to standard output (JSON by default, --csv for flat tables); logs and
parse diagnostics go to standard error. Exit status: 0 success, 1 parse/alignment or
input failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Tuple

from . import settings
from .consensus import consensus_agreement, crisp_consensus, fuzzy_membership
from .errors import ParseError, UsageError, WorldtagError
from .manifest import CorpusManifest, load_settings
from .metrics import (
    COUNT_COLUMNS,
    align_elements,
    classify_mismatch,
    count_summary,
    match_worlds,
    ordinal_divergence_series,
    read_pos_sidecar,
    select_median_annotations,
    switch_agreement,
)
from .model import AnnotatedDocument, TagKind, tokenize
from .report import Report, Table
from .tag_parser import ERROR, ParseDiagnostic, parse_with_diagnostics, validate_alignment

log = logging.getLogger(__name__)


class Session:
    """Everything a command needs: parsed arguments, the manifest and its documents."""

    def __init__(self, args: argparse.Namespace, manifest: CorpusManifest, err: TextIO):
        self.args = args
        self.manifest = manifest
        self.err = err
        self.digest = manifest.digest()
        self._docs: Optional[List[AnnotatedDocument]] = None

    @property
    def jobs(self) -> int:
        return self.args.jobs if self.args.jobs is not None else settings.JOBS

    @property
    def docs(self) -> List[AnnotatedDocument]:
        if self._docs is None:
            try:
                self._docs = self.manifest.load_documents(self.jobs)
            except ParseError as e:
                emit_diagnostics(e.diagnostics, self.err)
                raise
        return self._docs

    def doc(self, annotator_id: str) -> AnnotatedDocument:
        for doc in self.docs:
            if doc.annotator_id == annotator_id:
                return doc
        raise UsageError(f"unknown annotator {annotator_id!r}; manifest has {', '.join(self.manifest.annotator_ids)}")

    def report(self, payload: Dict, tables: List[Table]) -> Report:
        return Report(self.args.command, self.digest, payload, tables)


def emit_diagnostics(diagnostics: Sequence[ParseDiagnostic], err: TextIO) -> None:
    for diag in diagnostics:
        err.write(json.dumps(diag.to_dict(), ensure_ascii=False) + "\n")


def _split_ids(value: Optional[str]) -> List[str]:
    return [part.strip() for part in value.split(",") if part.strip()] if value else []


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def cmd_validate(s: Session) -> Tuple[Report, int]:
    docs, diagnostics = [], []
    for entry in s.manifest.entries:
        doc, diags = parse_with_diagnostics(entry.path.read_text(encoding="utf-8"), entry.annotator_id)
        diagnostics.extend(diags)
        if doc is not None:
            docs.append(doc)
    emit_diagnostics(diagnostics, s.err)

    failed = any(d.severity == ERROR for d in diagnostics)
    alignment = None if failed else validate_alignment(docs)
    payload = {
        "diagnostics": [d.to_dict() for d in diagnostics],
        "alignment": alignment.to_dict() if alignment else None,
    }
    tables = [Table("diagnostics", ["annotator", "severity", "offset", "code", "excerpt"],
                    [[d.annotator_id, d.severity, d.offset, d.code, d.excerpt] for d in diagnostics])]
    if alignment:
        tables.append(Table("lengths", ["annotator", "length"], [[a, n] for a, n in alignment.lengths.items()]))
        tables.append(Table("alignment", ["aligned", "pair", "offset"], [[
            alignment.aligned,
            ";".join(alignment.first_divergence[:2]) if alignment.first_divergence else None,
            alignment.first_divergence[2] if alignment.first_divergence else None,
        ]]))
        log.info("Alignment: %s", "ok" if alignment.aligned else "diverged")
    ok = not failed and alignment is not None and alignment.aligned
    return s.report(payload, tables), 0 if ok else 1


def cmd_stats(s: Session) -> Tuple[Report, int]:
    summary = count_summary(s.docs)
    columns = [k.value for k in COUNT_COLUMNS]
    tables = [
        Table("counts", ["annotator"] + columns,
              [[a] + [c[k] for k in COUNT_COLUMNS] for a, c in summary.counts.items()]),
        Table("median", ["kind", "lower", "upper"],
              [[k.value, *summary.medians[k]] for k in COUNT_COLUMNS]),
    ]
    return s.report(summary.to_dict(), tables), 0


def cmd_match(s: Session) -> Tuple[Report, int]:
    pair = _split_ids(s.args.pair)
    if not pair:
        pair = select_median_annotations(s.docs, 2)
        log.info("No --pair given; comparing median-closest annotators %s", ",".join(pair))
    if len(pair) != 2:
        raise UsageError(f"--pair takes two annotator ids, got {s.args.pair!r}")
    matches = match_worlds(s.doc(pair[0]), s.doc(pair[1]), jobs=s.jobs)
    series = ordinal_divergence_series(matches)
    rows = [{**m.to_dict(), "class": classify_mismatch(m)} for m in matches]
    payload = {
        "pair": pair,
        "matches": rows,
        "series": {"l_min": [d for d, _ in series], "divergence": [g for _, g in series]},
    }
    tables = [
        Table("matches", ["source", "l_min", "target", "divergence", "class"],
              [[r["source"], r["l_min"], r["target"], r["divergence"], r["class"]] for r in rows]),
        Table("series", ["l_min", "divergence"], [list(p) for p in series]),
    ]
    return s.report(payload, tables), 0


def cmd_elements(s: Session) -> Tuple[Report, int]:
    kind = TagKind.parse(s.args.kind)
    mode = s.args.mode or s.manifest.element_mode or settings.ELEMENT_MODE
    subset = _split_ids(s.args.annotators) or None
    alignments = align_elements(s.docs, kind, mode, subset, s.manifest.tokenizer)
    ids = subset or s.manifest.annotator_ids
    payload = {
        "kind": kind.value,
        "mode": mode,
        "annotators": ids,
        "elements": [a.to_dict() for a in alignments],
    }
    pairs = list(alignments[0].pairwise_j) if alignments else []
    header = ["element", "label"] + [f"({a}, {b})" for a, b in pairs] + ["mean_j"]
    rows = [[a.number, a.label] + [a.pairwise_j[p] for p in pairs] + [a.mean_j] for a in alignments]
    return s.report(payload, [Table("elements", header, rows)]), 0


def cmd_switches(s: Session) -> Tuple[Report, int]:
    sidecar = Path(s.args.pos) if s.args.pos else s.manifest.pos_sidecar
    pos_table = read_pos_sidecar(sidecar) if sidecar else None
    result = switch_agreement(s.docs, pos_table, s.manifest.tokenizer)
    tables = [
        Table("histogram", ["agreement", "sites"], [[lvl, n] for lvl, n in result.histogram.items()]),
        Table("sites", ["first_token", "last_token", "agreement", "annotators", "text"],
              [[min(x.tokens), max(x.tokens), x.agreement, ";".join(x.annotators), x.text] for x in result.sites]),
        Table("missed", ["annotator", "stretch", "token", "surface"],
              [[a, m.stretch, m.token, m.surface] for a, found in result.missed.items() for m in found]),
    ]
    if result.pos_distribution is not None:
        tables.append(Table("pos", ["tag", "count"], [list(kv) for kv in result.pos_distribution.items()]))
        tables.append(Table("pos_groups", ["group", "count"], [list(kv) for kv in result.pos_groups.items()]))
    return s.report(result.to_dict(), tables), 0


def cmd_consensus(s: Session) -> Tuple[Report, int]:
    threshold = s.args.threshold
    if threshold is None:
        threshold = s.manifest.threshold if s.manifest.threshold is not None else settings.CONSENSUS_THRESHOLD
    options = s.manifest.tokenizer
    fuzzy = fuzzy_membership(s.docs, options)
    crisp = crisp_consensus(fuzzy, threshold)
    scores = consensus_agreement(s.docs, crisp, options)
    tokens = tokenize(s.docs[0].plain_text, options)
    text = s.docs[0].plain_text

    degrees = {k: fuzzy.degrees(k).tolist() for k in TagKind}
    payload = {
        "threshold": threshold,
        "annotators": fuzzy.num_annotators,
        "degrees": {k.value: v for k, v in degrees.items()},
        "runs": {k.value: [list(r) for r in runs] for k, runs in crisp.items()},
        "agreement": {a: {k.value: j for k, j in row.items()} for a, row in scores.items()},
    }
    tables = [
        Table("degrees", ["token", "surface"] + [k.value for k in TagKind],
              [[t.index, t.surface] + [degrees[k][t.index] for k in TagKind] for t in tokens]),
        Table("runs", ["kind", "first", "last", "text"],
              [[k.value, a, b, text[tokens[a].start:tokens[b].end]] for k, runs in crisp.items() for a, b in runs]),
        Table("agreement", ["annotator"] + [k.value for k in TagKind],
              [[a] + [row[k] for k in TagKind] for a, row in scores.items()]),
    ]
    return s.report(payload, tables), 0


def cmd_select(s: Session) -> Tuple[Report, int]:
    selected = select_median_annotations(s.docs, s.args.k)
    summary = count_summary(s.docs)
    lower, upper = summary.medians[TagKind.TEXT_WORLD]
    payload = {"k": s.args.k, "median": [lower, upper], "selected": selected}
    rows = [[rank, a, summary.counts[a][TagKind.TEXT_WORLD]] for rank, a in enumerate(selected, 1)]
    return s.report(payload, [Table("selected", ["rank", "annotator", "text_worlds"], rows)]), 0


COMMANDS: Dict[str, Callable[[Session], Tuple[Report, int]]] = {
    "validate": cmd_validate,
    "stats": cmd_stats,
    "match": cmd_match,
    "elements": cmd_elements,
    "switches": cmd_switches,
    "consensus": cmd_consensus,
    "select": cmd_select,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("manifest", type=Path, help="corpus manifest (JSON)")
    common.add_argument("--csv", action="store_true", help="emit flat CSV tables instead of JSON")
    common.add_argument("--round", type=int, default=None, metavar="N", help="round floats to N digits for display")
    common.add_argument("--jobs", type=int, default=None, metavar="N", help="worker threads")
    common.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--settings", type=Path, default=Path("settings.json"), help="settings overlay file")

    parser = argparse.ArgumentParser(prog=settings.TOOL_NAME, description="Agreement metrics for text-world annotations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="parse all files and check they share one text")
    sub.add_parser("stats", parents=[common], help="element counts with median pairs")

    p = sub.add_parser("match", parents=[common], help="match text worlds of two annotators")
    p.add_argument("--pair", default=None, metavar="A,B", help="annotator ids (default: the two closest to median)")

    p = sub.add_parser("elements", parents=[common], help="Jaccard agreement on characters or places")
    p.add_argument("--kind", required=True, choices=["character", "place"])
    p.add_argument("--mode", default=None, choices=["positions", "forms"])
    p.add_argument("--annotators", default=None, metavar="A,B,...", help="restrict to these annotators")

    p = sub.add_parser("switches", parents=[common], help="switch agreement and POS profile")
    p.add_argument("--pos", default=None, metavar="TSV", help="POS sidecar file")

    p = sub.add_parser("consensus", parents=[common], help="fuzzy membership and crisp consensus")
    p.add_argument("--threshold", type=float, default=None)

    p = sub.add_parser("select", parents=[common], help="annotators closest to the median text-world count")
    p.add_argument("--k", type=int, required=True)
    return parser


def _level(name: str) -> int:
    return getattr(logging, str(name).upper(), logging.WARNING)


def configure_logging(level: str, err: TextIO) -> None:
    logging.basicConfig(stream=err, level=_level(level),
                        format=settings.LOG_FORMAT, force=True)


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    # log the overlay itself, then honour its log_level
    configure_logging(args.log_level or settings.LOG_LEVEL, err)
    load_settings(args.settings)
    if args.log_level is None:
        logging.getLogger().setLevel(_level(settings.LOG_LEVEL))
    round_digits = args.round if args.round is not None else settings.ROUND_DIGITS

    try:
        session = Session(args, CorpusManifest.load(args.manifest), err)
        report, status = COMMANDS[args.command](session)
    except UsageError as e:
        err.write(f"{settings.TOOL_NAME}: error: {e}\n")
        return e.exit_status
    except (WorldtagError, OSError) as e:
        err.write(json.dumps({"severity": "error", "code": type(e).__name__, "message": str(e)}, ensure_ascii=False) + "\n")
        return 1

    out.write(report.to_csv(round_digits) if args.csv else report.to_json(round_digits))
    return status

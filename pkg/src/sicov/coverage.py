"""Function-coverage ingestion and commit-scoped reports keyed by build id.

Record documents are plain text, one symbol per line::

    # comments are allowed
    _ZN2ns6Widget6resizeEmb 12
    _Z1fi 0

Reports are stored as one JSON document per build id under a store root.
"""

from __future__ import annotations

import fnmatch
import json
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .sic import SelectiveInstrumentationContext

__all__ = [
    "BuildId",
    "CoverageRecord",
    "TargetCoverage",
    "CoverageReport",
    "RecordFormatError",
    "ReportNotFound",
    "ReportConflict",
    "ingest_records",
    "build_report",
    "merge_reports",
    "ReportStore",
    "report_to_dict",
    "report_from_dict",
    "dumps_report",
]

REPORT_FORMAT = "sicov-report/1"
_BUILD_ID_RE = re.compile(r"^[^\s/\\]+$")


class RecordFormatError(ValueError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class ReportNotFound(LookupError):
    pass


class ReportConflict(FileExistsError):
    pass


class BuildId(str):
    """Opaque, non-empty build identifier without whitespace."""

    def __new__(cls, value: str):
        if not isinstance(value, str) or not _BUILD_ID_RE.match(value) or value in (".", ".."):
            raise ValueError(f"invalid build id {value!r}")
        return super().__new__(cls, value)


@dataclass(frozen=True)
class CoverageRecord:
    symbol: str
    hit_count: int

    def __post_init__(self):
        if self.hit_count < 0:
            raise ValueError(f"negative hit count for {self.symbol}")


@dataclass(frozen=True)
class TargetCoverage:
    pattern: str
    function: str
    symbols: tuple[tuple[str, int], ...] = ()

    @property
    def matched_symbols(self) -> int:
        return len(self.symbols)

    @property
    def total_hits(self) -> int:
        return sum(h for _, h in self.symbols)

    @property
    def covered(self) -> bool:
        return self.total_hits > 0


@dataclass(frozen=True)
class CoverageReport:
    build_id: str
    commit_id: str
    per_target: tuple[TargetCoverage, ...] = ()
    unmatched: tuple[tuple[str, int], ...] = ()

    @property
    def covered_targets(self) -> int:
        return sum(1 for t in self.per_target if t.covered)

    @property
    def commit_coverage(self) -> float:
        if not self.per_target:
            return 0.0
        return self.covered_targets / len(self.per_target)

    @property
    def unmatched_symbols(self) -> int:
        return len(self.unmatched)


def ingest_records(text: str) -> list[CoverageRecord]:
    """Parse a record document; duplicate symbols are merged by summing."""
    totals: dict[str, int] = {}
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split(" ")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise RecordFormatError(f"expected '<symbol> <count>', got {line!r}", lineno)
        symbol, count = parts
        if not re.fullmatch(r"-?\d+", count):
            raise RecordFormatError(f"hit count {count!r} is not an integer", lineno)
        hits = int(count)
        if hits < 0:
            raise RecordFormatError(f"negative hit count {hits}", lineno)
        totals[symbol] = totals.get(symbol, 0) + hits
    return [CoverageRecord(s, h) for s, h in totals.items()]


def _matches(pattern: str, symbol: str, is_fallback: bool) -> bool:
    return fnmatch.fnmatchcase(symbol, pattern) if is_fallback else symbol == pattern


def build_report(
    sic: SelectiveInstrumentationContext, records: Iterable[CoverageRecord], build_id: str
) -> CoverageReport:
    """Join coverage records against the targets of ``sic``.

    Mangled targets match by exact symbol, wildcard fallbacks by glob.
    Targets sharing a pattern are reported once.
    """
    build_id = BuildId(build_id)
    totals: dict[str, int] = {}
    for r in records:
        totals[r.symbol] = totals.get(r.symbol, 0) + r.hit_count
    symbols = sorted(totals)

    per_target = []
    used: set[str] = set()
    seen: set[str] = set()
    for t in sic.targets:
        if t.pattern in seen:
            continue
        seen.add(t.pattern)
        hits = tuple((s, totals[s]) for s in symbols if _matches(t.pattern, s, t.is_fallback))
        used.update(s for s, _ in hits)
        per_target.append(TargetCoverage(t.pattern, "::".join(t.signature.qualified_name), hits))
    unmatched = tuple((s, totals[s]) for s in symbols if s not in used)
    return CoverageReport(str(build_id), sic.commit_id, tuple(per_target), unmatched)


def merge_reports(a: CoverageReport, b: CoverageReport) -> CoverageReport:
    """Sum two reports of the same build and commit (e.g. two test sessions)."""
    if a.build_id != b.build_id or a.commit_id != b.commit_id:
        raise ValueError("can only merge reports of the same build and commit")
    if [t.pattern for t in a.per_target] != [t.pattern for t in b.per_target]:
        raise ValueError("reports cover different targets")

    def add(x: Iterable[tuple[str, int]], y: Iterable[tuple[str, int]]):
        out: dict[str, int] = dict(x)
        for s, h in y:
            out[s] = out.get(s, 0) + h
        return tuple(sorted(out.items()))

    targets = tuple(
        TargetCoverage(ta.pattern, ta.function, add(ta.symbols, tb.symbols)) for ta, tb in zip(a.per_target, b.per_target)
    )
    return CoverageReport(a.build_id, a.commit_id, targets, add(a.unmatched, b.unmatched))


def report_to_dict(report: CoverageReport) -> dict:
    return {
        "format": REPORT_FORMAT,
        "build_id": report.build_id,
        "commit_id": report.commit_id,
        "commit_coverage": report.commit_coverage,
        "covered_targets": report.covered_targets,
        "total_targets": len(report.per_target),
        "unmatched_symbols": report.unmatched_symbols,
        "per_target": [
            {
                "pattern": t.pattern,
                "function": t.function,
                "matched_symbols": t.matched_symbols,
                "total_hits": t.total_hits,
                "covered": t.covered,
                "symbols": [[s, h] for s, h in t.symbols],
            }
            for t in report.per_target
        ],
        "unmatched": [[s, h] for s, h in report.unmatched],
    }


def report_from_dict(doc: Mapping) -> CoverageReport:
    if doc.get("format") != REPORT_FORMAT:
        raise ValueError(f"not a coverage report (format={doc.get('format')!r})")
    targets = tuple(
        TargetCoverage(t["pattern"], t.get("function", ""), tuple((s, int(h)) for s, h in t["symbols"]))
        for t in doc["per_target"]
    )
    unmatched = tuple((s, int(h)) for s, h in doc.get("unmatched", []))
    return CoverageReport(doc["build_id"], doc["commit_id"], targets, unmatched)


def dumps_report(report: CoverageReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


@dataclass
class ReportStore:
    """One JSON document per build id under ``root``.

    Writes go to a temporary file that is then linked into place, so an
    existing report is never clobbered by a racing writer: the link fails
    and the store reports a conflict instead.
    """

    root: Path
    suffix: str = field(default=".json")

    def __post_init__(self):
        self.root = Path(self.root)

    def path_for(self, build_id: str) -> Path:
        return self.root / (BuildId(build_id) + self.suffix)

    def store(self, report: CoverageReport, force: bool = False, merge: bool = False) -> Path:
        target = self.path_for(report.build_id)
        self.root.mkdir(parents=True, exist_ok=True)
        if merge and target.exists():
            report = merge_reports(self.load(report.build_id), report)
            force = True
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=self.suffix, dir=self.root)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(dumps_report(report))
                fh.flush()
                os.fsync(fh.fileno())
            if force:
                os.replace(tmp, target)
            else:
                try:
                    os.link(tmp, target)
                except FileExistsError:
                    raise ReportConflict(f"report for build {report.build_id} already exists") from None
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return target

    def load(self, build_id: str) -> CoverageReport:
        path = self.path_for(build_id)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ReportNotFound(f"no report for build {build_id}") from None
        return report_from_dict(json.loads(text))

    def build_ids(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.name[: -len(self.suffix)] for p in self.root.glob("*" + self.suffix) if not p.name.startswith(".tmp-"))

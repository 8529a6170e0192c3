"""Unified diff parsing into post-image changed line ranges per file."""

from __future__ import annotations

import codecs
import enum
import hashlib
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

log = logging.getLogger(__name__)

__all__ = [
    "LineRange",
    "ChangeKind",
    "FileChange",
    "CommitDiff",
    "DiffParseError",
    "parse_unified_diff",
    "filter_source_files",
    "changed_ranges",
]


class DiffParseError(ValueError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True, order=True)
class LineRange:
    """Closed interval of 1-based line numbers."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 1:
            raise ValueError(f"line range start must be >= 1, got {self.start}")
        if self.end < self.start:
            raise ValueError(f"line range end {self.end} precedes start {self.start}")

    def __len__(self) -> int:
        return self.end - self.start + 1

    def __contains__(self, line: int) -> bool:
        return self.start <= line <= self.end

    def overlaps(self, other: LineRange) -> bool:
        return self.start <= other.end and other.start <= self.end


class ChangeKind(enum.Enum):
    ADDED = "added"
    MODIFIED = "modified"


@dataclass(frozen=True)
class FileChange:
    path: str
    kind: ChangeKind
    hunks: tuple[LineRange, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "hunks", tuple(self.hunks))
        for a, b in zip(self.hunks, self.hunks[1:]):
            if b.start <= a.end:
                raise ValueError(f"{self.path}: hunks {a} and {b} are unsorted or overlap")


@dataclass(frozen=True)
class CommitDiff:
    commit_id: str
    changes: tuple[FileChange, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "changes", tuple(self.changes))
        seen = set()
        for change in self.changes:
            if change.path in seen:
                raise ValueError(f"duplicate file change for {change.path}")
            seen.add(change.path)

    def __iter__(self):
        return iter(self.changes)

    def __len__(self) -> int:
        return len(self.changes)

    @property
    def paths(self) -> list[str]:
        return [c.path for c in self.changes]


_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")
_COMMIT_RE = re.compile(r"^(?:commit|From) ([0-9a-fA-F]{7,64})\b")
_GIT_HEADER_RE = re.compile(r"^diff --git (\S+) (\S+)$")


def _unquote(path: str) -> str:
    if len(path) >= 2 and path[0] == '"' and path[-1] == '"':
        # git C-quotes unusual paths, with octal escapes for non-ASCII bytes
        return codecs.escape_decode(path[1:-1].encode("utf-8"))[0].decode("utf-8", "replace")
    return path


def _header_path(raw: str, prefix: str) -> str | None:
    """Path from a ``---``/``+++`` header; None for /dev/null."""
    # timestamps follow a tab in traditional diff output
    path = raw.split("\t", 1)[0].rstrip()
    path = _unquote(path)
    if path == "/dev/null":
        return None
    if path.startswith(prefix):
        path = path[len(prefix):]
    return path


def _merge(ranges: Iterable[LineRange]) -> list[LineRange]:
    merged: list[LineRange] = []
    for r in sorted(ranges):
        if merged and r.start <= merged[-1].end + 1:
            last = merged[-1]
            merged[-1] = LineRange(last.start, max(last.end, r.end))
        else:
            merged.append(r)
    return merged


class _FileBlock:
    def __init__(self):
        self.old_path: str | None = None
        self.new_path: str | None = None
        self.renamed_to: str | None = None
        self.is_new = False
        self.is_deleted = False
        self.binary = False
        self.has_headers = False
        self.hunks: list[LineRange] = []


def parse_unified_diff(text: str, commit_id: str | None = None) -> CommitDiff:
    """Parse unified diff text into a :class:`CommitDiff`.

    Each hunk contributes its whole post-image extent ``[c, c+d-1]``;
    pure deletions (``d == 0``) contribute nothing.  New files become
    ``ADDED``, deleted files are dropped, binary files are skipped with a
    warning and renames are reported as an ``ADDED`` change of the new path.

    When ``commit_id`` is not given it is taken from a ``commit <sha>`` or
    ``From <sha>`` line, falling back to a content hash of the text.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    found_id: str | None = None
    blocks: list[_FileBlock] = []
    block: _FileBlock | None = None
    old_left = new_left = 0

    def new_block() -> _FileBlock:
        b = _FileBlock()
        blocks.append(b)
        return b

    for lineno, line in enumerate(lines, 1):
        if line.endswith("\r"):
            line = line[:-1]

        if old_left > 0 or new_left > 0:
            tag = line[:1]
            if tag == "\\":
                continue
            if tag in (" ", ""):
                old_left -= 1
                new_left -= 1
            elif tag == "-":
                old_left -= 1
            elif tag == "+":
                new_left -= 1
            else:
                raise DiffParseError(f"unexpected line inside hunk: {line[:40]!r}", lineno)
            if old_left < 0 or new_left < 0:
                raise DiffParseError("hunk body longer than its header declares", lineno)
            continue

        if line.startswith("@@"):
            m = _HUNK_RE.match(line)
            if m is None:
                raise DiffParseError(f"malformed hunk header {line!r}", lineno)
            if block is None or not block.has_headers:
                raise DiffParseError("hunk header before file headers", lineno)
            old_left = 1 if m.group(2) is None else int(m.group(2))
            start = int(m.group(3))
            new_left = 1 if m.group(4) is None else int(m.group(4))
            if new_left > 0:
                if start < 1:
                    raise DiffParseError(f"invalid post-image start {start}", lineno)
                block.hunks.append(LineRange(start, start + new_left - 1))
            continue

        if line.startswith("\\"):
            continue

        m = _GIT_HEADER_RE.match(line)
        if m:
            block = new_block()
            continue
        if line.startswith("--- "):
            if block is None or block.has_headers:
                block = new_block()
            block.old_path = _header_path(line[4:], "a/")
            block.is_new = block.old_path is None
            continue
        if line.startswith("+++ "):
            if block is None:
                raise DiffParseError("'+++' header without preceding '---'", lineno)
            block.new_path = _header_path(line[4:], "b/")
            block.is_deleted = block.new_path is None
            block.has_headers = True
            continue
        if block is not None and not block.has_headers:
            if line.startswith("Binary files ") or line.startswith("GIT binary patch"):
                block.binary = True
            elif line.startswith("rename to "):
                block.renamed_to = _unquote(line[len("rename to "):])
            elif line.startswith("new file mode"):
                block.is_new = True
            elif line.startswith("deleted file mode"):
                block.is_deleted = True
            continue
        if block is not None and (line.startswith("Binary files ") or line.startswith("GIT binary patch")):
            block.binary = True
            continue
        if found_id is None:
            cm = _COMMIT_RE.match(line)
            if cm:
                found_id = cm.group(1)

    if old_left > 0 or new_left > 0:
        raise DiffParseError("diff ends inside a hunk", len(lines))

    by_path: dict[str, FileChange] = {}
    for b in blocks:
        if b.binary:
            log.warning("skipping binary file %s", b.new_path or b.renamed_to or b.old_path)
            continue
        if b.is_deleted:
            continue
        path = b.new_path or b.renamed_to
        if path is None:
            # mode-only change
            continue
        renamed = b.renamed_to is not None or (
            b.old_path is not None and b.new_path is not None and b.old_path != b.new_path
        )
        if renamed:
            change = FileChange(path, ChangeKind.ADDED, ())
        elif b.is_new:
            change = FileChange(path, ChangeKind.ADDED, _merge(b.hunks))
        else:
            if not b.hunks and not b.has_headers:
                continue
            change = FileChange(path, ChangeKind.MODIFIED, _merge(b.hunks))
        prev = by_path.get(path)
        if prev is not None:
            if ChangeKind.ADDED in (prev.kind, change.kind):
                change = FileChange(path, ChangeKind.ADDED, ())
            else:
                change = FileChange(path, ChangeKind.MODIFIED, _merge(prev.hunks + change.hunks))
        by_path[path] = change

    if commit_id is None:
        commit_id = found_id or "diff-" + hashlib.sha1(text.encode("utf-8")).hexdigest()[:12]
    return CommitDiff(commit_id, tuple(by_path.values()))


def filter_source_files(diff: CommitDiff, extensions: Sequence[str]) -> CommitDiff:
    """Keep only changes whose path ends with one of ``extensions`` (case-sensitive)."""
    suffixes = tuple(extensions)
    if not suffixes:
        return CommitDiff(diff.commit_id, ())
    return CommitDiff(diff.commit_id, tuple(c for c in diff.changes if c.path.endswith(suffixes)))


def changed_ranges(change: FileChange, line_count: int | None = None) -> list[LineRange]:
    """Hunks of ``change`` with adjacent ranges merged.

    Added files whose hunks are empty by convention (renames) need
    ``line_count`` to report the whole-file range.
    """
    if change.kind is ChangeKind.ADDED and not change.hunks:
        return [LineRange(1, line_count)] if line_count else []
    return _merge(change.hunks)

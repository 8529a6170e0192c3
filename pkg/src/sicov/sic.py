"""Selective instrumentation contexts and profile lists.

A context (SIC) is the set of functions chosen for instrumentation; here,
the functions a commit touched.  It is written out as a profile list that
disables instrumentation by default and allows each selected symbol::

    # sicov profile list commit=<commit_id>
    default:skip
    function:_ZN2ns6Widget6resizeEmb=allow
    function:*go*=allow
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .cppscan import Builtin, Const, FunctionSignature, FunctionSpan, LValueRef, Named, Pointer, RValueRef
from .diffmodel import ChangeKind, CommitDiff, FileChange, LineRange
from .mangle import MangledName, UnmangleableError, is_mangleable, mangle_span, match_targets_by_name

__all__ = [
    "Action",
    "FunctionTarget",
    "SelectiveInstrumentationContext",
    "ProfileEntry",
    "ProfileList",
    "ProfileListError",
    "MissingScanError",
    "select_targets",
    "build_sic",
    "merge_sics",
    "emit_profile_list",
    "parse_profile_list",
    "fallback_pattern",
    "sic_to_dict",
    "sic_from_dict",
    "dump_sic",
    "load_sic",
]

HEADER_PREFIX = "# sicov profile list commit="


class Action(str, enum.Enum):
    ALLOW = "allow"
    SKIP = "skip"
    FORBID = "forbid"


class ProfileListError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)
        self.lineno = lineno


class MissingScanError(KeyError):
    def __init__(self, paths: Sequence[str]):
        super().__init__(", ".join(paths))
        self.paths = list(paths)

    def __str__(self):
        return "no scan for changed file(s): " + ", ".join(self.paths)


@dataclass(frozen=True)
class FunctionTarget:
    signature: FunctionSignature
    span: LineRange
    file: str
    mangled: MangledName | None = None
    fallback_pattern: str | None = None
    fallback_reason: str | None = None

    def __post_init__(self):
        if (self.mangled is None) == (self.fallback_pattern is None):
            raise ValueError("a target carries exactly one of mangled name / fallback pattern")

    @property
    def pattern(self) -> str:
        return self.mangled.text if self.mangled is not None else self.fallback_pattern

    @property
    def is_fallback(self) -> bool:
        return self.mangled is None


@dataclass(frozen=True)
class SelectiveInstrumentationContext:
    commit_id: str
    targets: tuple[FunctionTarget, ...] = ()
    total_functions_hint: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        seen = set()
        for t in self.targets:
            key = (t.file, t.span)
            if key in seen:
                raise ValueError(f"duplicate target {t.file}:{t.span.start}-{t.span.end}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.targets)

    def __iter__(self):
        return iter(self.targets)

    @property
    def patterns(self) -> list[str]:
        """Distinct patterns in target order."""
        return list(dict.fromkeys(t.pattern for t in self.targets))

    @property
    def fallback_count(self) -> int:
        return sum(1 for t in self.targets if t.is_fallback)


@dataclass(frozen=True)
class ProfileEntry:
    pattern: str
    action: Action
    kind: str = "function"


@dataclass(frozen=True)
class ProfileList:
    default_action: Action
    entries: tuple[ProfileEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "default_action", Action(self.default_action))
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        for e in self.entries:
            key = (e.kind, e.pattern)
            if key in seen:
                raise ValueError(f"duplicate entry {e.kind}:{e.pattern}")
            seen.add(key)


def fallback_pattern(sig: FunctionSignature) -> str:
    name = sig.name.lstrip("~")
    return f"*{name}*"


def select_targets(spans: Iterable[FunctionSpan], change: FileChange) -> list[FunctionSpan]:
    """Spans intersecting any post-image hunk; every span of an added file."""
    spans = list(spans)
    if change.kind is ChangeKind.ADDED:
        return spans
    return [s for s in spans if any(s.span.overlaps(h) for h in change.hunks)]


Mangler = Callable[[FunctionSpan], MangledName]


def _to_target(span: FunctionSpan, manglings: Mapping | Mangler | None) -> FunctionTarget:
    result = None
    reason = None
    if manglings is None or callable(manglings):
        verdict = is_mangleable(span)
        if verdict:
            try:
                result = (manglings or mangle_span)(span)
            except UnmangleableError as exc:
                reason = str(exc)
        else:
            reason = verdict.reason
    else:
        result = manglings.get(span.signature)
        if isinstance(result, Exception):
            reason, result = str(result), None
        elif isinstance(result, str):
            result = MangledName(result)
        if span.is_template:
            result, reason = None, "template"
        elif result is None and reason is None:
            reason = "no mangled name"
    if result is not None:
        return FunctionTarget(span.signature, span.span, span.file, mangled=result)
    return FunctionTarget(
        span.signature, span.span, span.file, fallback_pattern=fallback_pattern(span.signature), fallback_reason=reason
    )


def build_sic(
    diff: CommitDiff,
    scans: Mapping[str, Sequence[FunctionSpan]],
    manglings: Mapping | Mangler | None = None,
    total_functions: int | None = None,
) -> SelectiveInstrumentationContext:
    """Select the functions ``diff`` touches and attach their symbols.

    Overloads of a selected function declared in the same file are selected
    too, since symbols are matched on the terminal name alone.  ``manglings``
    maps signatures to mangled names (missing or exception values fall back
    to a wildcard) or is a callable; by default :func:`mangle_span` is used.
    """
    missing = [c.path for c in diff.changes if c.path not in scans]
    if missing:
        raise MissingScanError(missing)

    chosen: dict[tuple[str, LineRange], FunctionSpan] = {}
    for change in diff.changes:
        spans = list(scans[change.path])
        hit = select_targets(spans, change)
        names = {s.name for s in hit}
        matched = set(match_targets_by_name(names, [s.signature for s in spans]))
        for s in spans:
            if s.signature in matched or any(s is h for h in hit):
                chosen[(change.path, s.span)] = s
    ordered = sorted(chosen.items(), key=lambda kv: (kv[0][0], kv[0][1].start, kv[0][1].end))
    targets = tuple(_to_target(s, manglings) for (path, _), s in ordered)
    return SelectiveInstrumentationContext(diff.commit_id, targets, total_functions)


def merge_sics(sics: Sequence[SelectiveInstrumentationContext], commit_id: str | None = None) -> SelectiveInstrumentationContext:
    """Fold per-commit contexts into one batch context, deduplicated by pattern."""
    seen_patterns: set[str] = set()
    seen_keys: set = set()
    targets = []
    for sic in sics:
        for t in sic.targets:
            if t.pattern in seen_patterns or (t.file, t.span) in seen_keys:
                continue
            seen_patterns.add(t.pattern)
            seen_keys.add((t.file, t.span))
            targets.append(t)
    hints = [s.total_functions_hint for s in sics if s.total_functions_hint is not None]
    if commit_id is None:
        commit_id = "+".join(s.commit_id for s in sics) if sics else "batch"
    return SelectiveInstrumentationContext(commit_id, tuple(targets), max(hints) if hints else None)


def emit_profile_list(sic: SelectiveInstrumentationContext) -> str:
    lines = [HEADER_PREFIX + sic.commit_id, "default:" + Action.SKIP.value]
    lines += [f"function:{p}={Action.ALLOW.value}" for p in sic.patterns]
    return "\n".join(lines) + "\n"


def parse_profile_list(text: str) -> ProfileList:
    """Parse a profile list, tolerating blank lines, ``#`` comments and ``[section]`` headers.

    A list without a ``default:`` line allows everything by default.
    """
    default: Action | None = None
    entries: list[ProfileEntry] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.rstrip("\r").strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            continue
        if line.startswith("default:"):
            if default is not None:
                raise ProfileListError("second default line", lineno)
            default = _action(line[len("default:"):], lineno)
            continue
        if line.startswith("function:"):
            body = line[len("function:"):]
            pattern, eq, action = body.rpartition("=")
            if not eq or not pattern:
                raise ProfileListError(f"expected function:<pattern>=<action>, got {line!r}", lineno)
            if pattern in seen:
                raise ProfileListError(f"duplicate entry for {pattern!r}", lineno)
            seen.add(pattern)
            entries.append(ProfileEntry(pattern, _action(action, lineno)))
            continue
        raise ProfileListError(f"unrecognized line {line!r}", lineno)
    return ProfileList(default if default is not None else Action.ALLOW, tuple(entries))


def _action(token: str, lineno: int) -> Action:
    try:
        return Action(token.strip())
    except ValueError:
        raise ProfileListError(f"unknown action {token.strip()!r}", lineno) from None


# -- SIC documents (JSON) ---------------------------------------------------


_TYPE_TAGS = {Pointer: "pointer", LValueRef: "lref", RValueRef: "rref", Const: "const"}


def _type_to_json(t):
    if isinstance(t, Builtin):
        return {"builtin": t.kind}
    if isinstance(t, Named):
        return {"named": list(t.components)}
    tag = _TYPE_TAGS[type(t)]
    return {tag: _type_to_json(t.target)}


def _type_from_json(d):
    (tag, value), = d.items()
    if tag == "builtin":
        return Builtin(value)
    if tag == "named":
        return Named(tuple(value))
    cls = {v: k for k, v in _TYPE_TAGS.items()}[tag]
    return cls(_type_from_json(value))


def sic_to_dict(sic: SelectiveInstrumentationContext, extra: Mapping | None = None) -> dict:
    targets = []
    for t in sic.targets:
        sig = t.signature
        targets.append({
            "file": t.file,
            "span": [t.span.start, t.span.end],
            "function": "::".join(sig.qualified_name),
            "signature": sig.display(),
            "qualified_name": list(sig.qualified_name),
            "parameters": None if sig.parameters is None else [_type_to_json(p) for p in sig.parameters],
            "is_const_member": sig.is_const_member,
            "is_extern_c": sig.is_extern_c,
            "is_member": sig.is_member,
            "unsupported": sig.unsupported,
            "mangled": t.mangled.text if t.mangled else None,
            "fallback_pattern": t.fallback_pattern,
            "fallback_reason": t.fallback_reason,
        })
    doc = {
        "format": "sicov-sic/1",
        "commit_id": sic.commit_id,
        "total_functions": sic.total_functions_hint,
        "target_count": len(sic.targets),
        "fallback_count": sic.fallback_count,
        "targets": targets,
    }
    if extra:
        doc.update(extra)
    return doc


def sic_from_dict(doc: Mapping) -> SelectiveInstrumentationContext:
    if doc.get("format") != "sicov-sic/1":
        raise ValueError(f"not a SIC document (format={doc.get('format')!r})")
    targets = []
    for t in doc["targets"]:
        params = t.get("parameters")
        sig = FunctionSignature(
            qualified_name=tuple(t["qualified_name"]),
            parameters=None if params is None else tuple(_type_from_json(p) for p in params),
            is_const_member=t.get("is_const_member", False),
            is_extern_c=t.get("is_extern_c", False),
            is_member=t.get("is_member", False),
            unsupported=t.get("unsupported"),
        )
        targets.append(FunctionTarget(
            sig,
            LineRange(*t["span"]),
            t["file"],
            mangled=MangledName(t["mangled"]) if t.get("mangled") else None,
            fallback_pattern=t.get("fallback_pattern"),
            fallback_reason=t.get("fallback_reason"),
        ))
    return SelectiveInstrumentationContext(doc["commit_id"], tuple(targets), doc.get("total_functions"))


def dump_sic(sic: SelectiveInstrumentationContext, extra: Mapping | None = None) -> str:
    return json.dumps(sic_to_dict(sic, extra), indent=2) + "\n"


def load_sic(text: str) -> SelectiveInstrumentationContext:
    return sic_from_dict(json.loads(text))

"""``sicov`` command line: extract profile lists, estimate overhead, manage coverage reports.

Exit codes: 0 success, 2 diff/scan/record parse failure, 3 pipeline
precondition failure (missing file, scan or compile command), 4 store
conflict, 5 report not found, 64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import re
import shlex
import subprocess
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import compdb as compdb_mod
from .coverage import ReportConflict, ReportNotFound, ReportStore, RecordFormatError, build_report, ingest_records
from .cppscan import FunctionSpan, ScanError, decode_source, scan_file
from .diffmodel import DiffParseError, filter_source_files, parse_unified_diff
from .model import (
    DEFAULT_MODEL,
    ContextKind,
    DomainError,
    InstrumentationMode,
    ModelConfig,
    OverheadModel,
    SIC_TAXONOMY_IFR,
    compute_ifr,
    estimate_commit_budget,
    estimate_per,
    estimate_tcpu,
    fps_reference,
    load_model_config,
    max_ifr_within_budget,
)
from .sic import MissingScanError, build_sic, dump_sic, emit_profile_list, load_sic

log = logging.getLogger("sicov")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_CONFLICT = 4
EXIT_NOT_FOUND = 5
EXIT_USAGE = 64

DEFAULT_EXTENSIONS = (".cpp", ".cc", ".cxx")
DEFAULT_STORE = ".sicov/reports"
DEFAULT_VCS_COMMAND = "git -C {repo} show --format=commit%x20%H --unified=0 {commit}"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    repo_root: Path = Path(".")
    compdb_path: Path | None = None
    extensions: tuple[str, ...] = DEFAULT_EXTENSIONS
    store_root: Path = Path(DEFAULT_STORE)
    model: OverheadModel = DEFAULT_MODEL
    fps: dict = field(default_factory=dict)
    vcs_command: str = DEFAULT_VCS_COMMAND

    def __post_init__(self):
        if not self.extensions:
            raise UsageError("extension list must not be empty")


def _config(args) -> RunConfig:
    loaded = ModelConfig()
    if getattr(args, "config", None):
        try:
            loaded = load_model_config(args.config)
        except FileNotFoundError:
            raise _Failure(EXIT_PRECONDITION, f"config file not found: {args.config}") from None
        except DomainError as exc:
            raise _Failure(EXIT_PARSE, str(exc)) from None
    s = loaded.settings
    repo = getattr(args, "repo", None) or s.get("repo", ".")
    compdb = getattr(args, "compdb", None) or s.get("compdb")
    exts = getattr(args, "extensions", None) or s.get("extensions")
    if isinstance(exts, str):
        exts = [e.strip() for e in exts.split(",") if e.strip()]
    store = getattr(args, "store", None) or os.environ.get("SICOV_STORE") or s.get("store") or DEFAULT_STORE
    cfg = RunConfig(
        repo_root=Path(repo),
        compdb_path=Path(compdb) if compdb else None,
        extensions=tuple(exts) if exts else DEFAULT_EXTENSIONS,
        store_root=Path(store),
        model=loaded.model,
        fps=loaded.fps,
        vcs_command=s.get("vcs_command", DEFAULT_VCS_COMMAND),
    )
    return cfg


def _emit(values: Sequence[tuple[str, object]], porcelain: bool, out=None) -> None:
    out = out or sys.stdout
    width = max((len(k) for k, _ in values), default=0)
    for k, v in values:
        if isinstance(v, float):
            v = f"{v:.10g}"
        if porcelain:
            print(f"{k}={v}", file=out)
        else:
            print(f"{k + ':':<{width + 1}} {v}", file=out)


def _read_input(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    try:
        return Path(source).read_text(encoding="utf-8", errors="replace")
    except FileNotFoundError:
        raise _Failure(EXIT_PRECONDITION, f"file not found: {source}") from None


_UNSAFE = re.compile(r"[^\w.+-]")


# -- extract ------------------------------------------------------------------


def _diff_text(args, cfg: RunConfig) -> str:
    if args.diff and args.commit:
        raise UsageError("give either --diff or --commit, not both")
    if args.commit:
        cmd = cfg.vcs_command.format(repo=shlex.quote(str(cfg.repo_root)), commit=shlex.quote(args.commit))
        proc = subprocess.run(shlex.split(cmd), capture_output=True, text=True)
        if proc.returncode != 0:
            raise _Failure(EXIT_PRECONDITION, f"VCS command failed ({proc.returncode}): {proc.stderr.strip()}")
        return proc.stdout
    return _read_input(args.diff or "-")


def _scan_changed(cfg: RunConfig, paths: Sequence[str]) -> dict[str, list[FunctionSpan]]:
    scans = {}
    for rel in paths:
        full = cfg.repo_root / rel
        try:
            data = full.read_bytes()
        except (FileNotFoundError, IsADirectoryError, NotADirectoryError):
            raise _Failure(EXIT_PRECONDITION, f"cannot scan {rel}: no such file under {cfg.repo_root}") from None
        try:
            scans[rel] = scan_file(decode_source(data, rel), rel)
        except ScanError as exc:
            raise _Failure(EXIT_PARSE, f"scan failed: {exc}") from None
    return scans


def _frontend_configs(cfg: RunConfig, paths: Sequence[str]) -> dict:
    if cfg.compdb_path is None:
        return {}
    try:
        db = compdb_mod.load_compdb(cfg.compdb_path)
    except FileNotFoundError as exc:
        raise _Failure(EXIT_PRECONDITION, str(exc)) from None
    except compdb_mod.CompdbError as exc:
        raise _Failure(EXIT_PRECONDITION, str(exc)) from None
    root = str(cfg.repo_root.resolve())
    out = {}
    for rel in paths:
        try:
            cmd = compdb_mod.lookup(db, rel, root=root)
        except compdb_mod.CompileCommandNotFound:
            raise _Failure(EXIT_PRECONDITION, f"no compile command for {rel} in {cfg.compdb_path}") from None
        out[rel] = compdb_mod.extract_frontend_args(cmd).to_dict()
    return out


def cmd_extract(args) -> int:
    cfg = _config(args)
    if not cfg.repo_root.is_dir():
        raise _Failure(EXIT_PRECONDITION, f"repository root does not exist: {cfg.repo_root}")
    started = time.perf_counter()
    try:
        diff = parse_unified_diff(_diff_text(args, cfg), commit_id=args.commit_id)
    except DiffParseError as exc:
        raise _Failure(EXIT_PARSE, f"diff parse failed: {exc}") from None
    diff = filter_source_files(diff, cfg.extensions)
    paths = diff.paths
    frontend = _frontend_configs(cfg, paths)
    scans = _scan_changed(cfg, paths)
    try:
        sic = build_sic(diff, scans, total_functions=args.total_functions)
    except MissingScanError as exc:  # pragma: no cover - every path is scanned above
        raise _Failure(EXIT_PRECONDITION, str(exc)) from None
    elapsed = time.perf_counter() - started

    ifr = None
    if args.total_functions is not None:
        try:
            ifr = compute_ifr(len(sic.targets), args.total_functions)
        except DomainError as exc:
            raise _Failure(EXIT_PRECONDITION, str(exc)) from None

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = _UNSAFE.sub("_", sic.commit_id)
    list_path = out_dir / f"{stem}.list"
    sic_path = out_dir / f"{stem}.sic.json"
    list_path.write_bytes(emit_profile_list(sic).encode("utf-8"))
    extra = {"ifr": ifr, "files": paths, "entries": len(sic.patterns)}
    if frontend:
        extra["frontend"] = frontend
    sic_path.write_text(dump_sic(sic, extra), encoding="utf-8", newline="\n")

    for t in sic.targets:
        if t.is_fallback:
            log.warning("%s:%d: %s falls back to %s (%s)", t.file, t.span.start, t.signature.display(), t.pattern, t.fallback_reason)
    values = [
        ("commit", sic.commit_id),
        ("files", len(paths)),
        ("targets", len(sic.targets)),
        ("entries", len(sic.patterns)),
        ("unmangleable", sic.fallback_count),
    ]
    if ifr is not None:
        values.append(("ifr", ifr))
    values += [("extraction_seconds", round(elapsed, 4)), ("list", list_path), ("sic", sic_path)]
    _emit(values, args.porcelain)
    return EXIT_OK


# -- estimate -----------------------------------------------------------------


def cmd_estimate(args) -> int:
    cfg = _config(args)
    model = cfg.model
    mode = InstrumentationMode.parse(args.mode)
    groups = [g for g in ("ifr", "files", "commits", "budget", "ifr_cap", "fps") if getattr(args, g) is not None]
    if len(groups) != 1:
        raise UsageError("give exactly one of --ifr, --files, --commits, --budget, --ifr-cap, --fps")
    group = groups[0]
    if args.per_commit_ifr is not None and group not in ("commits", "budget", "ifr_cap"):
        raise UsageError("--per-commit-ifr only applies to --commits, --budget and --ifr-cap")
    per_commit = args.per_commit_ifr if args.per_commit_ifr is not None else SIC_TAXONOMY_IFR["median-commit"]

    values: list[tuple[str, object]] = [("mode", mode.value)]
    highlight = None
    if group == "files":
        values += [("per_file_coefficient", model.per_file_coefficient), ("files", args.files), ("per", estimate_per(args.files, model))]
    elif group == "fps":
        entry = fps_reference(mode, args.fps, cfg.fps or None)
        values += [("context", args.fps), ("fps_ratio", entry.ratio), ("qualifier", entry.qualifier)]
    else:
        values += [("slope", model.slope(mode)), ("intercept", model.intercept)]
        if group == "ifr":
            highlight = args.ifr
            values += [("ifr", args.ifr), ("t_cpu", estimate_tcpu(model, mode, args.ifr))]
        elif group == "commits":
            if args.commits < 0:
                raise DomainError("--commits must be non-negative")
            highlight = args.commits * per_commit
            values += [("commits", args.commits), ("per_commit_ifr", per_commit), ("ifr", highlight),
                       ("t_cpu", estimate_tcpu(model, mode, highlight))]
        elif group == "budget":
            highlight = max_ifr_within_budget(model, mode, args.budget)
            values += [("budget", args.budget), ("max_ifr", highlight), ("per_commit_ifr", per_commit),
                       ("commit_budget", estimate_commit_budget(model, mode, per_commit, budget=args.budget))]
        else:
            highlight = args.ifr_cap
            values += [("ifr_cap", args.ifr_cap), ("t_cpu_at_cap", estimate_tcpu(model, mode, args.ifr_cap)),
                       ("per_commit_ifr", per_commit),
                       ("commit_budget", estimate_commit_budget(model, mode, per_commit, ifr_cap=args.ifr_cap))]
    if args.plot:
        from .plotting import plot_tcpu

        budget = args.budget if args.budget is not None else 2.0
        values.append(("plot", plot_tcpu(model, args.plot, budget=budget, highlight=highlight)))
    _emit(values, args.porcelain)
    return EXIT_OK


# -- report -------------------------------------------------------------------


def cmd_report(args) -> int:
    cfg = _config(args)
    store = ReportStore(cfg.store_root)
    if args.action == "ingest":
        try:
            sic = load_sic(_read_input(args.sic))
        except (ValueError, KeyError) as exc:
            raise _Failure(EXIT_PARSE, f"bad SIC document {args.sic}: {exc}") from None
        try:
            records = ingest_records(_read_input(args.records))
        except RecordFormatError as exc:
            raise _Failure(EXIT_PARSE, f"{args.records}: {exc}") from None
        report = build_report(sic, records, args.build_id)
        try:
            path = store.store(report, force=args.force, merge=args.merge)
        except ReportConflict as exc:
            raise _Failure(EXIT_CONFLICT, f"{exc}; use --force to replace or --merge to add hits") from None
        except ValueError as exc:
            raise _Failure(EXIT_CONFLICT, f"cannot merge: {exc}") from None
        report = store.load(report.build_id)
        _emit([
            ("build_id", report.build_id),
            ("commit", report.commit_id),
            ("covered_targets", report.covered_targets),
            ("total_targets", len(report.per_target)),
            ("commit_coverage", report.commit_coverage),
            ("report", path),
        ], args.porcelain)
        return EXIT_OK

    try:
        report = store.load(args.build_id)
    except ReportNotFound as exc:
        raise _Failure(EXIT_NOT_FOUND, str(exc)) from None
    values: list[tuple[str, object]] = [
        ("build_id", report.build_id),
        ("commit", report.commit_id),
        ("covered_targets", report.covered_targets),
        ("total_targets", len(report.per_target)),
        ("commit_coverage", report.commit_coverage),
        ("unmatched_symbols", report.unmatched_symbols),
    ]
    if args.plot:
        from .plotting import plot_coverage

        values.append(("plot", plot_coverage(report, args.plot)))
    if args.porcelain:
        for i, t in enumerate(report.per_target):
            values += [(f"target.{i}.pattern", t.pattern), (f"target.{i}.hits", t.total_hits), (f"target.{i}.covered", int(t.covered))]
        _emit(values, True)
    else:
        _emit(values, False)
        print()
        print(f"{'hits':>8}  {'symbols':>7}  function / pattern")
        for t in report.per_target:
            mark = " " if t.covered else "!"
            print(f"{t.total_hits:>8}  {t.matched_symbols:>7} {mark}{t.function}  [{t.pattern}]")
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file with model coefficients and defaults")
    p.add_argument("--porcelain", action="store_true", help="print stable key=value lines")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sicov", description="Commit-scoped selective instrumentation for C++ coverage.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    ex = sub.add_parser("extract", help="build the profile list for one commit")
    _add_common(ex)
    ex.add_argument("--repo", help="repository root holding the post-change sources")
    ex.add_argument("--diff", help="unified diff file, '-' for stdin (default)")
    ex.add_argument("--commit", help="revision to diff with the configured VCS command")
    ex.add_argument("--commit-id", help="override the commit id taken from the diff")
    ex.add_argument("--compdb", help="compile_commands.json; every changed file must have an entry")
    ex.add_argument("--out", default=".", help="output directory (default: .)")
    ex.add_argument("--extensions", type=lambda s: [e for e in s.split(",") if e], help="comma-separated source suffixes")
    ex.add_argument("--total-functions", type=int, help="|F|, to report the IFR")
    ex.set_defaults(func=cmd_extract)

    es = sub.add_parser("estimate", help="predict build and extraction overhead")
    _add_common(es)
    es.add_argument("--mode", choices=[m.value for m in InstrumentationMode], default="fe")
    es.add_argument("--ifr", type=float, help="t_CPU at this instrumented function ratio")
    es.add_argument("--files", type=int, help="PER for a commit touching this many files")
    es.add_argument("--commits", type=int, help="t_CPU after instrumenting this many commits")
    es.add_argument("--budget", type=float, help="commits that fit under this t_CPU ratio")
    es.add_argument("--ifr-cap", type=float, help="commits that fit under this IFR")
    es.add_argument("--fps", choices=[c.value for c in ContextKind], help="reference FPS ratio for a context kind")
    es.add_argument("--per-commit-ifr", type=float, help="IFR of one commit (default: median commit)")
    es.add_argument("--plot", help="write a t_CPU vs IFR figure to this path")
    es.set_defaults(func=cmd_estimate)

    rp = sub.add_parser("report", help="ingest or show coverage reports")
    rsub = rp.add_subparsers(dest="action", metavar="ACTION")
    rsub.required = True
    ing = rsub.add_parser("ingest", help="join records against a SIC and store the report")
    _add_common(ing)
    ing.add_argument("--sic", required=True, help="SIC document written by extract")
    ing.add_argument("--records", required=True, help="'<symbol> <count>' lines, '-' for stdin")
    ing.add_argument("--build-id", required=True)
    ing.add_argument("--store", help="report store root (default: $SICOV_STORE or .sicov/reports)")
    group = ing.add_mutually_exclusive_group()
    group.add_argument("--force", action="store_true", help="replace an existing report")
    group.add_argument("--merge", action="store_true", help="add hits to an existing report")
    ing.set_defaults(func=cmd_report)
    show = rsub.add_parser("show", help="print a stored report")
    _add_common(show)
    show.add_argument("--build-id", required=True)
    show.add_argument("--store")
    show.add_argument("--plot", help="write a per-target hit chart to this path")
    show.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="sicov: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sicov: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _Failure as exc:
        print(f"sicov: error: {exc}", file=sys.stderr)
        return exc.code
    except (DomainError, LookupError) as exc:
        print(f"sicov: error: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND if isinstance(exc, LookupError) else EXIT_USAGE
    except ValueError as exc:  # e.g. an invalid build id
        print(f"sicov: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

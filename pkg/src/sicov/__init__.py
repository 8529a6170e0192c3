"""Commit-scoped selective instrumentation for C++ code coverage.

The pipeline: parse a commit's unified diff (:mod:`sicov.diffmodel`), find
function spans in the changed files (:mod:`sicov.cppscan`), select the
functions the hunks touch and encode their symbols (:mod:`sicov.mangle`,
:mod:`sicov.sic`), emit a profile list, then join the coverage records of
the instrumented build back against the selection (:mod:`sicov.coverage`).
:mod:`sicov.model` holds the overhead metrics and fitted cost models.
"""

from .coverage import CoverageRecord, CoverageReport, ReportStore, build_report, ingest_records
from .cppscan import FunctionSignature, FunctionSpan, ScanError, scan_file
from .diffmodel import ChangeKind, CommitDiff, FileChange, LineRange, parse_unified_diff
from .mangle import MangledName, is_mangleable, mangle
from .model import (
    DEFAULT_MODEL,
    InstrumentationMode,
    OverheadModel,
    compute_ifr,
    estimate_commit_budget,
    estimate_per,
    estimate_tcpu,
    fps_reference,
    max_ifr_within_budget,
)
from .sic import SelectiveInstrumentationContext, build_sic, emit_profile_list, parse_profile_list

__version__ = "0.1.0"

__all__ = [
    "ChangeKind",
    "CommitDiff",
    "CoverageRecord",
    "CoverageReport",
    "DEFAULT_MODEL",
    "FileChange",
    "FunctionSignature",
    "FunctionSpan",
    "InstrumentationMode",
    "LineRange",
    "MangledName",
    "OverheadModel",
    "ReportStore",
    "ScanError",
    "SelectiveInstrumentationContext",
    "build_report",
    "build_sic",
    "compute_ifr",
    "emit_profile_list",
    "estimate_commit_budget",
    "estimate_per",
    "estimate_tcpu",
    "fps_reference",
    "ingest_records",
    "is_mangleable",
    "mangle",
    "max_ifr_within_budget",
    "parse_profile_list",
    "parse_unified_diff",
    "scan_file",
]

"""Compilation database (``compile_commands.json``) reading."""

from __future__ import annotations

import json
import os
import posixpath
import shlex
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "CompileCommand",
    "FrontendConfig",
    "CompdbError",
    "CompileCommandNotFound",
    "load_compdb",
    "lookup",
    "extract_frontend_args",
]


class CompdbError(ValueError):
    pass


class CompileCommandNotFound(LookupError):
    """No database entry for the queried file."""


@dataclass(frozen=True)
class CompileCommand:
    file: str
    directory: str
    arguments: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "arguments", tuple(self.arguments))
        if not self.file:
            raise ValueError("compile command needs a file")
        if not self.arguments:
            raise ValueError(f"compile command for {self.file} has no arguments")

    @property
    def path(self) -> str:
        """Normalized absolute path of the translation unit."""
        return _normalize(self.file, self.directory)


@dataclass(frozen=True)
class FrontendConfig:
    include_dirs: tuple[str, ...] = ()
    defines: tuple[str, ...] = ()
    language_level: str | None = None

    def to_dict(self) -> dict:
        return {
            "include_dirs": list(self.include_dirs),
            "defines": list(self.defines),
            "language_level": self.language_level,
        }


def _normalize(file: str, directory: str | None) -> str:
    if not posixpath.isabs(file) and directory:
        file = posixpath.join(directory, file)
    return posixpath.normpath(file)


def load_compdb(path: str | os.PathLike) -> list[CompileCommand]:
    """Load every entry of a compilation database, in file order.

    Entries carrying a ``command`` string are shell-split into arguments.
    Raises FileNotFoundError for a missing file and :class:`CompdbError`
    naming the offending entry index for malformed entries.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"compilation database not found: {path}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CompdbError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(doc, list):
        raise CompdbError(f"{path}: expected a JSON array of entries")

    commands = []
    for index, entry in enumerate(doc):
        if not isinstance(entry, dict):
            raise CompdbError(f"{path}: entry {index} is not an object")
        directory = entry.get("directory")
        file = entry.get("file")
        if not isinstance(directory, str) or not isinstance(file, str) or not file:
            raise CompdbError(f"{path}: entry {index} needs string 'directory' and 'file'")
        if "arguments" in entry:
            args = entry["arguments"]
            if not isinstance(args, list) or not args or not all(isinstance(a, str) for a in args):
                raise CompdbError(f"{path}: entry {index} has malformed 'arguments'")
        elif "command" in entry:
            if not isinstance(entry["command"], str):
                raise CompdbError(f"{path}: entry {index} has malformed 'command'")
            try:
                args = shlex.split(entry["command"])
            except ValueError as exc:
                raise CompdbError(f"{path}: entry {index}: cannot split command: {exc}") from None
            if not args:
                raise CompdbError(f"{path}: entry {index} has an empty command")
        else:
            raise CompdbError(f"{path}: entry {index} needs 'arguments' or 'command'")
        commands.append(CompileCommand(file=file, directory=directory, arguments=tuple(args)))
    return commands


def lookup(db: list[CompileCommand], file: str, root: str | None = None) -> CompileCommand:
    """First entry compiling ``file``.

    Relative queries resolve against ``root`` when given, otherwise against
    each entry's own directory.
    """
    if posixpath.isabs(file) or root is not None:
        target = _normalize(file, root)
        for cmd in db:
            if cmd.path == target:
                return cmd
    else:
        for cmd in db:
            if cmd.path == _normalize(file, cmd.directory):
                return cmd
    raise CompileCommandNotFound(file)


def extract_frontend_args(cmd: CompileCommand) -> FrontendConfig:
    includes: list[str] = []
    defines: list[str] = []
    level = None
    args = cmd.arguments
    i = 0
    while i < len(args):
        a = args[i]
        if a in ("-I", "-D") and i + 1 < len(args):
            (includes if a == "-I" else defines).append(args[i + 1])
            i += 2
            continue
        if a.startswith("-I"):
            includes.append(a[2:])
        elif a.startswith("-D"):
            defines.append(a[2:])
        elif a.startswith(("-std=", "--std=")):
            level = a.split("=", 1)[1]
        elif a.startswith("/std:"):
            level = a[5:]
        i += 1
    return FrontendConfig(tuple(includes), tuple(defines), level)

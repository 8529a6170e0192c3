"""Lightweight C++ scanner.

Finds every function definition in a translation unit and reports its
qualified name, a best-effort signature and its source span, without
preprocessing or compiling anything.  The scanner works on a token stream
with comments, literals and preprocessor directives removed, classifies
each ``{`` it meets at declaration scope (namespace, class, linkage block,
function body or anything else) and skips function bodies by brace
matching, so lambdas and local classes fold into the enclosing function.

Signatures are parsed for a bounded declarator subset: builtin types,
named types, pointers, references and ``const``.  Anything outside the
subset still yields a :class:`FunctionSpan` whose signature carries an
``unsupported`` reason instead of parameter types.

Named parameter types are resolved to fully qualified names using the
types, namespaces, aliases and using-directives visible in the file.
Names that cannot be resolved are assumed to live in the innermost
enclosing namespace (unqualified) or at global scope (qualified).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .diffmodel import LineRange

log = logging.getLogger(__name__)

__all__ = [
    "ScanError",
    "Token",
    "Directive",
    "StrippedSource",
    "TypeExpr",
    "Builtin",
    "Named",
    "Pointer",
    "LValueRef",
    "RValueRef",
    "Const",
    "FunctionSignature",
    "FunctionSpan",
    "strip_noncode",
    "scan_file",
    "decode_source",
    "MAX_DEPTH",
    "ANONYMOUS_NAMESPACE",
]

MAX_DEPTH = 256
ANONYMOUS_NAMESPACE = "(anonymous namespace)"


class ScanError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
        self.message = message
        self.line = line
        self.path = path


# ---------------------------------------------------------------------------
# type model


@dataclass(frozen=True)
class Builtin:
    kind: str

    def __str__(self):
        return self.kind


@dataclass(frozen=True)
class Named:
    components: tuple[str, ...]

    def __str__(self):
        return "::".join(self.components)


@dataclass(frozen=True)
class Pointer:
    target: "TypeExpr"

    def __str__(self):
        return f"{self.target}*"


@dataclass(frozen=True)
class LValueRef:
    target: "TypeExpr"

    def __str__(self):
        return f"{self.target}&"


@dataclass(frozen=True)
class RValueRef:
    target: "TypeExpr"

    def __str__(self):
        return f"{self.target}&&"


@dataclass(frozen=True)
class Const:
    target: "TypeExpr"

    def __str__(self):
        return f"{self.target} const"


TypeExpr = Builtin | Named | Pointer | LValueRef | RValueRef | Const

# canonical builtin spellings, keyed by sorted keyword multiset
_BUILTIN_FORMS: dict[tuple[str, ...], str] = {}


def _register_builtin(canonical: str, *spellings: str) -> None:
    for spelling in (canonical,) + spellings:
        _BUILTIN_FORMS[tuple(sorted(spelling.split()))] = canonical


_register_builtin("void")
_register_builtin("bool")
_register_builtin("char")
_register_builtin("signed char")
_register_builtin("unsigned char")
_register_builtin("wchar_t")
_register_builtin("short", "short int", "signed short", "signed short int")
_register_builtin("unsigned short", "unsigned short int")
_register_builtin("int", "signed", "signed int")
_register_builtin("unsigned int", "unsigned")
_register_builtin("long", "long int", "signed long", "signed long int")
_register_builtin("unsigned long", "unsigned long int")
_register_builtin("long long", "long long int", "signed long long", "signed long long int")
_register_builtin("unsigned long long", "unsigned long long int")
_register_builtin("float")
_register_builtin("double")
_register_builtin("long double")

BUILTIN_KEYWORDS = frozenset(
    {"void", "bool", "char", "wchar_t", "short", "int", "long", "float", "double", "signed", "unsigned"}
)

# LP64 resolution of size and fixed-width typedefs
_WELL_KNOWN_TYPEDEFS = {
    "size_t": "unsigned long",
    "ssize_t": "long",
    "ptrdiff_t": "long",
    "intptr_t": "long",
    "uintptr_t": "unsigned long",
    "int8_t": "signed char",
    "uint8_t": "unsigned char",
    "int16_t": "short",
    "uint16_t": "unsigned short",
    "int32_t": "int",
    "uint32_t": "unsigned int",
    "int64_t": "long",
    "uint64_t": "unsigned long",
}


@dataclass(frozen=True)
class FunctionSignature:
    qualified_name: tuple[str, ...]
    parameters: tuple[TypeExpr, ...] | None = ()
    is_const_member: bool = False
    is_extern_c: bool = False
    is_member: bool = False
    unsupported: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "qualified_name", tuple(self.qualified_name))
        if self.parameters is not None:
            object.__setattr__(self, "parameters", tuple(self.parameters))
        if not self.qualified_name or not self.qualified_name[-1]:
            raise ValueError("qualified name needs a non-empty terminal component")

    @property
    def name(self) -> str:
        return self.qualified_name[-1]

    @property
    def scope(self) -> tuple[str, ...]:
        return self.qualified_name[:-1]

    def display(self) -> str:
        name = "::".join(self.qualified_name)
        if self.parameters is None:
            return f"{name}(...)"
        text = f"{name}({', '.join(str(p) for p in self.parameters)})"
        return text + " const" if self.is_const_member else text

    def __str__(self):
        return self.display()


@dataclass(frozen=True)
class FunctionSpan:
    signature: FunctionSignature
    span: LineRange
    file: str = ""
    is_template: bool = False

    @property
    def name(self) -> str:
        return self.signature.name


# ---------------------------------------------------------------------------
# tokenizer


class Token(NamedTuple):
    kind: str  # ident, number, punct, literal
    text: str
    line: int


class Directive(NamedTuple):
    line: int
    text: str


@dataclass
class StrippedSource:
    tokens: list[Token] = field(default_factory=list)
    directives: list[Directive] = field(default_factory=list)


_PUNCTUATORS = sorted(
    """
    ... <=> <<= >>= ->* :: -> ++ -- << >> <= >= == != && || += -= *= /= %= &= |= ^= .*
    { } [ ] ( ) ; : , . ? ~ ! + - * / % ^ & | = < > #
    """.split(),
    key=len,
    reverse=True,
)
_IDENT_RE = re.compile(r"[A-Za-z_$\u0080-\U0010ffff][\w$\u0080-\U0010ffff]*")
_NUMBER_RE = re.compile(r"\.?\d(?:[eEpP][+-]|'(?=[\w])|[\w.])*")
_RAW_PREFIXES = {"R", "u8R", "uR", "UR", "LR"}
_LITERAL_PREFIXES = {"u8", "u", "U", "L"}


def decode_source(data: bytes, path: str = "") -> str:
    """Decode source bytes as UTF-8, replacing invalid sequences with a warning."""
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        log.warning("%s: invalid UTF-8, undecodable bytes replaced", path or "<source>")
        return data.decode("utf-8", errors="replace")


def strip_noncode(text: str) -> StrippedSource:
    """Tokenize ``text`` with comments, literals and directives removed.

    String and character literals survive as single ``literal`` tokens so
    linkage specifications stay visible, but their contents are never
    tokenized.  Every token keeps its original line number.
    """
    out = StrippedSource()
    tokens = out.tokens
    n = len(text)
    i = 0
    line = 1
    line_start = True  # only whitespace seen since the last newline

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            line_start = True
            i += 1
            continue
        if c in " \t\r\f\v":
            i += 1
            continue
        if c == "\\" and text.startswith("\n", i + 1):
            line += 1
            i += 2
            continue
        if c == "\\" and text.startswith("\r\n", i + 1):
            line += 1
            i += 3
            continue
        if c == "/" and text.startswith("/", i + 1):
            i, line = _skip_line_comment(text, i, line)
            continue
        if c == "/" and text.startswith("*", i + 1):
            i, line = _skip_block_comment(text, i, line)
            continue
        if c == "#" and line_start:
            start_line = line
            i, line, body = _read_directive(text, i, line)
            out.directives.append(Directive(start_line, body))
            line_start = True
            continue

        line_start = False
        if c == '"' or c == "'":
            i, line = _read_quoted(text, i, line, c, tokens, "")
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            word = m.group()
            j = m.end()
            if j < n and text[j] == '"' and word in _RAW_PREFIXES:
                i, line = _read_raw_string(text, i, j, line, tokens)
                continue
            if j < n and text[j] in "\"'" and word in _LITERAL_PREFIXES:
                i, line = _read_quoted(text, j, line, text[j], tokens, word)
                continue
            tokens.append(Token("ident", word, line))
            i = j
            continue
        m = _NUMBER_RE.match(text, i)
        if m:
            tokens.append(Token("number", m.group(), line))
            i = m.end()
            continue
        for p in _PUNCTUATORS:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, line))
                i += len(p)
                break
        else:
            # stray character (e.g. '@' or a backtick): keep it as punctuation
            tokens.append(Token("punct", c, line))
            i += 1
    return out


def _skip_line_comment(text: str, i: int, line: int) -> tuple[int, int]:
    n = len(text)
    while i < n:
        if text[i] == "\\" and text.startswith("\n", i + 1):
            line += 1
            i += 2
            continue
        if text[i] == "\n":
            return i, line
        i += 1
    return i, line


def _skip_block_comment(text: str, i: int, line: int) -> tuple[int, int]:
    end = text.find("*/", i + 2)
    if end < 0:
        raise ScanError("unterminated block comment", line)
    return end + 2, line + text.count("\n", i, end)


def _read_directive(text: str, i: int, line: int) -> tuple[int, int, str]:
    n = len(text)
    start = i
    while i < n:
        c = text[i]
        if c == "\\" and text.startswith("\n", i + 1):
            line += 1
            i += 2
        elif c == "\\" and text.startswith("\r\n", i + 1):
            line += 1
            i += 3
        elif c == "\n":
            break
        elif c == "/" and text.startswith("*", i + 1):
            i, line = _skip_block_comment(text, i, line)
        elif c == "/" and text.startswith("/", i + 1):
            i, line = _skip_line_comment(text, i, line)
        else:
            i += 1
    return i, line, text[start:i].rstrip()


def _read_quoted(text: str, i: int, line: int, quote: str, tokens: list, prefix: str) -> tuple[int, int]:
    n = len(text)
    start, start_line = i, line
    i += 1
    while i < n:
        c = text[i]
        if c == "\\":
            if text.startswith("\n", i + 1):
                line += 1
            i += 2
            continue
        if c == quote:
            i += 1
            tokens.append(Token("literal", prefix + text[start:i], start_line))
            return i, line
        if c == "\n":
            # unterminated literal: typically prose in a disabled #if branch
            log.debug("line %d: unterminated %s literal", start_line, quote)
            tokens.append(Token("literal", prefix + text[start:i], start_line))
            return i, line
        i += 1
    tokens.append(Token("literal", prefix + text[start:i], start_line))
    return i, line


def _read_raw_string(text: str, start: int, quote: int, line: int, tokens: list) -> tuple[int, int]:
    paren = text.find("(", quote + 1)
    delim = text[quote + 1:paren] if paren >= 0 else None
    if delim is None or len(delim) > 16 or any(ch in delim for ch in ' \\)\t\n"'):
        raise ScanError("malformed raw string delimiter", line)
    terminator = ")" + delim + '"'
    end = text.find(terminator, paren + 1)
    if end < 0:
        raise ScanError("unterminated raw string literal", line)
    end += len(terminator)
    tokens.append(Token("literal", text[start:end], line))
    return end, line + text.count("\n", start, end)


# ---------------------------------------------------------------------------
# declaration-level structure


class _Unit(NamedTuple):
    kind: str  # id, scope, tilde, op, angle, paren, bracket, brace, punct, literal, number
    start: int  # token index range [start, end)
    end: int
    text: str


_NOT_CALLABLE = frozenset(
    """
    decltype sizeof alignof alignas __attribute__ __declspec noexcept throw static_assert if while
    for switch return requires typeof __typeof__ __typeof asm __asm__ __asm catch _Alignas
    __alignof__ _Static_assert
    """.split()
)
_TAIL_WORDS = frozenset({"const", "volatile", "noexcept", "throw", "override", "final", "try", "__attribute__", "mutable"})
_CLASS_KEYS = frozenset({"class", "struct", "union"})
_SKIPPABLE_SPECIFIERS = frozenset(
    {"inline", "static", "extern", "constexpr", "consteval", "constinit", "virtual", "explicit", "friend",
     "typename", "struct", "class", "enum", "union", "register", "thread_local", "mutable"}
)

_OPERATOR_TOKENS = frozenset(
    "+ - * / % ^ & | ~ ! = < > += -= *= /= %= ^= &= |= << >> >>= <<= == != <= >= <=> && || ++ -- , ->* ->".split()
)


def _match(tokens: Sequence[Token], i: int, open_: str, close: str) -> int:
    """Index just past the token closing the group opened at ``i``; -1 if unclosed."""
    depth = 0
    for j in range(i, len(tokens)):
        t = tokens[j].text
        if t == open_:
            depth += 1
        elif t == close:
            depth -= 1
            if depth == 0:
                return j + 1
    return -1


def _match_angle(tokens: Sequence[Token], i: int, end: int) -> int:
    depth = 0
    j = i
    while j < end:
        t = tokens[j].text
        if t == "(" or t == "[":
            k = _match(tokens[:end], j, t, ")" if t == "(" else "]")
            if k < 0:
                return -1
            j = k
            continue
        if t == "<":
            depth += 1
        elif t == ">":
            depth -= 1
        elif t == ">>":
            depth -= 2
        elif t in (";", "{", "}"):
            return -1
        if depth <= 0:
            return j + 1 if depth == 0 else -1
        j += 1
    return -1


def _units(tokens: Sequence[Token]) -> list[_Unit]:
    units: list[_Unit] = []
    i = 0
    n = len(tokens)
    while i < n:
        t = tokens[i]
        text = t.text
        if text == "(" or text == "[" or text == "{":
            close = {"(": ")", "[": "]", "{": "}"}[text]
            j = _match(tokens, i, text, close)
            if j < 0:
                j = n
            units.append(_Unit({"(": "paren", "[": "bracket", "{": "brace"}[text], i, j, text))
            i = j
            continue
        if text == "<" and units and (
            (units[-1].kind == "id" and units[-1].text not in _NOT_CALLABLE) or units[-1].kind == "op"
        ):
            j = _match_angle(tokens, i, n)
            if j > 0:
                units.append(_Unit("angle", i, j, "<>"))
                i = j
                continue
        if t.kind == "ident" and text == "operator":
            j, name = _operator_name(tokens, i + 1)
            units.append(_Unit("op", i, j, name))
            i = j
            continue
        if t.kind == "ident":
            units.append(_Unit("id", i, i + 1, text))
        elif text == "::":
            units.append(_Unit("scope", i, i + 1, text))
        elif text == "~":
            units.append(_Unit("tilde", i, i + 1, text))
        elif t.kind == "literal":
            units.append(_Unit("literal", i, i + 1, text))
        elif t.kind == "number":
            units.append(_Unit("number", i, i + 1, text))
        else:
            units.append(_Unit("punct", i, i + 1, text))
        i += 1
    return units


def _operator_name(tokens: Sequence[Token], i: int) -> tuple[int, str]:
    n = len(tokens)
    if i >= n:
        return i, "operator"
    t = tokens[i].text
    if t == "(" and i + 1 < n and tokens[i + 1].text == ")":
        return i + 2, "operator()"
    if t == "[" and i + 1 < n and tokens[i + 1].text == "]":
        return i + 2, "operator[]"
    if t in ("new", "delete"):
        if i + 2 < n and tokens[i + 1].text == "[" and tokens[i + 2].text == "]":
            return i + 3, f"operator {t}[]"
        return i + 1, f"operator {t}"
    if tokens[i].kind == "literal" and tokens[i].text == '""':
        return i + 2, 'operator""' + (tokens[i + 1].text if i + 1 < n else "")
    if t in _OPERATOR_TOKENS:
        return i + 1, "operator" + t
    # conversion operator: type tokens up to the parameter list
    j = i
    while j < n and tokens[j].text != "(":
        j += 1
    return j, "operator " + " ".join(tok.text for tok in tokens[i:j])


@dataclass
class _Scope:
    kind: str  # namespace, class, extern
    components: tuple[str, ...]  # absolute components of this scope
    open_line: int
    is_template: bool = False
    extern_c: bool = False
    using: list[tuple[str, ...]] = field(default_factory=list)


@dataclass
class _Header:
    name_start: int  # unit index of declarator-id start
    name_end: int  # unit index of the parameter paren unit
    params: _Unit
    init_pending: bool
    trailing_return: bool
    const_member: bool
    ref_qualified: bool
    volatile_member: bool


class _Scanner:
    def __init__(self, text: str, path: str, max_depth: int):
        self.path = path
        self.max_depth = max_depth
        self.stripped = strip_noncode(text)
        self.tokens = self.stripped.tokens
        self.scopes: list[_Scope] = [_Scope("namespace", (), 0)]
        self.types: set[tuple[str, ...]] = set()
        self.namespaces: set[tuple[str, ...]] = {()}
        self.aliases: dict[tuple[str, ...], TypeExpr | None] = {}
        self.results: list[FunctionSpan] = []

    # -- errors ----------------------------------------------------------

    def error(self, message: str, line: int | None) -> ScanError:
        return ScanError(message, line, self.path or None)

    # -- scope helpers ---------------------------------------------------

    @property
    def scope(self) -> _Scope:
        return self.scopes[-1]

    def lexical_components(self) -> tuple[str, ...]:
        return self.scope.components

    def in_template(self) -> bool:
        return any(s.is_template for s in self.scopes)

    def extern_c(self) -> bool:
        return any(s.extern_c for s in self.scopes)

    def innermost_namespace(self) -> tuple[str, ...]:
        for s in reversed(self.scopes):
            if s.kind == "namespace":
                return s.components
        return ()

    def innermost_class(self) -> _Scope | None:
        s = self.scope
        return s if s.kind == "class" else None

    def check_depth(self, extra: int, line: int) -> None:
        if len(self.scopes) - 1 + extra > self.max_depth:
            raise self.error(f"brace nesting exceeds depth limit {self.max_depth}", line)

    # -- main loop -------------------------------------------------------

    def run(self) -> list[FunctionSpan]:
        toks = self.tokens
        n = len(toks)
        decl: list[Token] = []
        paren = 0
        i = 0
        while i < n:
            t = toks[i]
            text = t.text
            if t.kind == "punct":
                if text in ("(", "["):
                    paren += 1
                elif text in (")", "]"):
                    paren = max(0, paren - 1)
                elif text == "{":
                    if paren > 0:
                        j = self.skip_braces(i)
                        decl.extend((t, toks[j - 1]))
                        i = j
                        continue
                    i, decl = self.open_brace(i, decl)
                    paren = 0
                    continue
                elif text == "}":
                    if len(self.scopes) == 1:
                        raise self.error("unmatched '}'", t.line)
                    self.scopes.pop()
                    decl = []
                    paren = 0
                    i += 1
                    continue
                elif text == ";" and paren == 0:
                    self.simple_declaration(decl)
                    decl = []
                    i += 1
                    continue
                elif (
                    text == ":"
                    and paren == 0
                    and self.scope.kind == "class"
                    and len(decl) == 1
                    and decl[0].text in ("public", "private", "protected")
                ):
                    decl = []
                    i += 1
                    continue
            decl.append(t)
            i += 1
        if len(self.scopes) > 1:
            raise self.error("unbalanced braces at end of file; last open brace", self.scope.open_line)
        return self.results

    def skip_braces(self, i: int) -> int:
        """Index just past the brace matching the ``{`` at ``i``."""
        toks = self.tokens
        open_lines: list[int] = []
        for j in range(i, len(toks)):
            t = toks[j]
            if t.kind != "punct":
                continue
            if t.text == "{":
                open_lines.append(t.line)
                self.check_depth(len(open_lines), t.line)
            elif t.text == "}":
                open_lines.pop()
                if not open_lines:
                    return j + 1
        raise self.error("unbalanced braces at end of file; last open brace", open_lines[-1])

    def open_brace(self, i: int, decl: list[Token]) -> tuple[int, list[Token]]:
        brace = self.tokens[i]
        units = _units(decl)

        is_template = False
        k = 0
        while k + 1 < len(units) and units[k].kind == "id" and units[k].text == "template" and units[k + 1].kind == "angle":
            is_template = True
            k += 2
        while k < len(units) and units[k].kind == "bracket":
            k += 1
        body = units[k:]

        if body and body[0].text == "namespace" or (len(body) > 1 and body[0].text == "inline" and body[1].text == "namespace"):
            self.open_namespace(body, brace.line)
            return i + 1, []
        if len(body) == 2 and body[0].text == "extern" and body[1].kind == "literal":
            literal = body[1].text
            self.check_depth(1, brace.line)
            self.scopes.append(
                _Scope("extern", self.scope.components, brace.line, extern_c=literal == '"C"',
                       using=[])
            )
            return i + 1, []

        header = self.function_header(decl, units, k)
        if header is not None:
            if header.init_pending:
                j = self.skip_braces(i)
                return j, decl + [brace, self.tokens[j - 1]]
            j = self.skip_braces(i)
            end_line = self.tokens[j - 1].line
            # function-try-block handlers
            toks = self.tokens
            while j < len(toks) and toks[j].text == "catch":
                p = _match(toks, j + 1, "(", ")")
                if p < 0 or p >= len(toks) or toks[p].text != "{":
                    break
                j = self.skip_braces(p)
                end_line = toks[j - 1].line
            self.record_function(decl, units, header, is_template, end_line)
            return j, []

        keys = [u for u in body if u.kind == "id" and u.text in _CLASS_KEYS]
        is_enum = any(u.kind == "id" and u.text == "enum" for u in body)
        has_assign = any(u.kind == "punct" and u.text == "=" for u in body)
        if is_enum and not has_assign:
            self.register_enum(body)
            return self.skip_braces(i), decl
        if keys and not has_assign and body[0].kind == "id" and not any(u.kind == "paren" for u in body[: body.index(keys[0])]):
            self.open_class(body, body.index(keys[0]), is_template, brace.line)
            return i + 1, []
        j = self.skip_braces(i)
        # a brace initializer continues its declaration (`;`, `,`, `.`...);
        # an identifier after the block means it was a macro-style body
        if j < len(self.tokens) and self.tokens[j].kind == "ident":
            return j, []
        return j, decl

    # -- namespaces, classes, enums -------------------------------------

    def open_namespace(self, body: list[_Unit], line: int) -> None:
        names = [u.text for u in body if u.kind == "id" and u.text not in ("namespace", "inline")]
        components = tuple(names) if names else (ANONYMOUS_NAMESPACE,)
        base = self.scope.components
        self.check_depth(1, line)
        full = base + components
        for n in range(1, len(components) + 1):
            self.namespaces.add(base + components[:n])
        self.scopes.append(_Scope("namespace", full, line))

    def open_class(self, body: list[_Unit], key_index: int, is_template: bool, line: int) -> None:
        name: list[str] = []
        for u in body[key_index + 1:]:
            if u.kind == "punct" and u.text == ":":
                break
            if u.kind == "id" and u.text in ("final", "alignas"):
                break
            if u.kind == "id":
                if name and name[-1] != "::":
                    name = []
                name.append(u.text)
            elif u.kind == "scope":
                name.append("::")
            elif u.kind == "angle":
                is_template = True
        components = tuple(c for c in name if c != "::")
        self.check_depth(1, line)
        if components:
            full = self.resolve_scope_prefix(components[:-1]) + components[-1:]
            self.types.add(full)
        else:
            full = self.scope.components
        self.scopes.append(_Scope("class", full, line, is_template=is_template))

    def register_enum(self, body: list[_Unit]) -> None:
        seen_enum = False
        for u in body:
            if u.kind == "id" and u.text == "enum":
                seen_enum = True
                continue
            if seen_enum and u.kind == "id" and u.text not in ("class", "struct"):
                self.types.add(self.scope.components + (u.text,))
                return
            if seen_enum and u.kind == "punct" and u.text == ":":
                return

    def simple_declaration(self, decl: list[Token]) -> None:
        if not decl:
            return
        units = _units(decl)
        k = 0
        while k + 1 < len(units) and units[k].text == "template" and units[k + 1].kind == "angle":
            k += 2
        body = units[k:]
        if not body:
            return
        head = body[0].text
        if head in _CLASS_KEYS or head == "enum":
            # forward declarations: ``class Node;``, ``enum class Mode : int;``
            if any(u.kind in ("paren", "brace", "bracket") or u.text in ("=", "*", "&") for u in body):
                return
            ids = [u.text for u in body if u.kind == "id" and u.text not in _CLASS_KEYS and u.text != "enum"]
            if head == "enum" and ids:
                self.types.add(self.scope.components + (ids[0],))
            elif len(ids) == 1 and all(u.kind == "id" for u in body):
                self.types.add(self.scope.components + (ids[0],))
            return
        if head == "using" and len(body) > 1:
            if body[1].text == "namespace":
                comps = tuple(u.text for u in body[2:] if u.kind == "id")
                if comps:
                    self.scope.using.append(self.resolve_namespace(comps))
                return
            if len(body) > 2 and body[1].kind == "id" and body[2].text == "=":
                alias = self.scope.components + (body[1].text,)
                target = decl[body[3].start:] if len(body) > 3 else []
                self.aliases[alias] = self.alias_target(target)
            return
        if head == "typedef":
            rest = decl[body[0].end:]
            try:
                type_expr, name = _parse_type(rest)
            except _Unsupported:
                name = _typedef_name(rest)
                if name:
                    self.aliases[self.scope.components + (name,)] = None
                return
            if name:
                self.aliases[self.scope.components + (name,)] = self.resolve_type(type_expr)

    def alias_target(self, tokens: list[Token]) -> TypeExpr | None:
        try:
            type_expr, name = _parse_type(tokens)
        except _Unsupported:
            return None
        if name:
            return None
        try:
            return self.resolve_type(type_expr)
        except _Unsupported:
            return None

    # -- name lookup -----------------------------------------------------

    def lookup_chain(self) -> list[_Scope]:
        return list(reversed(self.scopes))

    def resolve_namespace(self, comps: tuple[str, ...]) -> tuple[str, ...]:
        for s in self.lookup_chain():
            cand = s.components + comps
            if cand in self.namespaces:
                return cand
        return comps

    def resolve_scope_prefix(self, comps: tuple[str, ...], extra: tuple[str, ...] = ()) -> tuple[str, ...]:
        """Absolute form of an explicit qualifier such as ``ns::Widget``."""
        if not comps:
            return self.scope.components
        if comps[0] == "":
            return comps[1:]
        known = self.namespaces | self.types
        for base in self._bases(extra):
            if base + comps in known or base + comps[:1] in known:
                return base + comps
        # declared elsewhere (a header): qualifiers are relative to the lexical scope
        return self.scope.components + comps

    def _bases(self, extra: tuple[str, ...] = ()) -> list[tuple[str, ...]]:
        bases: list[tuple[str, ...]] = []
        chain: list[tuple[str, ...]] = []
        if extra:
            chain.extend(extra[:n] for n in range(len(extra), 0, -1))
        chain.extend(s.components for s in self.lookup_chain())
        seen = set()
        for comps in chain:
            if comps not in seen:
                seen.add(comps)
                bases.append(comps)
            for s in self.scopes:
                if s.components == comps:
                    for used in s.using:
                        if used not in seen:
                            seen.add(used)
                            bases.append(used)
        if () not in seen:
            bases.append(())
        return bases

    def resolve_named(self, comps: tuple[str, ...], extra: tuple[str, ...] = ()) -> TypeExpr:
        if comps and comps[0] == "":
            comps = comps[1:]
            bases = [()]
        else:
            bases = self._bases(extra)
        for base in bases:
            cand = base + comps
            if cand in self.aliases:
                target = self.aliases[cand]
                if target is None:
                    raise _Unsupported(f"unresolvable alias {'::'.join(comps)}")
                return target
            if cand in self.types:
                return Named(cand)
            if len(comps) > 1 and (base + comps[:1] in self.types or base + comps[:1] in self.namespaces):
                return Named(cand)
        bare = comps[1:] if comps[0] == "std" and len(comps) == 2 else comps
        if len(bare) == 1 and bare[0] in _WELL_KNOWN_TYPEDEFS:
            return Builtin(_WELL_KNOWN_TYPEDEFS[bare[0]])
        if comps[0] == "std":
            raise _Unsupported(f"standard library type {'::'.join(comps)}")
        if len(comps) == 1:
            return Named(self.innermost_namespace() + comps)
        return Named(comps)

    def resolve_type(self, t: TypeExpr, extra: tuple[str, ...] = ()) -> TypeExpr:
        if isinstance(t, Builtin):
            return t
        if isinstance(t, Named):
            return self.resolve_named(t.components, extra)
        inner = self.resolve_type(t.target, extra)
        if isinstance(t, Const) and isinstance(inner, Const):
            return inner
        if isinstance(t, (Pointer, LValueRef, RValueRef)) and isinstance(inner, (LValueRef, RValueRef)):
            if isinstance(t, Pointer):
                raise _Unsupported("pointer to reference")
            # reference collapsing through an alias
            return LValueRef(inner.target) if isinstance(t, LValueRef) or isinstance(inner, LValueRef) else inner
        return type(t)(inner)

    # -- functions -------------------------------------------------------

    def function_header(self, decl: list[Token], units: list[_Unit], first: int) -> _Header | None:
        for p in range(first, len(units)):
            u = units[p]
            if u.kind != "paren" or p == first:
                continue
            name_start = _declarator_start(units, p, first)
            if name_start is None:
                continue
            prefix = units[first:name_start]
            if any(x.kind == "punct" and x.text in ("=", ":", ",", "<", ">", ";") for x in prefix):
                continue
            tail = _check_tail(units, p + 1)
            if tail is None:
                continue
            if not self.prefix_acceptable(prefix, units[name_start:p]):
                continue
            init_pending, trailing, const_m, refq, vol = tail
            return _Header(name_start, p, u, init_pending, trailing, const_m, refq, vol)
        return None

    def prefix_acceptable(self, prefix: list[_Unit], name_units: list[_Unit]) -> bool:
        """Whether a declarator may be preceded by ``prefix``.

        A definition needs a return type unless it is a constructor,
        destructor or conversion operator; this is what keeps macro
        invocations like ``TEST(Suite, Name) {`` from opening a span.
        """
        if any(
            (x.kind == "id" and x.text not in _SKIPPABLE_SPECIFIERS and x.text not in ("const", "volatile"))
            or x.kind in ("scope", "angle", "paren")
            or (x.kind == "punct" and x.text in ("*", "&", "&&"))
            for x in prefix
        ):
            return True
        terminal = name_units[-1]
        if terminal.kind == "op":
            return terminal.text.startswith("operator ") and not terminal.text.startswith(("operator new", "operator delete"))
        if len(name_units) >= 2 and name_units[-2].kind == "tilde":
            return True
        ids = [x.text for x in name_units if x.kind == "id"]
        if len(ids) >= 2 and ids[-1] == ids[-2]:
            return True
        cls = self.innermost_class()
        if cls is not None and cls.components and len(ids) == 1 and ids[0] == cls.components[-1]:
            return True
        return False

    def record_function(self, decl: list[Token], units: list[_Unit], h: _Header, is_template: bool, end_line: int) -> None:
        name_units = units[h.name_start:h.name_end]
        prefix_units = units[:h.name_start]
        is_friend = any(u.kind == "id" and u.text == "friend" for u in prefix_units)

        qualifier: list[str] = []
        absolute = False
        terminal = ""
        is_dtor = False
        for idx, u in enumerate(name_units):
            if u.kind == "scope":
                if idx == 0:
                    absolute = True
                continue
            if u.kind == "angle":
                is_template = True
                continue
            if u.kind == "tilde":
                is_dtor = True
                continue
            if u.kind in ("id", "op"):
                if terminal:
                    qualifier.append(terminal)
                terminal = ("~" + u.text) if is_dtor else u.text
        name_token = decl[name_units[-1].start]
        for u in reversed(name_units):
            if u.kind in ("id", "op"):
                name_token = decl[u.start]
                break
        start_line = name_token.line

        cls = self.innermost_class()
        if absolute:
            scope = tuple(qualifier)
        elif qualifier:
            base = self.innermost_namespace() if is_friend else None
            scope = self.resolve_scope_prefix(tuple(qualifier)) if base is None else base + tuple(qualifier)
        elif is_friend:
            scope = self.innermost_namespace()
        else:
            scope = self.scope.components
        qualified = scope + (terminal,)

        if qualifier:
            is_member = tuple(scope) in self.types or tuple(scope) not in self.namespaces
        else:
            is_member = cls is not None and not is_friend
        is_member = is_member or h.const_member

        is_template = is_template or self.in_template()
        extern_c = self.extern_c() or (
            len(prefix_units) >= 2 and prefix_units[0].text == "extern" and prefix_units[1].text == '"C"'
        )

        unsupported = None
        params: tuple[TypeExpr, ...] | None = None
        class_name = scope[-1] if scope else None
        if is_dtor:
            unsupported = "destructor"
        elif class_name is not None and terminal == class_name and is_member:
            unsupported = "constructor"
        elif h.trailing_return:
            unsupported = "trailing return type"
        elif h.ref_qualified:
            unsupported = "ref-qualified member function"
        elif h.volatile_member:
            unsupported = "volatile member function"
        if unsupported is None or unsupported in ("constructor", "destructor"):
            try:
                params = self.parse_params(decl, h.params, scope)
            except _Unsupported as exc:
                unsupported = unsupported or str(exc)
                params = None
        if unsupported is not None:
            params = None

        sig = FunctionSignature(
            qualified_name=qualified,
            parameters=params,
            is_const_member=h.const_member,
            is_extern_c=extern_c,
            is_member=is_member,
            unsupported=unsupported,
        )
        self.results.append(FunctionSpan(sig, LineRange(start_line, end_line), self.path, is_template))

    def parse_params(self, decl: list[Token], paren: _Unit, member_scope: tuple[str, ...]) -> tuple[TypeExpr, ...]:
        inner = decl[paren.start + 1:paren.end - 1]
        pieces = _split_params(inner)
        if len(pieces) == 1 and len(pieces[0]) == 1 and pieces[0][0].text == "void":
            return ()
        if len(pieces) == 1 and not pieces[0]:
            return ()
        params = []
        for piece in pieces:
            if not piece:
                raise _Unsupported("empty parameter")
            type_expr, _ = _parse_type(piece)
            params.append(self.resolve_type(_strip_top_const(type_expr), member_scope))
        return tuple(params)


def _typedef_name(tokens: list[Token]) -> str | None:
    for a, b, c in zip(tokens, tokens[1:], tokens[2:]):
        if a.text == "(" and b.text == "*" and c.kind == "ident":
            return c.text
    names = [t.text for t in tokens if t.kind == "ident" and t.text not in BUILTIN_KEYWORDS
             and t.text not in ("const", "volatile", "struct", "class", "enum", "union", "typename")]
    return names[-1] if names else None


def _strip_top_const(t: TypeExpr) -> TypeExpr:
    return t.target if isinstance(t, Const) else t


def _declarator_start(units: list[_Unit], p: int, first: int) -> int | None:
    """Unit index where the declarator-id ending before paren unit ``p`` starts."""
    j = p - 1
    if units[j].kind == "angle":
        j -= 1
        if j < first:
            return None
    u = units[j]
    if u.kind == "op":
        pass
    elif u.kind == "id" and u.text not in _NOT_CALLABLE and u.text not in _TAIL_WORDS and u.text not in _SKIPPABLE_SPECIFIERS:
        if j - 1 >= first and units[j - 1].kind == "tilde":
            j -= 1
    else:
        return None
    # qualifiers: (id [angle] ::)*
    while j - 1 >= first and units[j - 1].kind == "scope":
        k = j - 2
        if k >= first and units[k].kind == "angle":
            k -= 1
        if k >= first and units[k].kind == "id" and units[k].text not in _NOT_CALLABLE:
            j = k
        else:
            j -= 1  # leading '::'
            break
    return j


def _check_tail(units: list[_Unit], k: int):
    """Validate what follows the parameter list of a function header.

    Returns ``(init_pending, trailing_return, const, ref_qualified, volatile)``
    or None when the tail cannot follow a function declarator.
    """
    const_m = refq = vol = False
    n = len(units)
    while k < n:
        u = units[k]
        if u.kind == "id" and u.text in _TAIL_WORDS:
            if u.text == "const":
                const_m = True
            elif u.text == "volatile":
                vol = True
            if u.text in ("noexcept", "throw", "__attribute__") and k + 1 < n and units[k + 1].kind == "paren":
                k += 1
            k += 1
            continue
        if u.kind == "bracket":
            k += 1
            continue
        if u.kind == "punct" and u.text in ("&", "&&"):
            refq = True
            k += 1
            continue
        if u.kind == "punct" and u.text == "->":
            rest = units[k + 1:]
            if not rest or any(x.kind == "punct" and x.text in (":", "=", ";") for x in rest):
                return None
            return False, True, const_m, refq, vol
        if u.kind == "id" and u.text == "requires":
            return False, False, const_m, refq, vol
        if u.kind == "punct" and u.text == ":":
            pending = _check_init_list(units, k + 1)
            if pending is None:
                return None
            return pending, False, const_m, refq, vol
        return None
    return False, False, const_m, refq, vol


def _check_init_list(units: list[_Unit], k: int) -> bool | None:
    """True if an initializer's brace is still to come, False if complete."""
    n = len(units)
    if k >= n:
        return None
    while True:
        # member or base name: [::] id [angle] (:: id [angle])*
        saw_name = False
        while k < n and units[k].kind in ("id", "scope", "angle"):
            saw_name = True
            k += 1
        if not saw_name:
            return None
        if k >= n:
            return True
        if units[k].kind not in ("paren", "brace"):
            return None
        k += 1
        if k < n and units[k].kind == "punct" and units[k].text == "...":
            k += 1
        if k >= n:
            return False
        if units[k].kind == "punct" and units[k].text == ",":
            k += 1
            continue
        return None


def _split_params(tokens: list[Token]) -> list[list[Token]]:
    pieces: list[list[Token]] = [[]]
    depth = 0
    angle = 0
    after_default = False
    prev: Token | None = None
    for t in tokens:
        text = t.text
        if text in ("(", "[", "{"):
            depth += 1
        elif text in (")", "]", "}"):
            depth -= 1
        elif text == "<" and not after_default and prev is not None and prev.kind == "ident":
            angle += 1
        elif text == ">" and angle > 0:
            angle -= 1
        elif text == ">>" and angle > 0:
            angle = max(0, angle - 2)
        elif text == "=" and depth == 0 and angle == 0:
            after_default = True
        elif text == "," and depth == 0 and angle == 0:
            pieces.append([])
            after_default = False
            prev = None
            continue
        pieces[-1].append(t)
        prev = t
    return pieces


class _Unsupported(Exception):
    pass


def _parse_type(tokens: Sequence[Token]) -> tuple[TypeExpr, str | None]:
    """Parse one parameter (or typedef) declaration into a type and its name."""
    toks = list(tokens)
    # drop a default argument
    depth = 0
    for idx, t in enumerate(toks):
        if t.text in ("(", "[", "{", "<"):
            depth += 1
        elif t.text in (")", "]", "}", ">"):
            depth -= 1
        elif t.text == "=" and depth == 0:
            toks = toks[:idx]
            break
    # attributes
    cleaned: list[Token] = []
    i = 0
    while i < len(toks):
        if toks[i].text == "[" and i + 1 < len(toks) and toks[i + 1].text == "[":
            j = _match(toks, i, "[", "]")
            if j < 0:
                raise _Unsupported("unterminated attribute")
            i = j
            continue
        cleaned.append(toks[i])
        i += 1
    toks = cleaned
    if not toks:
        raise _Unsupported("empty parameter")
    if any(t.text == "..." for t in toks):
        raise _Unsupported("variadic parameter")

    base_const = False
    builtins: list[str] = []
    named: list[str] | None = None
    i = 0
    n = len(toks)
    while i < n:
        t = toks[i]
        text = t.text
        if text == "const":
            base_const = True
            i += 1
            continue
        if text == "volatile":
            raise _Unsupported("volatile qualifier")
        if text in ("struct", "class", "enum", "union", "typename", "register"):
            i += 1
            continue
        if t.kind == "ident" and text in BUILTIN_KEYWORDS and named is None:
            builtins.append(text)
            i += 1
            continue
        if (t.kind == "ident" or text == "::") and not builtins and named is None:
            comps: list[str] = []
            if text == "::":
                comps.append("")
                i += 1
            while i < n and toks[i].kind == "ident":
                comps.append(toks[i].text)
                i += 1
                if i < n and toks[i].text == "<":
                    raise _Unsupported("template arguments in parameter type")
                if i + 1 < n and toks[i].text == "::" and toks[i + 1].kind == "ident":
                    i += 1
                    continue
                break
            if not comps or comps == [""]:
                raise _Unsupported("unrecognized parameter type")
            if comps[-1] in ("auto", "decltype", "__typeof__", "typeof"):
                raise _Unsupported(f"{comps[-1]} parameter type")
            named = comps
            continue
        break

    if builtins:
        key = tuple(sorted(builtins))
        canonical = _BUILTIN_FORMS.get(key)
        if canonical is None:
            raise _Unsupported(f"invalid builtin combination {' '.join(builtins)}")
        base: TypeExpr = Builtin(canonical)
    elif named is not None:
        base = Named(tuple(named))
    else:
        raise _Unsupported("unrecognized parameter type")
    if base_const:
        base = Const(base)

    result = base
    name: str | None = None
    while i < n:
        t = toks[i]
        text = t.text
        if text == "*":
            if isinstance(result, (LValueRef, RValueRef)):
                raise _Unsupported("pointer to reference")
            result = Pointer(result)
        elif text == "&" or text == "&&":
            if isinstance(result, (LValueRef, RValueRef)):
                raise _Unsupported("reference to reference")
            result = LValueRef(result) if text == "&" else RValueRef(result)
        elif text == "const":
            if isinstance(result, (LValueRef, RValueRef)):
                pass  # const on a reference is ignored
            elif not isinstance(result, Const):
                result = Const(result)
        elif text == "volatile":
            raise _Unsupported("volatile qualifier")
        elif text == "__restrict" or text == "__restrict__" or text == "restrict":
            raise _Unsupported("restrict qualifier")
        else:
            break
        i += 1
    if i < n and toks[i].kind == "ident" and toks[i].text not in BUILTIN_KEYWORDS:
        name = toks[i].text
        i += 1
    if i < n:
        text = toks[i].text
        if text == "[":
            raise _Unsupported("array parameter")
        if text == "(":
            raise _Unsupported("function pointer parameter")
        raise _Unsupported(f"unrecognized declarator near {text!r}")
    return result, name


def scan_file(text: str, path: str = "", max_depth: int = MAX_DEPTH) -> list[FunctionSpan]:
    """Return every function definition in ``text`` in source order.

    Raises :class:`ScanError` for unbalanced braces, nesting deeper than
    ``max_depth``, or unterminated comments and raw strings.
    """
    try:
        return _Scanner(text, path, max_depth).run()
    except ScanError as exc:
        if exc.path is None and path:
            raise ScanError(exc.message, exc.line, path) from None
        raise

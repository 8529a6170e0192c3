"""Itanium C++ ABI name mangling for scanned signatures, and name-only matching.

Only the subset produced by :mod:`sicov.cppscan` is encoded: builtin types,
named (class/enum) types, pointers, references and ``const``, on free
functions, namespaced functions, member functions and a fixed list of
operators.  Substitutions cover nested-name prefixes, named types and the
composite types built from them, which is all this subset can produce.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .cppscan import (
    ANONYMOUS_NAMESPACE,
    Builtin,
    Const,
    FunctionSignature,
    FunctionSpan,
    LValueRef,
    Named,
    Pointer,
    RValueRef,
    TypeExpr,
)

__all__ = [
    "MangledName",
    "Mangleability",
    "UnmangleableError",
    "mangle",
    "mangle_span",
    "is_mangleable",
    "match_targets_by_name",
    "BUILTIN_CODES",
    "OPERATOR_CODES",
]

BUILTIN_CODES = {
    "void": "v",
    "bool": "b",
    "char": "c",
    "signed char": "a",
    "unsigned char": "h",
    "wchar_t": "w",
    "short": "s",
    "unsigned short": "t",
    "int": "i",
    "unsigned int": "j",
    "long": "l",
    "unsigned long": "m",
    "long long": "x",
    "unsigned long long": "y",
    "float": "f",
    "double": "d",
    "long double": "e",
}

# binary forms; unary + - * & are chosen by arity in _operator_code
OPERATOR_CODES = {
    "operator+": "pl",
    "operator-": "mi",
    "operator*": "ml",
    "operator/": "dv",
    "operator%": "rm",
    "operator&": "an",
    "operator|": "or",
    "operator^": "eo",
    "operator=": "aS",
    "operator+=": "pL",
    "operator-=": "mI",
    "operator*=": "mL",
    "operator/=": "dV",
    "operator%=": "rM",
    "operator&=": "aN",
    "operator|=": "oR",
    "operator^=": "eO",
    "operator<<": "ls",
    "operator>>": "rs",
    "operator<<=": "lS",
    "operator>>=": "rS",
    "operator==": "eq",
    "operator!=": "ne",
    "operator<": "lt",
    "operator>": "gt",
    "operator<=": "le",
    "operator>=": "ge",
    "operator!": "nt",
    "operator~": "co",
    "operator&&": "aa",
    "operator||": "oo",
    "operator()": "cl",
    "operator[]": "ix",
}
_UNARY_CODES = {"operator+": "ps", "operator-": "ng", "operator*": "de", "operator&": "ad"}


class UnmangleableError(ValueError):
    pass


@dataclass(frozen=True)
class MangledName:
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("mangled name must be non-empty")
        if "*" in self.text:
            raise ValueError(f"mangled name may not contain '*': {self.text!r}")
        if any(c.isspace() for c in self.text):
            raise ValueError(f"mangled name may not contain whitespace: {self.text!r}")

    def __str__(self):
        return self.text


@dataclass(frozen=True)
class Mangleability:
    ok: bool
    reason: str | None = None

    def __bool__(self):
        return self.ok


def is_mangleable(sig: FunctionSignature | FunctionSpan) -> Mangleability:
    if isinstance(sig, FunctionSpan):
        if sig.is_template:
            return Mangleability(False, "template")
        sig = sig.signature
    if sig.unsupported is not None:
        return Mangleability(False, sig.unsupported)
    if sig.parameters is None:
        return Mangleability(False, "unparsed signature")
    if _plain_name(sig):
        return Mangleability(True)
    if sig.qualified_name[0] == "std":
        return Mangleability(False, "function in namespace std")
    for c in sig.scope:
        if c != ANONYMOUS_NAMESPACE and not _is_identifier(c):
            return Mangleability(False, f"scope component {c!r}")
    name = sig.name
    if name.startswith("~"):
        return Mangleability(False, "destructor")
    if name.startswith("operator"):
        if name not in OPERATOR_CODES:
            return Mangleability(False, f"unsupported operator {name!r}")
    elif not _is_identifier(name):
        return Mangleability(False, f"unsupported name {name!r}")
    if sig.is_const_member and not sig.scope:
        return Mangleability(False, "const qualifier on a non-member")
    for p in sig.parameters:
        problem = _type_problem(p)
        if problem:
            return Mangleability(False, problem)
    if sig.name.startswith("operator") and _operator_code(sig) is None:
        return Mangleability(False, f"operator {sig.name!r} with unexpected arity")
    return Mangleability(True)


def _is_identifier(name: str) -> bool:
    return bool(name) and (name[0].isalpha() or name[0] == "_") and all(c.isalnum() or c in "_$" for c in name)


def _plain_name(sig: FunctionSignature) -> bool:
    return sig.is_extern_c or sig.qualified_name == ("main",)


def _type_problem(t: TypeExpr) -> str | None:
    if isinstance(t, Builtin):
        return None if t.kind in BUILTIN_CODES else f"builtin {t.kind!r}"
    if isinstance(t, Named):
        if not t.components or any(not c for c in t.components):
            return "empty type name"
        if t.components[0] == "std":
            return "standard library type"
        for c in t.components:
            if c != ANONYMOUS_NAMESPACE and not _is_identifier(c):
                return f"type name component {c!r}"
        return None
    if isinstance(t, Const):
        if isinstance(t.target, Const):
            return "duplicate const"
        if isinstance(t.target, (LValueRef, RValueRef)):
            return "const reference node"
        return _type_problem(t.target)
    if isinstance(t, Pointer):
        if isinstance(t.target, (LValueRef, RValueRef)):
            return "pointer to reference"
        return _type_problem(t.target)
    if isinstance(t, (LValueRef, RValueRef)):
        if isinstance(t.target, (LValueRef, RValueRef)):
            return "reference to reference"
        return _type_problem(t.target)
    return f"type node {type(t).__name__}"


def _operator_code(sig: FunctionSignature) -> str | None:
    name = sig.name
    arity = len(sig.parameters or ()) + (1 if sig.is_member else 0)
    if name in _UNARY_CODES and arity == 1:
        return _UNARY_CODES[name]
    if name in ("operator!", "operator~"):
        return OPERATOR_CODES[name] if arity == 1 else None
    if name == "operator()":
        return "cl"
    if arity != 2:
        return None
    return OPERATOR_CODES.get(name)


def _source_name(name: str) -> str:
    if name == ANONYMOUS_NAMESPACE:
        name = "_GLOBAL__N_1"
    return f"{len(name)}{name}"


def _seq_id(index: int) -> str:
    if index == 0:
        return "S_"
    n = index - 1
    digits = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    out = ""
    while True:
        out = digits[n % 36] + out
        n //= 36
        if n == 0:
            break
    return f"S{out}_"


class _Encoder:
    def __init__(self):
        self.table: dict[object, int] = {}

    def candidate(self, key: object) -> None:
        if key not in self.table:
            self.table[key] = len(self.table)

    def lookup(self, key: object) -> str | None:
        idx = self.table.get(key)
        return None if idx is None else _seq_id(idx)

    def prefix(self, components: tuple[str, ...]) -> str:
        """Encode a scope chain, registering each prefix as a candidate."""
        best = 0
        for n in range(len(components), 0, -1):
            if ("name", components[:n]) in self.table:
                best = n
                break
        out = self.lookup(("name", components[:best])) if best else ""
        for n in range(best + 1, len(components) + 1):
            out += _source_name(components[n - 1])
            self.candidate(("name", components[:n]))
        return out

    def type(self, t: TypeExpr) -> str:
        if isinstance(t, Builtin):
            return BUILTIN_CODES[t.kind]
        if isinstance(t, Named):
            key = ("name", t.components)
            sub = self.lookup(key)
            if sub:
                return sub
            if len(t.components) == 1:
                out = _source_name(t.components[0])
                self.candidate(key)
                return out
            return "N" + self.prefix(t.components) + "E"
        sub = self.lookup(t)
        if sub:
            return sub
        if isinstance(t, Const):
            out = "K" + self.type(t.target)
        elif isinstance(t, Pointer):
            out = "P" + self.type(t.target)
        elif isinstance(t, LValueRef):
            out = "R" + self.type(t.target)
        elif isinstance(t, RValueRef):
            out = "O" + self.type(t.target)
        else:  # pragma: no cover - guarded by is_mangleable
            raise UnmangleableError(f"type node {type(t).__name__}")
        self.candidate(t)
        return out


def mangle(sig: FunctionSignature) -> MangledName:
    """Itanium ABI symbol for ``sig``; ``main`` and ``extern "C"`` stay plain."""
    verdict = is_mangleable(sig)
    if not verdict:
        raise UnmangleableError(verdict.reason)
    if _plain_name(sig):
        return MangledName(sig.name)

    enc = _Encoder()
    name = sig.name
    unqualified = _operator_code(sig) if name.startswith("operator") else _source_name(name)
    if sig.scope:
        out = "N" + ("K" if sig.is_const_member else "") + enc.prefix(sig.scope) + unqualified + "E"
    else:
        out = unqualified
    params = sig.parameters or ()
    if not params:
        out += "v"
    for p in params:
        out += enc.type(_drop_top_const(p))
    return MangledName("_Z" + out)


def _drop_top_const(t: TypeExpr) -> TypeExpr:
    return t.target if isinstance(t, Const) else t


def mangle_span(span: FunctionSpan) -> MangledName:
    if span.is_template:
        raise UnmangleableError("template")
    return mangle(span.signature)


def match_targets_by_name(
    target_names: Iterable[str], signatures: Iterable[FunctionSignature]
) -> list[FunctionSignature]:
    """Every signature whose terminal name is a target, overloads included."""
    names = set(target_names)
    return [s for s in signatures if s.name in names]

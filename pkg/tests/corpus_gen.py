"""Random C++ translation units with known function spans.

Each generated file comes with the ground truth the scanner must report:
``(qualified name, first line, last line)`` for every function definition,
where the first line holds the function's name token and the last line its
closing brace.  The grammar mixes in the constructs that trip naive brace
counters: braces inside comments, strings, raw strings and character
literals, macros that expand to braces, lambdas and nested blocks inside
bodies, class and enum bodies, prototypes without bodies, both branches of ``#if``
blocks, and signatures split across lines.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

TYPES = [
    "int", "unsigned", "long", "unsigned long", "double", "float", "char", "bool",
    "const char*", "int*", "const int&", "float&", "long long", "short",
]
WORDS = [
    "alpha", "beta", "gamma", "delta", "load", "store", "tick", "draw", "mix", "fold",
    "scan", "merge", "split", "probe", "flush", "emit", "poll", "seek", "bind", "grow",
]


@dataclass
class Unit:
    lines: list[str] = field(default_factory=list)
    truth: list[tuple[str, int, int]] = field(default_factory=list)

    @property
    def next_line(self) -> int:
        return len(self.lines) + 1

    def add(self, *lines: str) -> None:
        self.lines.extend(lines)

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


class Generator:
    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.counter = 0

    def ident(self) -> str:
        self.counter += 1
        return f"{self.rng.choice(WORDS)}_{self.counter}"

    def params(self) -> str:
        n = self.rng.randrange(0, 4)
        return ", ".join(f"{self.rng.choice(TYPES)} p{i}" for i in range(n))

    # -- noise that contains braces but opens no scope -----------------------

    def noise(self, u: Unit, scope: tuple[str, ...], indent: str) -> None:
        kind = self.rng.randrange(7)
        if kind == 0:
            u.add(f"{indent}// stray {{ brace in a line comment")
        elif kind == 1:
            u.add(f"{indent}/* block {{ comment", f"{indent}   spanning }} lines {{ */")
        elif kind == 2:
            u.add("#define OPEN_BLOCK {", "#define CLOSE_BLOCK }")
        elif kind == 3:
            u.add(f"{indent}int {self.ident()}(int a, double b);")
        elif kind == 4:
            # every branch is scanned, so this definition counts
            name = self.ident()
            u.add("#if 0")
            u.truth.append(("::".join(scope + (name,)), u.next_line, u.next_line))
            u.add(f"{indent}void {name}() {{ /* disabled branch */ }}", "#else")
            self.function(u, scope, indent)
            u.add("#endif")
        elif kind == 5:
            u.add(f"{indent}static const char* {self.ident()} = \"{{ not a scope }}\";")
        else:
            u.add("")

    # -- function bodies ------------------------------------------------------

    def body(self, u: Unit, indent: str) -> None:
        inner = indent + "    "
        for _ in range(self.rng.randrange(0, 5)):
            kind = self.rng.randrange(8)
            if kind == 0:
                u.add(f"{inner}int x{self.counter} = 0;")
            elif kind == 1:
                u.add(f"{inner}if (sizeof(int) > 1) {{", f"{inner}    (void)0;", f"{inner}}}")
            elif kind == 2:
                u.add(f"{inner}auto f = [&](int v) {{ return v + 1; }};")
            elif kind == 3:
                u.add(f"{inner}const char* s = \"}} {{ \\\" }}\";")
            elif kind == 4:
                u.add(f"{inner}const char* r = R\"tag(raw }} {{ \")tag\";")
            elif kind == 5:
                u.add(f"{inner}char c = '{{';", f"{inner}char d = '}}';")
            elif kind == 6:
                u.add(f"{inner}for (int i = 0; i < 3; ++i) {{", f"{inner}    {{ int nested = i; (void)nested; }}", f"{inner}}}")
            else:
                u.add(f"{inner}// closing }} in a comment")

    def function(self, u: Unit, scope: tuple[str, ...], indent: str, name: str | None = None, qual: str = "", member: bool = False) -> None:
        name = name or self.ident()
        ret = self.rng.choice(["void", "int", "double", "bool", "const char*"])
        params = self.params()
        style = self.rng.randrange(4)
        const = " const" if member and self.rng.random() < 0.3 else ""
        full = "::".join(scope + (name,)) if not qual else "::".join(scope + tuple(qual.split("::")) + (name,))
        prefix = f"{qual}::" if qual else ""
        if style == 0:
            start = u.next_line
            u.add(f"{indent}{ret} {prefix}{name}({params}){const} {{")
        elif style == 1:
            u.add(f"{indent}{ret}")
            start = u.next_line
            u.add(f"{indent}{prefix}{name}({params}){const}", f"{indent}{{")
        elif style == 2:
            start = u.next_line
            u.add(f"{indent}{ret} {prefix}{name}(", f"{indent}    {params}){const}", f"{indent}{{")
        else:
            start = u.next_line
            end = start
            u.add(f"{indent}{ret} {prefix}{name}({params}){const} {{ }}")
            u.truth.append((full, start, end))
            return
        self.body(u, indent)
        end = u.next_line
        u.add(f"{indent}}}")
        u.truth.append((full, start, end))

    def klass(self, u: Unit, scope: tuple[str, ...], indent: str) -> list[str]:
        cname = "C" + self.ident()
        keyword = self.rng.choice(["class", "struct"])
        u.add(f"{indent}{keyword} {cname} {{")
        if keyword == "class":
            u.add(f"{indent}public:")
        inner = indent + "    "
        declared = []
        for _ in range(self.rng.randrange(1, 4)):
            r = self.rng.random()
            if r < 0.5:
                self.function(u, scope + (cname,), inner, member=True)
            elif r < 0.6:
                # constructor with a multi-line initializer list
                start = u.next_line
                u.add(f"{inner}explicit {cname}(int v)", f"{inner}    : field_{self.counter}(v),", f"{inner}      other_{self.counter}{{v}} {{")
                self.body(u, inner)
                end = u.next_line
                u.add(f"{inner}}}", f"{inner}int field_{self.counter}; int other_{self.counter};")
                u.truth.append(("::".join(scope + (cname, cname)), start, end))
            elif r < 0.67:
                start = u.next_line
                u.add(f"{inner}bool operator==(const {cname}& o) const {{ return this == &o; }}")
                u.truth.append(("::".join(scope + (cname, "operator==")), start, start))
            elif r < 0.8:
                m = self.ident()
                declared.append(m)
                u.add(f"{inner}void {m}(int v);")
            else:
                u.add(f"{inner}int field_{self.counter} = 0;")
        u.add(f"{indent}}};")
        out_of_class = []
        for m in declared:
            out_of_class.append((cname, m))
        for cname_, m in out_of_class:
            start = u.next_line
            u.add(f"{indent}void {cname_}::{m}(int v) {{")
            self.body(u, indent)
            end = u.next_line
            u.add(f"{indent}}}")
            u.truth.append(("::".join(scope + (cname_, m)), start, end))
        return declared

    def block(self, u: Unit, scope: tuple[str, ...], indent: str, depth: int) -> None:
        for _ in range(self.rng.randrange(1, 5)):
            r = self.rng.random()
            if r < 0.35:
                self.function(u, scope, indent)
            elif r < 0.5:
                self.klass(u, scope, indent)
            elif r < 0.6 and depth < 3:
                ns = "n" + self.ident()
                u.add(f"{indent}namespace {ns} {{")
                self.block(u, scope + (ns,), indent, depth + 1)
                u.add(f"{indent}}}  // namespace {ns}")
            elif r < 0.67:
                u.add(f"{indent}enum class E{self.counter} {{ A, B, C }};")
                self.counter += 1
            elif r < 0.69:
                name = self.ident()
                u.add(f"{indent}template <typename T, int N = 2>")
                start = u.next_line
                u.add(f"{indent}T {name}(T v, const T* w) {{", f"{indent}    return N > 1 ? v : *w;")
                end = u.next_line
                u.add(f"{indent}}}")
                u.truth.append(("::".join(scope + (name,)), start, end))
            elif r < 0.7:
                # a macro invocation with a braced tail is not a function
                u.add(f"{indent}REGISTER_{self.counter}(alpha, beta) {{", f"{indent}    int unused = 0;", f"{indent}}}")
            elif r < 0.72:
                # language linkage does not change the qualified name
                u.add(f'{indent}extern "C" {{')
                self.function(u, scope, indent)
                u.add(f"{indent}}}")
            else:
                self.noise(u, scope, indent)


def generate(seed: int) -> tuple[str, list[tuple[str, int, int]]]:
    """One translation unit and its sorted ground-truth spans."""
    gen = Generator(seed)
    u = Unit()
    u.add(f"// generated unit {seed}", "#include <cstddef>", "")
    gen.block(u, (), "", 0)
    while not u.truth:
        gen.function(u, (), "")
    return u.text, sorted(u.truth, key=lambda t: (t[1], t[2], t[0]))


def corpus(n: int = 500, base_seed: int = 0) -> list[tuple[str, str, list[tuple[str, int, int]]]]:
    return [(f"gen_{i:03d}.cpp", *generate(base_seed + i)) for i in range(n)]

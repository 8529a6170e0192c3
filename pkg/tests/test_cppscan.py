from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sicov.cppscan import (
    ANONYMOUS_NAMESPACE,
    Builtin,
    Const,
    LValueRef,
    Named,
    Pointer,
    RValueRef,
    ScanError,
    decode_source,
    scan_file,
    strip_noncode,
)
from sicov.diffmodel import LineRange

from conftest import FIXTURES, REPO
from corpus_gen import generate


def spans(text: str):
    return [("::".join(s.signature.qualified_name), s.span.start, s.span.end) for s in scan_file(text)]


def test_free_and_qualified_definitions():
    text = (
        "// header\n"
        "\n"
        "int add(int a, int b) {\n"
        "    return a + b;\n"
        "}\n"
        "\n"
        "namespace ns { void go(); }\n"
        "\n"
        "void ns::go() {\n"
        "    int x = 0;\n"
        "    (void)x;\n"
        "}\n"
    )
    found = scan_file(text)
    assert [(s.signature.display(), s.span) for s in found] == [
        ("add(int, int)", LineRange(3, 5)),
        ("ns::go()", LineRange(9, 12)),
    ]


def test_empty_and_declaration_only():
    assert scan_file("") == []
    assert scan_file("void f(int);\n") == []


def test_comment_brace_not_tokenized():
    toks = strip_noncode("int x = 0; // brace {\n").tokens
    assert "{" not in [t.text for t in toks]


def test_raw_string_keeps_following_lines():
    text = 'const char* s = R"x(\n}\n})x";\nint y;\n'
    toks = strip_noncode(text).tokens
    assert "}" not in [t.text for t in toks]
    y = next(t for t in toks if t.text == "y")
    assert y.line == 4


def test_define_with_brace_is_a_directive():
    src = strip_noncode("#define OPEN {\nint f() { return 1; }\n")
    assert [d.line for d in src.directives] == [1]
    assert [t.text for t in src.tokens].count("{") == 1
    assert spans("#define OPEN {\nint f() { return 1; }\n") == [("f", 2, 2)]


def test_unterminated_block_comment_and_raw_string():
    with pytest.raises(ScanError) as err:
        strip_noncode("int a;\n/* never\nclosed\n")
    assert err.value.line == 2
    with pytest.raises(ScanError) as err:
        strip_noncode('int a;\nauto s = R"d(\nno end\n')
    assert err.value.line == 2


def test_unbalanced_braces_name_last_open_line():
    with pytest.raises(ScanError) as err:
        scan_file("namespace a {\nvoid f() {\n}\n", "x.cpp")
    assert err.value.line == 1
    assert "x.cpp" in str(err.value)


def test_unmatched_close_brace():
    with pytest.raises(ScanError):
        scan_file("}\n")


def test_depth_limit():
    deep = "void f() " + "{" * 300 + "}" * 300 + "\n"
    with pytest.raises(ScanError):
        scan_file(deep)
    assert spans("void f() " + "{" * 20 + "}" * 20 + "\n") == [("f", 1, 1)]
    with pytest.raises(ScanError):
        scan_file("void f() " + "{" * 20 + "}" * 20 + "\n", max_depth=10)


def test_lambdas_and_local_classes_fold_into_function():
    text = (
        "int outer(int v) {\n"
        "    auto f = [](int x) { return x; };\n"
        "    struct Local { int g() { return 1; } };\n"
        "    return f(v) + Local{}.g();\n"
        "}\n"
    )
    assert spans(text) == [("outer", 1, 5)]


def test_members_in_class_and_out_of_class():
    text = (
        "namespace ns {\n"
        "class W {\n"
        "public:\n"
        "    int size() const { return n; }\n"
        "    void resize(unsigned long n, bool keep);\n"
        "    W& operator=(const W& o) { return *this; }\n"
        "    int n;\n"
        "};\n"
        "void W::resize(unsigned long n, bool keep) {\n"
        "}\n"
        "}\n"
    )
    found = {s.signature.display(): s for s in scan_file(text)}
    assert set(found) == {"ns::W::size() const", "ns::W::resize(unsigned long, bool)", "ns::W::operator=(ns::W const&)"}
    assert found["ns::W::size() const"].signature.is_const_member
    assert found["ns::W::resize(unsigned long, bool)"].span == LineRange(9, 10)


def test_templates_flagged():
    (s,) = scan_file("template <typename T>\nT twice(T v) {\n    return v + v;\n}\n")
    assert s.is_template
    assert s.span == LineRange(2, 4)


def test_unsupported_signature_keeps_span():
    (s,) = scan_file("auto f(int x) -> int {\n    return x;\n}\n")
    assert s.signature.unsupported is not None
    assert s.span == LineRange(1, 3)
    (s,) = scan_file("void apply(void (*cb)(int)) {\n}\n")
    assert s.signature.name == "apply"
    assert s.signature.unsupported is not None


def test_parameter_types():
    text = (
        "namespace ns { struct Widget; enum class Mode { A }; }\n"
        "void f(const char* s, int& r, ns::Widget&& w, const ns::Widget* const p, ns::Mode m, size_t n) {}\n"
    )
    (s,) = scan_file(text)
    assert s.signature.parameters == (
        Pointer(Const(Builtin("char"))),
        LValueRef(Builtin("int")),
        RValueRef(Named(("ns", "Widget"))),
        Pointer(Const(Named(("ns", "Widget")))),
        Named(("ns", "Mode")),
        Builtin("unsigned long"),
    )


def test_anonymous_namespace_and_extern_c():
    text = 'namespace {\nint hidden() { return 1; }\n}\nextern "C" {\nint exported(int v) { return v; }\n}\n'
    a, b = scan_file(text)
    assert a.signature.qualified_name == (ANONYMOUS_NAMESPACE, "hidden")
    assert b.signature.is_extern_c


def test_conditional_branches_all_scanned():
    text = "#if FAST\nint pick() { return 1; }\n#else\nint pick() { return 2; }\n#endif\n"
    assert spans(text) == [("pick", 2, 2), ("pick", 4, 4)]


def test_macro_invocation_never_opens_a_span():
    text = "TEST(Suite, Case) {\n    int x = 0;\n}\nint after() { return 0; }\n"
    assert spans(text) == [("after", 4, 4)]


def test_invalid_utf8_replaced_with_warning(caplog):
    with caplog.at_level("WARNING"):
        text = decode_source(b"int f() { return 0; } // \xff\n", "bad.cpp")
    assert "bad.cpp" in caplog.text
    assert spans(text) == [("f", 1, 1)]


def test_fixture_repository_scan():
    total = 0
    for path in sorted((REPO / "src").rglob("*.cpp")):
        text = path.read_text()
        lines = text.splitlines()
        for s in scan_file(text, str(path)):
            name = s.signature.name.lstrip("~")
            if name.startswith("operator"):
                name = "operator"
            assert name in lines[s.span.start - 1]
            assert "}" in lines[s.span.end - 1]
            total += 1
    assert total >= 40


def test_mangling_corpus_spans_start_at_symbol_lines():
    from conftest import load_corpus_symbols

    expected = load_corpus_symbols()
    found = {s.span.start for s in scan_file((FIXTURES / "mangling" / "corpus.cpp").read_text())}
    assert set(expected) <= found


# -- properties on generated units -----------------------------------------


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_generated_units_match_ground_truth(seed):
    text, truth = generate(seed)
    got = sorted(spans(text), key=lambda t: (t[1], t[2], t[0]))
    assert got == truth


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_scan_is_deterministic_and_spans_well_formed(seed):
    text, _ = generate(seed)
    first, second = scan_file(text), scan_file(text)
    assert first == second
    n = len(text.splitlines())
    for s in first:
        assert 1 <= s.span.start <= s.span.end <= n
    starts = [s.span.start for s in first]
    assert starts == sorted(starts)
    # top-level functions never overlap; members nest inside no other function either
    ordered = sorted(first, key=lambda s: s.span.start)
    for a, b in zip(ordered, ordered[1:]):
        assert a.span.end <= b.span.start

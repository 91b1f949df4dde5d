from __future__ import annotations

import random

import pytest

from clone_prompt_lab.corpus import (
    CodeSnippet,
    Language,
    UnterminatedBlockCommentError,
    UnterminatedStringLiteralError,
    strip_comments,
    strip_java_comments,
    strip_python_comments,
)


def test_python_no_comments_unchanged() -> None:
    assert strip_python_comments("x = 1") == "x = 1"


def test_python_line_comment_removed_line_retained() -> None:
    assert strip_python_comments("x = 1 # note") == "x = 1 "
    assert strip_python_comments("x = 1 # note\ny = 2") == "x = 1 \ny = 2"


def test_python_hash_inside_string_preserved() -> None:
    src = 's = "# not a comment"'
    assert strip_python_comments(src) == src


def test_python_docstrings_kept() -> None:
    src = 'def f():\n    """doc # with hash"""\n    return 1  # strip me\n'
    assert strip_python_comments(src) == 'def f():\n    """doc # with hash"""\n    return 1  \n'


def test_python_escaped_quote_in_string() -> None:
    src = "s = 'it\\'s fine'  # gone"
    assert strip_python_comments(src) == "s = 'it\\'s fine'  "


def test_python_unterminated_string_errors() -> None:
    with pytest.raises(UnterminatedStringLiteralError):
        strip_python_comments('s = "open ended')
    with pytest.raises(UnterminatedStringLiteralError):
        strip_python_comments('s = "crosses\nlines"')


def test_java_line_and_block_comments() -> None:
    src = "int x = 1; // trailing\nint y = 2; /* mid */ int z = 3;\n"
    assert strip_java_comments(src) == "int x = 1; \nint y = 2;  int z = 3;\n"


def test_java_block_comment_spanning_lines_removed_entirely() -> None:
    src = "a();/* one\ntwo */b();"
    assert strip_java_comments(src) == "a();b();"


def test_java_comment_markers_inside_literals_preserved() -> None:
    src = 'String s = "// not /* a comment */"; char c = \'/\';'
    assert strip_java_comments(src) == src


def test_java_unterminated_block_comment_names_offset() -> None:
    src = "int x = 1; /* open"
    with pytest.raises(UnterminatedBlockCommentError) as err:
        strip_java_comments(src)
    assert err.value.offset == src.index("/*")
    assert "byte offset" in str(err.value)


def test_java_unterminated_string_errors() -> None:
    with pytest.raises(UnterminatedStringLiteralError):
        strip_java_comments('String s = "open')


def test_strip_comments_sets_flag_and_dispatches() -> None:
    snip = CodeSnippet("x = 1 # c", Language.PYTHON)
    out = strip_comments(snip)
    assert out.text == "x = 1 "
    assert out.comments_stripped is True
    assert out.language is Language.PYTHON


def _random_python_program(rng: random.Random) -> str:
    """Programs mixing code, comments, and strings embedding comment markers."""
    string_pool = ['"# text"', "'// in str'", '"""tri # ple"""', "'/* block */'", '"a\\"b#c"']
    lines = []
    for i in range(rng.randint(1, 12)):
        choice = rng.random()
        if choice < 0.4:
            lines.append(f"v{i} = {rng.choice(string_pool)}")
        elif choice < 0.7:
            lines.append(f"v{i} = {rng.randint(0, 99)}  # comment {i}")
        else:
            lines.append(f"v{i} = v{max(0, i - 1)} if {i} else None")
    return "\n".join(lines) + "\n"


def _random_java_program(rng: random.Random) -> str:
    string_pool = ['"# text"', '"// in str"', '"/* block */"', "'#'", '"a\\"b//c"']
    lines = []
    for i in range(rng.randint(1, 12)):
        choice = rng.random()
        if choice < 0.35:
            lines.append(f"String v{i} = {rng.choice(string_pool)};")
        elif choice < 0.6:
            lines.append(f"int v{i} = {rng.randint(0, 99)}; // comment {i}")
        elif choice < 0.8:
            lines.append(f"int v{i} = {rng.randint(0, 99)}; /* b{i} */")
        else:
            lines.append(f"call{i}();")
    return "\n".join(lines) + "\n"


def test_strip_is_idempotent_over_random_programs() -> None:
    rng = random.Random(1234)
    for _ in range(200):
        py = _random_python_program(rng)
        once = strip_python_comments(py)
        assert strip_python_comments(once) == once
        jv = _random_java_program(rng)
        once = strip_java_comments(jv)
        assert strip_java_comments(once) == once


def test_strip_never_alters_string_literal_bytes() -> None:
    rng = random.Random(99)
    literals = ['"# text"', '"// in str"', '"/* block */"']
    for _ in range(100):
        chosen = rng.sample(literals, rng.randint(1, 3))
        py = "\n".join(f"x{i} = {lit}  # strip" for i, lit in enumerate(chosen))
        out = strip_python_comments(py)
        for lit in chosen:
            assert lit in out
        jv = "\n".join(f"String x{i} = {lit}; // strip" for i, lit in enumerate(chosen))
        out = strip_java_comments(jv)
        for lit in chosen:
            assert lit in out


def test_stripped_flag_is_an_idempotence_witness() -> None:
    for lang, text in [
        (Language.PYTHON, "a = 1 # x\nb = '# keep'\n"),
        (Language.JAVA, "int a = 1; // x\nString b = \"// keep\";\n"),
    ]:
        stripped = strip_comments(CodeSnippet(text, lang))
        again = strip_comments(stripped)
        assert again.text == stripped.text

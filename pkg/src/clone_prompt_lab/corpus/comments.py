"""Lexical comment stripping for Java and Python snippets.

Stripping is purely lexical: string and char literals pass through
byte-for-byte (Python docstrings are string literals and are kept), and
every non-comment byte appears in its original order. The newline that
terminates a line comment is not part of the comment and is preserved.
"""

from __future__ import annotations

from .types import CodeSnippet, Language


class CommentStripError(ValueError):
    """Base class for lexing failures, carrying the byte offset."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnterminatedBlockCommentError(CommentStripError):
    def __init__(self, offset: int) -> None:
        super().__init__("unterminated block comment", offset)


class UnterminatedStringLiteralError(CommentStripError):
    def __init__(self, offset: int) -> None:
        super().__init__("unterminated string literal", offset)


def strip_comments(snippet: CodeSnippet) -> CodeSnippet:
    """Return a copy of ``snippet`` with all lexical comments removed."""
    if snippet.language is Language.PYTHON:
        stripped = strip_python_comments(snippet.text)
    elif snippet.language is Language.JAVA:
        stripped = strip_java_comments(snippet.text)
    else:  # pragma: no cover - enum is closed today, guard for extension
        raise ValueError(f"no comment lexer for language {snippet.language!r}")
    return CodeSnippet(text=stripped, language=snippet.language, comments_stripped=True)


def strip_python_comments(text: str) -> str:
    """Remove ``#`` comments; keep every string literal (docstrings included)."""
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "#":
            nl = text.find("\n", i)
            i = n if nl == -1 else nl  # newline survives, comment bytes do not
        elif c in ("'", '"'):
            i = _copy_python_string(text, i, out)
        else:
            out.append(c)
            i += 1
    return "".join(out)


def strip_java_comments(text: str) -> str:
    """Remove ``//`` and ``/* ... */`` comments; keep string/char literals."""
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "/" and i + 1 < n and text[i + 1] == "/":
            nl = text.find("\n", i)
            i = n if nl == -1 else nl
        elif c == "/" and i + 1 < n and text[i + 1] == "*":
            end = text.find("*/", i + 2)
            if end == -1:
                raise UnterminatedBlockCommentError(i)
            i = end + 2
        elif c == '"':
            if text.startswith('"""', i):
                i = _copy_delimited(text, i, '"""', out, allow_newlines=True)
            else:
                i = _copy_delimited(text, i, '"', out, allow_newlines=False)
        elif c == "'":
            i = _copy_delimited(text, i, "'", out, allow_newlines=False)
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _copy_python_string(text: str, start: int, out: list[str]) -> int:
    quote = text[start]
    if text.startswith(quote * 3, start):
        return _copy_delimited(text, start, quote * 3, out, allow_newlines=True)
    return _copy_delimited(text, start, quote, out, allow_newlines=False)


def _copy_delimited(
    text: str, start: int, delim: str, out: list[str], *, allow_newlines: bool
) -> int:
    """Copy a literal opened at ``start`` verbatim; return the index past it.

    A backslash always shields the next character from closing the literal,
    which is lexically correct for both raw and cooked Python strings.
    """
    i = start + len(delim)
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\\" and i + 1 < n:
            i += 2
            continue
        if not allow_newlines and c == "\n":
            raise UnterminatedStringLiteralError(start)
        if text.startswith(delim, i):
            end = i + len(delim)
            out.append(text[start:end])
            return end
        i += 1
    raise UnterminatedStringLiteralError(start)

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from clone_prompt_lab.corpus import ClonePair, CodeSnippet, Label, Language, Origin

JAVA_SNIPPET = (
    "public class Adder {\n"
    "    // sums two ints\n"
    "    static int add(int a, int b) { return a + b; }\n"
    "}\n"
)

PYTHON_SNIPPET = (
    "def add(a, b):\n"
    "    # sums two ints\n"
    "    return a + b\n"
)


@pytest.fixture
def fixture_pair() -> ClonePair:
    return ClonePair(
        id="fix-0001",
        a=CodeSnippet(JAVA_SNIPPET, Language.JAVA),
        b=CodeSnippet(PYTHON_SNIPPET, Language.PYTHON),
        label=Label.CLONE,
        origin=Origin.AVATAR,
    )


def make_pair(
    i: int,
    label: Label,
    lang_a: Language = Language.JAVA,
    lang_b: Language = Language.PYTHON,
    origin: Origin = Origin.SYNTHETIC,
) -> ClonePair:
    """Small deterministic pair for fixtures; code varies with ``i``."""
    return ClonePair(
        id=f"p-{i:04d}",
        a=CodeSnippet(f"int f{i}(int x) {{ return x + {i}; }} // v{i}\n", lang_a),
        b=CodeSnippet(f"def f{i}(x):\n    # v{i}\n    return x + {i}\n", lang_b),
        label=label,
        origin=origin,
    )

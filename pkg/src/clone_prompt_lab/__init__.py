"""Clone Prompt Lab: prompt-driven code-clone detection workbench.

Evaluates prompt-driven language models on within- and cross-language
clone detection, mines confident mispredictions into bias categories,
and mitigates those biases by injecting corrective lessons into the
detection prompt. All runs are replayable from recorded fixtures.
"""

__version__ = "0.1.0"

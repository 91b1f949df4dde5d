"""Dataset ingestion, conversion, comment variants, and benchmark sampling."""

from .avatar import EmptyInputError, convert_avatar, find_idx_conflicts
from .comments import (
    CommentStripError,
    UnterminatedBlockCommentError,
    UnterminatedStringLiteralError,
    strip_comments,
    strip_java_comments,
    strip_python_comments,
)
from .io import (
    DatasetFormatError,
    pair_to_record,
    read_avatar_records,
    read_pairs,
    read_poolc_pairs,
    write_pairs,
)
from .sampling import (
    InsufficientClassCountError,
    build_benchmark,
    required_sample_size,
    z_score,
)
from .types import (
    ClonePair,
    CodeSnippet,
    Label,
    Language,
    Origin,
    SamplingSpec,
    TranslationRecord,
)

__all__ = [
    "ClonePair",
    "CodeSnippet",
    "CommentStripError",
    "DatasetFormatError",
    "EmptyInputError",
    "InsufficientClassCountError",
    "Label",
    "Language",
    "Origin",
    "SamplingSpec",
    "TranslationRecord",
    "build_benchmark",
    "convert_avatar",
    "find_idx_conflicts",
    "pair_to_record",
    "read_avatar_records",
    "read_pairs",
    "read_poolc_pairs",
    "required_sample_size",
    "strip_comments",
    "strip_java_comments",
    "strip_python_comments",
    "UnterminatedBlockCommentError",
    "UnterminatedStringLiteralError",
    "write_pairs",
    "z_score",
]

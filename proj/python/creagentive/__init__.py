"""Multi-agent long-form story engine: graph memory, scoring, evaluation, CLI."""

from ._core import (
    EngineError,
    Prototype,
    combine_scores,
    dim_names,
    dim_weights,
    evaluate_chapters,
    length_score,
    qls,
    quality_score,
    run_command,
    weight_for_chapter,
)

__all__ = [
    "EngineError",
    "Prototype",
    "combine_scores",
    "dim_names",
    "dim_weights",
    "evaluate_chapters",
    "length_score",
    "qls",
    "quality_score",
    "run_command",
    "weight_for_chapter",
]

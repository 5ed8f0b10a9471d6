"""Slide extraction, perturbation and judge evaluation toolkit.

Slide documents cross the boundary as plain dicts in the canonical
interchange schema; the heavy lifting happens in the native core.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

_FONTS = Path(__file__).with_name("fonts")
if _FONTS.is_dir():
    os.environ.setdefault("SLIDEEVAL_FONT_DIR", str(_FONTS))

from . import _slideeval as _core  # noqa: E402
from ._slideeval import (  # noqa: E402
    ConfigError,
    IngestError,
    InvalidPermutation,
    ValidationError,
    delta_e2000,
    delta_e2000_lab,
    derive_seed,
    fidelity,
    isotonic_fit,
    mace,
    normalize_score,
    parse_judge_reply,
    parse_ordering_reply,
    pava,
    poa_adjacent,
    rank_metrics,
)

__all__ = [
    "ConfigError",
    "IngestError",
    "InvalidPermutation",
    "ValidationError",
    "delta_e2000",
    "delta_e2000_lab",
    "derive_seed",
    "fidelity",
    "ingest",
    "isotonic_fit",
    "mace",
    "match",
    "normalize_score",
    "parse_judge_reply",
    "parse_ordering_reply",
    "pava",
    "perturb",
    "poa_adjacent",
    "rank_metrics",
    "render_png",
    "replay",
    "run_pipeline",
    "score_extraction",
    "validate",
]

Slide = dict


def _text(slide: Slide | str) -> str:
    return slide if isinstance(slide, str) else json.dumps(slide)


def _config(config: Optional[dict]) -> str:
    return json.dumps(config) if config else ""


def validate(slide: Slide | str, *, strict: bool = True, round_geometry: bool = False) -> Slide:
    """Return the canonical form of a slide document or raise ValidationError."""
    return json.loads(_core.validate_slide(_text(slide), strict, round_geometry))


def match(gt: Slide, pred: Slide, config: Optional[dict] = None) -> dict[str, Any]:
    """Per-family assignment with the threshold gate applied."""
    return json.loads(_core.match_slides(_text(gt), _text(pred), _config(config)))


def score_extraction(
    gts: Sequence[Slide],
    preds: Sequence[Optional[Slide]],
    config: Optional[dict] = None,
    n_resamples: int = 2000,
) -> dict[str, Any]:
    """End-to-end and parsed-only summaries. A None prediction is a failed run."""
    return json.loads(
        _core.score_extraction(
            [_text(g) for g in gts],
            [None if p is None else _text(p) for p in preds],
            _config(config),
            n_resamples,
        )
    )


def perturb(slide: Slide, axis: str, severity: float, config: Optional[dict] = None) -> tuple[Slide, dict]:
    """Perturbed slide and the record that replays it."""
    out, record = _core.perturb(_text(slide), axis, severity, _config(config))
    return json.loads(out), json.loads(record)


def replay(slide: Slide, record: dict) -> Slide:
    return json.loads(_core.replay(_text(slide), json.dumps(record)))


def render_png(slide: Slide, scale: float = 1.0, mode: str = "presentation") -> bytes:
    return _core.render_png(_text(slide), scale, mode)


def ingest(path: str | os.PathLike, strict: bool = False) -> tuple[list[Slide], dict]:
    """Slides (each with its "id") and the deck manifest."""
    slides, ids, manifest = _core.ingest(os.fspath(path), strict)
    docs = []
    for text, slide_id in zip(slides, ids):
        doc = json.loads(text)
        doc["id"] = slide_id
        docs.append(doc)
    return docs, json.loads(manifest)


def run_pipeline(
    config_path: str | os.PathLike,
    stages: Iterable[str] = (),
    *,
    force: bool = False,
    run_id: Optional[str] = None,
    output_root: Optional[str | os.PathLike] = None,
    offline: bool = False,
    workers: Optional[int] = None,
) -> dict[str, Any]:
    """Run stages in order; returns the exit code and per-stage statuses."""
    return _core.run_pipeline(
        os.fspath(config_path),
        list(stages),
        force,
        run_id,
        None if output_root is None else os.fspath(output_root),
        offline,
        workers,
    )

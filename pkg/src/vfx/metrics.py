"""Temporal-control metrics and the timing-accuracy evaluation protocol.

Segments are half-open integer frame intervals. The frame-level error is the
mean absolute endpoint deviation; the second-level error is that value
divided (exactly once) by the frame rate, so e_s * fps == e_f by
construction. Temporal IoU is standard 1-D intersection over union.

The evaluation protocol draws ground-truth timestamp pairs per reference
image (start within the first two frames, end anywhere from frame 2 to T),
samples a clip per pair, re-extracts the motion interval from the sampled
frames, and aggregates per effect category. Extraction failures score IoU 0
plus the worst attainable endpoint error for that pair and are flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from vfx.annotation import MotionDetectorConfig, annotate_clip
from vfx.dataset.types import VideoClip
from vfx.errors import NoMotionDetected, ValidationError


@dataclass(frozen=True)
class Segment:
    """Half-open [start, end) frame interval."""

    start: int
    end: int

    def __post_init__(self):
        if self.start >= self.end:
            raise ValidationError(f"segment needs start < end, got ({self.start}, {self.end})")


@dataclass(frozen=True)
class SegmentPair:
    predicted: Segment
    truth: Segment
    fps: int = 8

    def __post_init__(self):
        if self.fps <= 0:
            raise ValidationError("fps must be positive")


def frame_error(pairs: Sequence[SegmentPair]) -> float:
    """Mean |start error| + |end error| in frames."""
    if not pairs:
        raise ValidationError("frame_error needs at least one pair")
    total = sum(
        abs(p.predicted.start - p.truth.start) + abs(p.predicted.end - p.truth.end)
        for p in pairs
    )
    return total / len(pairs)


def second_error(pairs: Sequence[SegmentPair]) -> float:
    """Frame error converted to seconds; all pairs must share one frame rate."""
    if not pairs:
        raise ValidationError("second_error needs at least one pair")
    fps = pairs[0].fps
    if any(p.fps != fps for p in pairs):
        raise ValidationError("second_error needs a single fps across pairs")
    return frame_error(pairs) / fps


def temporal_iou(pred: Segment, truth: Segment) -> float:
    """1-D IoU of half-open integer intervals, in [0, 1]."""
    inter = min(pred.end, truth.end) - max(pred.start, truth.start)
    if inter <= 0:
        return 0.0
    union = max(pred.end, truth.end) - min(pred.start, truth.start)
    return inter / union


def dynamic_degree_proxy(clip: VideoClip, threshold: float = 1e-3) -> float:
    """Fraction of transitions whose mean |frame difference| exceeds a threshold."""
    if clip.num_frames < 2:
        raise ValidationError("dynamic degree needs at least 2 frames")
    diffs = np.abs(np.diff(clip.frames.astype(np.float64), axis=0)).mean(axis=(1, 2, 3))
    return float((diffs > threshold).mean())


def motion_energy_ratio(clip: VideoClip, region_a: np.ndarray, region_b: np.ndarray,
                        eps: float = 1e-6) -> float:
    """Mean squared temporal-difference energy in region A over region B.

    Regions are boolean [H, W] masks and must be disjoint and non-empty; the
    denominator is floored at eps.
    """
    if region_a.shape != clip.frames.shape[1:3] or region_b.shape != clip.frames.shape[1:3]:
        raise ValidationError("regions must be [H, W] masks matching the clip")
    if not region_a.any() or not region_b.any():
        raise ValidationError("regions must be non-empty")
    if (region_a & region_b).any():
        raise ValidationError("regions must be disjoint")
    diffs = np.diff(clip.frames.astype(np.float64), axis=0) ** 2  # [T-1, H, W, C]
    energy_a = diffs[:, region_a].mean()
    energy_b = diffs[:, region_b].mean()
    return float(energy_a / max(energy_b, eps))


# ---------------------------------------------------------------------------
# Evaluation protocol
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class EvalReference:
    """One reference sample the protocol generates from."""

    image: np.ndarray
    category: str
    fps: int
    total_frames: int
    name: str = ""


@dataclass(frozen=True)
class EvalProtocolConfig:
    pairs_per_reference: int = 5
    start_max: int = 2  # start drawn from [0, start_max)
    end_min: int = 2    # end drawn from [max(end_min, start+1), total_frames]
    seed: int = 0
    # Generated clips carry per-frame model noise, so the default detector is
    # displacement-only: block matching ignores additive noise but needs the
    # motion to clear ~1.5 px per transition.
    detector: MotionDetectorConfig = field(
        default_factory=lambda: MotionDetectorConfig(
            use_tracking=True, use_intensity=False,
            displacement_threshold=1.5, grid_step=5, patch_size=7, search_radius=6,
        )
    )

    def __post_init__(self):
        if self.pairs_per_reference < 1:
            raise ValidationError("need at least one pair per reference")
        if self.start_max < 1 or self.end_min < 1:
            raise ValidationError("start_max and end_min must be >= 1")


def draw_truth_pairs(cfg: EvalProtocolConfig, total_frames: int,
                     rng: np.random.Generator) -> list[Segment]:
    """Ground-truth timestamp pairs: start in the first start_max frames, end
    anywhere in [end_min, T] past the start.

    end = T-1 is never drawn: a T-frame clip has T-1 observable transitions,
    so motion ending at T-1 is indistinguishable from motion running to T and
    no extractor could be scored fairly on it.
    """
    pairs = []
    for _ in range(cfg.pairs_per_reference):
        start = int(rng.integers(0, min(cfg.start_max, total_frames - 1)))
        lo = max(cfg.end_min, start + 1)
        candidates = [e for e in range(lo, total_frames + 1) if e != total_frames - 1]
        end = int(candidates[int(rng.integers(0, len(candidates)))])
        pairs.append(Segment(start, end))
    return pairs


def worst_endpoint_error(truth: Segment, total_frames: int) -> int:
    """Largest |start error| + |end error| any prediction could score."""
    return max(truth.start, total_frames - truth.start) + max(
        truth.end, total_frames - truth.end
    )


SamplerFn = Callable[[EvalReference, Segment, int], VideoClip]


def run_eval_protocol(sampler: SamplerFn, references: Sequence[EvalReference],
                      cfg: EvalProtocolConfig) -> dict:
    """Generate, re-extract, and score timing accuracy.

    `sampler(reference, truth_segment, seed)` must return a clip of
    `reference.total_frames` frames. Returns a report dict with per-category
    and average rows {t_iou, e_f, e_s, pairs, extraction_failures}.
    """
    if not references:
        raise ValidationError("protocol needs at least one reference")
    rows: dict[str, list[dict]] = {}
    for ref_idx, ref in enumerate(sorted(references, key=lambda r: (r.category, r.name))):
        rng = np.random.default_rng((cfg.seed, ref_idx))
        truths = draw_truth_pairs(cfg, ref.total_frames, rng)
        for pair_idx, truth in enumerate(truths):
            job_seed = int(np.random.default_rng((cfg.seed, ref_idx, pair_idx)).integers(2**31))
            clip = sampler(ref, truth, job_seed)
            if clip.num_frames != ref.total_frames:
                raise ValidationError("sampler returned a clip of the wrong length")
            try:
                ann = annotate_clip(clip, cfg.detector)
                pred = Segment(ann.t_start, ann.t_end)
                row = {
                    "t_iou": temporal_iou(pred, truth),
                    "e_f": abs(pred.start - truth.start) + abs(pred.end - truth.end),
                    "failed": False,
                }
            except NoMotionDetected:
                row = {
                    "t_iou": 0.0,
                    "e_f": worst_endpoint_error(truth, ref.total_frames),
                    "failed": True,
                }
            row["fps"] = ref.fps
            rows.setdefault(ref.category, []).append(row)

    def summarize(entries: list[dict]) -> dict:
        e_f = float(np.mean([r["e_f"] for r in entries]))
        fps_values = {r["fps"] for r in entries}
        if len(fps_values) == 1:
            e_s = e_f / fps_values.pop()
        else:  # mixed frame rates: average the per-pair second errors
            e_s = float(np.mean([r["e_f"] / r["fps"] for r in entries]))
        return {
            "t_iou": float(np.mean([r["t_iou"] for r in entries])),
            "e_f": e_f,
            "e_s": e_s,
            "pairs": len(entries),
            "extraction_failures": int(sum(r["failed"] for r in entries)),
        }

    per_effect = {cat: summarize(entries) for cat, entries in sorted(rows.items())}
    all_rows = [r for entries in rows.values() for r in entries]
    report = {
        "per_effect": per_effect,
        "average": summarize(all_rows),
        "protocol": {
            "pairs_per_reference": cfg.pairs_per_reference,
            "references": len(references),
            "seed": cfg.seed,
        },
    }
    return report

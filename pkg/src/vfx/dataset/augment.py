"""Temporal augmentation: re-position a clip's motion segment in time.

The motion duration D is preserved; the new start is uniform over the
integers [0, T - D], so the new end lands in [D, T]. Frames outside the
re-indexed segment replicate the clip's pre-motion / post-motion state
(hold-first / hold-last), which is exact for effect clips that are static
before motion begins and after it ends.
"""

from __future__ import annotations

import numpy as np

from vfx.dataset.types import TimestampAnnotation, VideoClip
from vfx.errors import ValidationError


def shift_motion_segment(frames: np.ndarray, ann: TimestampAnnotation,
                         new_start: int) -> np.ndarray:
    """Re-index a [T, ...] frame array so motion spans [new_start, new_start + D).

    Source index is clamped into [t_start, min(t_end, T - 1)]: positions before
    the new segment replicate the pre-motion frame, positions after it
    replicate the post-motion frame. Works on clips and mask arrays alike.
    """
    t_total = frames.shape[0]
    if ann.total_frames != t_total:
        raise ValidationError(
            f"annotation covers {ann.total_frames} frames, array has {t_total}"
        )
    d = ann.duration
    if not (0 <= new_start <= t_total - d):
        raise ValidationError(f"new start {new_start} out of range [0, {t_total - d}]")
    src = np.arange(t_total) - new_start + ann.t_start
    src = np.clip(src, ann.t_start, min(ann.t_end, t_total - 1))
    return frames[src]


def temporal_augment(
    clip: VideoClip,
    ann: TimestampAnnotation,
    rng: np.random.Generator,
) -> tuple[VideoClip, TimestampAnnotation]:
    """Randomly shift the motion segment; duration and frame count are preserved."""
    t_total = clip.num_frames
    if ann.total_frames != t_total:
        raise ValidationError("annotation does not match clip length")
    d = ann.duration
    if d > t_total:
        raise ValidationError("motion duration exceeds clip length")
    new_start = int(rng.integers(0, t_total - d + 1))
    new_frames = shift_motion_segment(clip.frames, ann, new_start)
    new_ann = TimestampAnnotation(new_start, new_start + d, t_total)
    return VideoClip(frames=new_frames, fps=clip.fps), new_ann

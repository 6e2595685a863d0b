"""Core data types: video clips, instance masks, motion-timestamp annotations,
manifest records, and synthetic-scene specifications.

All timestamps are half-open frame intervals [t_start, t_end); the normalized
form divides both endpoints by the clip's total frame count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from vfx.errors import ValidationError

EFFECT_KINDS = ("levitate", "dissolve", "explode", "squish")


@dataclass(frozen=True)
class VideoClip:
    """A finite frame sequence.

    frames: float32 array [T, H, W, C] with values in [0, 1].
    fps: frames per second.
    """

    frames: np.ndarray
    fps: int = 8

    def __post_init__(self):
        f = self.frames
        if not isinstance(f, np.ndarray) or f.ndim != 4:
            raise ValidationError("clip frames must be a [T, H, W, C] array")
        if f.shape[0] < 1 or f.shape[3] < 1:
            raise ValidationError(f"clip needs T >= 1 and C >= 1, got shape {f.shape}")
        if not np.isfinite(f).all():
            raise ValidationError("clip frames contain non-finite values")
        if f.min() < 0.0 or f.max() > 1.0:
            raise ValidationError("clip pixel values must lie in [0, 1]")
        if not (isinstance(self.fps, (int, np.integer)) and self.fps > 0):
            raise ValidationError(f"fps must be a positive integer, got {self.fps!r}")

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def channels(self) -> int:
        return self.frames.shape[3]


@dataclass(frozen=True)
class TimestampAnnotation:
    """Half-open motion interval [t_start, t_end) in frames of a T-frame clip."""

    t_start: int
    t_end: int
    total_frames: int

    def __post_init__(self):
        s, e, t = self.t_start, self.t_end, self.total_frames
        if not all(isinstance(v, (int, np.integer)) for v in (s, e, t)):
            raise ValidationError("timestamps must be integers")
        if not (0 <= s < e <= t):
            raise ValidationError(
                f"timestamps must satisfy 0 <= t_start < t_end <= total_frames, "
                f"got ({s}, {e}) with total_frames={t}"
            )

    @property
    def duration(self) -> int:
        return self.t_end - self.t_start

    @property
    def normalized(self) -> tuple[float, float]:
        return self.t_start / self.total_frames, self.t_end / self.total_frames


@dataclass(frozen=True)
class MaskSequence:
    """Per-frame binary instance masks, aligned to a clip: uint8 array [T, H, W]."""

    masks: np.ndarray
    instance_id: str = "object"

    def __post_init__(self):
        m = self.masks
        if not isinstance(m, np.ndarray) or m.ndim != 3:
            raise ValidationError("masks must be a [T, H, W] array")
        if not np.isin(m, (0, 1)).all():
            raise ValidationError("mask values must be 0 or 1")

    @property
    def num_frames(self) -> int:
        return self.masks.shape[0]


def check_mask_matches_clip(mask: MaskSequence, clip: VideoClip) -> None:
    if mask.masks.shape != clip.frames.shape[:3]:
        raise ValidationError(
            f"mask shape {mask.masks.shape} does not match clip "
            f"{clip.frames.shape[:3]}"
        )


@dataclass(frozen=True)
class ManifestRecord:
    """One training/eval example: a clip directory, optional mask directory,
    motion annotation, prompt, and effect category."""

    clip_path: Path
    annotation: TimestampAnnotation
    prompt: str
    category: str
    fps: int
    mask_path: Path | None = None


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple[ManifestRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def filter_category(self, category: str | None) -> "DatasetManifest":
        if category is None:
            return self
        kept = tuple(r for r in self.records if r.category == category)
        return DatasetManifest(records=kept)

    @property
    def categories(self) -> tuple[str, ...]:
        seen: list[str] = []
        for r in self.records:
            if r.category not in seen:
                seen.append(r.category)
        return tuple(seen)


@dataclass(frozen=True)
class ObjectSpec:
    """An axis-aligned square or disc: center in pixels, half extent, RGB color."""

    cx: float
    cy: float
    half: float
    color: tuple[float, float, float]
    shape: str = "square"

    def __post_init__(self):
        if self.shape not in ("square", "disc"):
            raise ValidationError(f"unknown object shape {self.shape!r}")
        if self.half <= 0:
            raise ValidationError("object half extent must be positive")
        if any(not (0.0 <= c <= 1.0) for c in self.color):
            raise ValidationError("object color channels must lie in [0, 1]")

    def require_inside(self, height: int, width: int, margin: float = 1.0) -> None:
        """Raise unless the object footprint (plus an anti-aliasing margin) fits."""
        r = self.half + 0.5 + margin
        if not (r <= self.cx <= width - 1 - r and r <= self.cy <= height - 1 - r):
            raise ValidationError(
                f"object at ({self.cx:.1f}, {self.cy:.1f}) with half extent "
                f"{self.half:.1f} is not fully inside a {height}x{width} frame"
            )


@dataclass(frozen=True)
class SyntheticEffectSpec:
    """Closed-form description of one synthetic effect clip.

    The moving object animates over [t_start, t_end); static_objects are
    distractors that never move. Motion magnitudes are derived
    deterministically from `seed`.
    """

    kind: str
    obj: ObjectSpec
    background: tuple[float, float, float]
    t_start: int
    t_end: int
    frames: int
    height: int = 64
    width: int = 64
    fps: int = 8
    seed: int = 0
    static_objects: tuple[ObjectSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in EFFECT_KINDS:
            raise ValidationError(
                f"unknown effect kind {self.kind!r}; expected one of {EFFECT_KINDS}"
            )
        if self.height < 8 or self.width < 8:
            raise ValidationError("frame dims must be at least 8x8")
        if any(not (0.0 <= c <= 1.0) for c in self.background):
            raise ValidationError("background channels must lie in [0, 1]")
        # Also validates 0 <= t_start < t_end <= frames.
        TimestampAnnotation(self.t_start, self.t_end, self.frames)
        self.obj.require_inside(self.height, self.width)
        for other in self.static_objects:
            other.require_inside(self.height, self.width)

    @property
    def annotation(self) -> TimestampAnnotation:
        return TimestampAnnotation(self.t_start, self.t_end, self.frames)

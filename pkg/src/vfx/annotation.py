"""Motion-timestamp annotation from point tracks and intensity changes.

The pipeline seeds a point grid on the first frame, advances each point by
block matching between consecutive frames, and marks a transition t as
"moving" when the largest per-point displacement exceeds a threshold.
Appearance-only effects (a fade has no geometric motion) are caught by a
per-transition mean-intensity-change detector; the two signals combine by OR.

Tracker and segmenter backends are pluggable: anything that maps a clip to a
PointTrackSet (or a clip and a user region to a MaskSequence) can replace the
bundled block-matching tracker.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from vfx.dataset.types import MaskSequence, TimestampAnnotation, VideoClip
from vfx.errors import NoMotionDetected, ValidationError


@dataclass(frozen=True)
class PointTrackSet:
    """Tracked point positions: [P, T, 2] (x, y) pixels plus [P, T] visibility."""

    positions: np.ndarray
    visibility: np.ndarray

    def __post_init__(self):
        p = self.positions
        v = self.visibility
        if p.ndim != 3 or p.shape[2] != 2 or p.shape[0] < 1:
            raise ValidationError("positions must be a [P, T, 2] array with P >= 1")
        if v.shape != p.shape[:2]:
            raise ValidationError("visibility must be [P, T]")
        if not np.isfinite(p).all():
            raise ValidationError("track coordinates must be finite")

    @property
    def num_points(self) -> int:
        return self.positions.shape[0]

    @property
    def num_frames(self) -> int:
        return self.positions.shape[1]


class Tracker(Protocol):
    def __call__(self, clip: VideoClip) -> PointTrackSet: ...


class Segmenter(Protocol):
    def __call__(self, clip: VideoClip, region: np.ndarray) -> MaskSequence: ...


def _interval_from_moving(moving: np.ndarray, t_total: int) -> TimestampAnnotation:
    """Turn a [T-1] boolean transition vector into a half-open frame interval.

    When motion runs through the final observable transition (index T-2), the
    clip gives no evidence that motion ever stopped, so the interval extends
    to T rather than T-1.
    """
    idx = np.flatnonzero(moving)
    if idx.size == 0:
        raise NoMotionDetected("no transition exceeds the motion threshold")
    first = int(idx[0])
    last = int(idx[-1])
    t_end = t_total if last == t_total - 2 else last + 1
    return TimestampAnnotation(first, t_end, t_total)


def extract_timestamps(
    tracks: PointTrackSet, motion_threshold: float = 0.5
) -> TimestampAnnotation:
    """Start/end motion timestamps from point displacements.

    Transition t is moving when the max Euclidean step |pos(t+1) - pos(t)| over
    points visible at both t and t+1 exceeds the threshold. Invisible points
    are excluded; fully static track sets raise NoMotionDetected.
    """
    if motion_threshold <= 0:
        raise ValidationError("motion threshold must be positive")
    t_total = tracks.num_frames
    if t_total < 2:
        raise ValidationError("need at least two frames to detect motion")
    if not tracks.visibility.any():
        raise NoMotionDetected("all points are invisible")

    steps = np.linalg.norm(np.diff(tracks.positions, axis=1), axis=2)  # [P, T-1]
    valid = (tracks.visibility[:, :-1] > 0) & (tracks.visibility[:, 1:] > 0)
    steps = np.where(valid, steps, 0.0)
    moving = steps.max(axis=0) > motion_threshold
    return _interval_from_moving(moving, t_total)


def fallback_track(
    clip: VideoClip,
    grid_step: int = 8,
    patch_size: int = 7,
    search_radius: int = 4,
) -> PointTrackSet:
    """Grid-seeded block-matching tracker (a lightweight neural-tracker stand-in).

    Points start on a regular grid over frame 0 and advance per transition to
    the integer displacement minimizing patch SSD; ties keep the smaller
    displacement, so static content yields exactly zero motion. Deterministic.
    """
    if grid_step < 1:
        raise ValidationError("grid_step must be >= 1")
    if clip.num_frames < 2:
        raise ValidationError("clip must have at least 2 frames")
    gray = clip.frames.mean(axis=3)  # [T, H, W]
    t_total, h, w = gray.shape
    half = patch_size // 2
    margin = half + search_radius

    ys = np.arange(margin, h - margin, grid_step)
    xs = np.arange(margin, w - margin, grid_step)
    if ys.size == 0 or xs.size == 0:
        raise ValidationError("frame too small for the requested patch and radius")
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    pos_y = grid_y.ravel().astype(np.int64)
    pos_x = grid_x.ravel().astype(np.int64)
    n_pts = pos_y.size

    dy_patch, dx_patch = np.mgrid[-half : half + 1, -half : half + 1]
    positions = np.empty((n_pts, t_total, 2), dtype=np.float64)
    positions[:, 0, 0] = pos_x
    positions[:, 0, 1] = pos_y

    offsets = [
        (dy, dx)
        for dy in range(-search_radius, search_radius + 1)
        for dx in range(-search_radius, search_radius + 1)
    ]
    # Zero displacement first so ties resolve to "no motion".
    offsets.sort(key=lambda d: (abs(d[0]) + abs(d[1]), d))

    for t in range(t_total - 1):
        ref = gray[t][pos_y[:, None, None] + dy_patch, pos_x[:, None, None] + dx_patch]
        best_err = np.full(n_pts, np.inf)
        best_dy = np.zeros(n_pts, dtype=np.int64)
        best_dx = np.zeros(n_pts, dtype=np.int64)
        nxt = gray[t + 1]
        for dy, dx in offsets:
            yy = np.clip(pos_y + dy, half, h - 1 - half)
            xx = np.clip(pos_x + dx, half, w - 1 - half)
            cand = nxt[yy[:, None, None] + dy_patch, xx[:, None, None] + dx_patch]
            err = ((cand - ref) ** 2).sum(axis=(1, 2))
            better = err < best_err - 1e-12
            best_err[better] = err[better]
            best_dy[better] = yy[better] - pos_y[better]
            best_dx[better] = xx[better] - pos_x[better]
        pos_y = pos_y + best_dy
        pos_x = pos_x + best_dx
        positions[:, t + 1, 0] = pos_x
        positions[:, t + 1, 1] = pos_y

    visibility = np.ones((n_pts, t_total), dtype=np.uint8)
    return PointTrackSet(positions=positions, visibility=visibility)


def intensity_change(clip: VideoClip) -> np.ndarray:
    """Mean absolute pixel change per transition: [T-1] array."""
    if clip.num_frames < 2:
        raise ValidationError("clip must have at least 2 frames")
    diffs = np.abs(np.diff(clip.frames.astype(np.float64), axis=0))
    return diffs.mean(axis=(1, 2, 3))


@dataclass(frozen=True)
class MotionDetectorConfig:
    """Knobs for combined displacement + intensity motion detection.

    The displacement rule (block matching) is robust to additive noise, since
    static content matches itself at zero displacement; the intensity rule
    catches appearance-only effects with no geometric motion. They combine by
    OR. `intensity_rel_threshold` is a fraction of the largest per-transition
    intensity change (zero disables the relative rule).
    """

    displacement_threshold: float = 0.5
    use_intensity: bool = True
    intensity_threshold: float = 1e-6
    intensity_rel_threshold: float = 0.0
    use_tracking: bool = True
    grid_step: int = 8
    patch_size: int = 7
    search_radius: int = 4
    tracker: Callable[[VideoClip], PointTrackSet] | None = None


def _fit_tracker_geometry(cfg: MotionDetectorConfig, h: int, w: int) -> tuple[int, int]:
    """Shrink patch/radius so at least one grid point fits a small frame."""
    margin_max = (min(h, w) - 2) // 2
    patch, radius = cfg.patch_size, cfg.search_radius
    if patch // 2 + 1 > margin_max:
        patch = max(3, 2 * (margin_max - 1) + 1)
    radius = max(1, min(radius, margin_max - patch // 2))
    if patch // 2 + radius > margin_max:
        raise ValidationError(f"frame {h}x{w} too small for block-matching")
    return patch, radius


def moving_transitions(clip: VideoClip, cfg: MotionDetectorConfig) -> np.ndarray:
    """Boolean [T-1] vector marking transitions with detected motion."""
    if not (cfg.use_tracking or cfg.use_intensity):
        raise ValidationError("at least one detection rule must be enabled")
    moving = np.zeros(clip.num_frames - 1, dtype=bool)
    if cfg.use_intensity:
        energy = intensity_change(clip)
        threshold = cfg.intensity_threshold
        if cfg.intensity_rel_threshold > 0.0:
            threshold = max(threshold, cfg.intensity_rel_threshold * float(energy.max()))
        moving = energy > threshold
    if cfg.use_tracking:
        if cfg.tracker is not None:
            tracker = cfg.tracker
        else:
            patch, radius = _fit_tracker_geometry(cfg, clip.height, clip.width)
            tracker = lambda c: fallback_track(c, cfg.grid_step, patch, radius)
        tracks = tracker(clip)
        steps = np.linalg.norm(np.diff(tracks.positions, axis=1), axis=2)
        valid = (tracks.visibility[:, :-1] > 0) & (tracks.visibility[:, 1:] > 0)
        steps = np.where(valid, steps, 0.0)
        moving = moving | (steps.max(axis=0) > cfg.displacement_threshold)
    return moving


def annotate_clip(
    clip: VideoClip, cfg: MotionDetectorConfig | None = None
) -> TimestampAnnotation:
    """Extract the motion interval of a clip via tracking OR intensity change."""
    cfg = cfg or MotionDetectorConfig()
    return _interval_from_moving(moving_transitions(clip, cfg), clip.num_frames)

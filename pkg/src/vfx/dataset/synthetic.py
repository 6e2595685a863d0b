"""Synthetic effect clip generator.

Each effect animates a single object with a closed-form motion parameter

    p(t) = clip((t - t_start) / D, 0, 1),   D = t_end - t_start,

so consecutive frames differ exactly on the transitions t in
[t_start, t_end) and nowhere else. Frames are quantized to the uint8 grid
(multiples of 1/255), which makes PNG round-trips lossless and keeps the
"zero difference outside the motion interval" guarantee intact on disk.

Effects:
  levitate  — the object hovers: it moves at constant speed, bouncing between
              its rest height and the available headroom, so every in-motion
              frame displaces by the same amount however long the effect runs.
  dissolve  — the object's opacity fades linearly from 1 to 0; opacity
              reaches 0 exactly at t_end, so there is no early plateau.
  explode   — the object bursts into fragments that translate outward.
  squish    — the object pulses vertically onto its base line at constant
              edge speed (compressing, then rebounding).

Rendering is anti-aliased (1-pixel soft edges), so sub-pixel motion still
changes pixel values on every in-motion transition.
"""

from __future__ import annotations

import numpy as np

from vfx.dataset.types import (
    EFFECT_KINDS,
    MaskSequence,
    ObjectSpec,
    SyntheticEffectSpec,
    TimestampAnnotation,
    VideoClip,
)
from vfx.errors import ValidationError

# Fraction of the object height that survives a full squish.
SQUISH_RETAIN = 0.3


def _coverage(obj_shape: str, cx: float, cy: float, half_x: float, half_y: float,
              yy: np.ndarray, xx: np.ndarray) -> np.ndarray:
    """Per-pixel coverage in [0, 1] with a ~1px anti-aliased edge."""
    if obj_shape == "square":
        cov_x = np.clip(half_x + 0.5 - np.abs(xx - cx), 0.0, 1.0)
        cov_y = np.clip(half_y + 0.5 - np.abs(yy - cy), 0.0, 1.0)
        return cov_x * cov_y
    # Disc: radial distance with the mean half extent as radius.
    r = 0.5 * (half_x + half_y)
    dist = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
    return np.clip(r + 0.5 - dist, 0.0, 1.0)


def _paint(frame: np.ndarray, cov: np.ndarray, color: tuple[float, float, float],
           alpha: float = 1.0) -> None:
    """Alpha-composite a flat-colored shape onto `frame` in place."""
    a = (cov * alpha)[..., None]
    frame *= 1.0 - a
    frame += a * np.asarray(color, dtype=np.float64)


def _quantize(frames: np.ndarray) -> np.ndarray:
    """Snap to the uint8 grid so PNG save/load is the identity."""
    return (np.round(frames * 255.0) / 255.0).astype(np.float32)


def _bounce_positions(start: float, lo: float, hi: float, speed: float,
                      n_steps: int) -> np.ndarray:
    """Positions of a constant-speed point bouncing inside [lo, hi]."""
    pos = np.empty(n_steps + 1)
    pos[0] = start
    x, direction = start, -1.0
    for k in range(1, n_steps + 1):
        if not lo <= x + direction * speed <= hi:
            direction = -direction
        x += direction * speed
        pos[k] = x
    return pos


class _MotionModel:
    """Derived per-kind motion parameters, deterministic in the spec seed."""

    def __init__(self, spec: SyntheticEffectSpec):
        rng = np.random.default_rng(spec.seed)
        self.spec = spec
        o = spec.obj
        d = spec.t_end - spec.t_start
        if spec.kind == "levitate":
            headroom = o.cy - o.half - 1.5
            speed = float(rng.uniform(1.8, 2.8))
            if headroom < speed:
                raise ValidationError("levitate needs headroom above the object")
            self.y_positions = _bounce_positions(o.cy, o.cy - headroom, o.cy, speed, d)
        elif spec.kind == "squish":
            min_half = SQUISH_RETAIN * o.half
            speed = float(rng.uniform(1.2, 2.0))
            if o.half - min_half < speed:
                raise ValidationError("squish needs a taller object for its edge speed")
            self.half_heights = _bounce_positions(o.half, min_half, o.half, speed, d)
        elif spec.kind == "explode":
            n_frag = int(rng.integers(4, 7))
            frag_half = max(1.0, o.half / 2.2)
            angles = rng.uniform(0.0, 2.0 * np.pi) + np.arange(n_frag) * 2.0 * np.pi / n_frag
            offsets = rng.uniform(0.2, 0.8, size=n_frag) * o.half
            self.frag_half = frag_half
            self.frag_start = np.stack(
                [o.cx + offsets * np.cos(angles), o.cy + offsets * np.sin(angles)], axis=1
            )
            self.frag_dir = np.stack([np.cos(angles), np.sin(angles)], axis=1)
            # Clamp travel so every fragment stays fully inside the frame at p=1.
            travel = rng.uniform(0.5, 1.0) * d
            lim = frag_half + 2.0
            for (fx, fy), (dx, dy) in zip(self.frag_start, self.frag_dir):
                for pos, vel, size in ((fx, dx, spec.width), (fy, dy, spec.height)):
                    if vel > 1e-9:
                        travel = min(travel, (size - 1 - lim - pos) / vel)
                    elif vel < -1e-9:
                        travel = min(travel, (pos - lim) / -vel)
            if travel < 0.35 * d:
                raise ValidationError("explode fragments would leave the frame")
            self.travel = float(travel)
        # dissolve needs no sampled parameters.

    def render_object(self, frame: np.ndarray, p: float,
                      yy: np.ndarray, xx: np.ndarray) -> np.ndarray:
        """Paint the moving object at progress p; returns its coverage map."""
        o = self.spec.obj
        kind = self.spec.kind
        d = self.spec.t_end - self.spec.t_start
        k = int(round(p * d))  # exact frame offset: p is always a multiple of 1/D
        if kind == "levitate":
            cov = _coverage(o.shape, o.cx, self.y_positions[k], o.half, o.half, yy, xx)
            _paint(frame, cov, o.color)
            return cov
        if kind == "dissolve":
            cov = _coverage(o.shape, o.cx, o.cy, o.half, o.half, yy, xx)
            alpha = 1.0 - p
            _paint(frame, cov, o.color, alpha)
            return cov if alpha > 0.0 else np.zeros_like(cov)
        if kind == "squish":
            half_y = self.half_heights[k]
            bottom = o.cy + o.half
            cov = _coverage("square", o.cx, bottom - half_y, o.half, half_y, yy, xx)
            _paint(frame, cov, o.color)
            return cov
        # explode
        if p <= 0.0:
            cov = _coverage(o.shape, o.cx, o.cy, o.half, o.half, yy, xx)
            _paint(frame, cov, o.color)
            return cov
        total = np.zeros_like(yy, dtype=np.float64)
        for (fx, fy), (dx, dy) in zip(self.frag_start, self.frag_dir):
            cov = _coverage("square", fx + dx * self.travel * p, fy + dy * self.travel * p,
                            self.frag_half, self.frag_half, yy, xx)
            _paint(frame, cov, o.color)
            total = np.maximum(total, cov)
        return total


def generate_synthetic_clip(
    spec: SyntheticEffectSpec,
) -> tuple[VideoClip, MaskSequence, TimestampAnnotation]:
    """Render a synthetic effect clip with its instance mask and annotation.

    Deterministic given the spec (including its seed). Consecutive frames are
    bitwise identical outside the motion interval and differ on every
    transition inside it.
    """
    motion = _MotionModel(spec)
    h, w, t_total = spec.height, spec.width, spec.frames
    d = spec.t_end - spec.t_start
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)

    frames = np.empty((t_total, h, w, 3), dtype=np.float32)
    masks = np.empty((t_total, h, w), dtype=np.uint8)

    # Progress is piecewise constant outside [t_start, t_end); identical
    # progress values are rendered once and reused so out-of-interval frames
    # are bitwise equal.
    cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}
    for t in range(t_total):
        p = min(max((t - spec.t_start) / d, 0.0), 1.0)
        if p not in cache:
            frame = np.empty((h, w, 3), dtype=np.float64)
            frame[:] = np.asarray(spec.background, dtype=np.float64)
            for other in spec.static_objects:
                _paint(frame, _coverage(other.shape, other.cx, other.cy,
                                        other.half, other.half, yy, xx), other.color)
            cov = motion.render_object(frame, p, yy, xx)
            cache[p] = (_quantize(frame), (cov > 0.5).astype(np.uint8))
        frames[t], masks[t] = cache[p]

    clip = VideoClip(frames=frames, fps=spec.fps)
    return clip, MaskSequence(masks=masks), spec.annotation


_PALETTE = (
    (0.85, 0.25, 0.2),
    (0.2, 0.45, 0.85),
    (0.25, 0.75, 0.3),
    (0.9, 0.75, 0.15),
    (0.7, 0.3, 0.8),
    (0.95, 0.5, 0.1),
)
_BACKGROUNDS = ((0.08, 0.08, 0.1), (0.92, 0.92, 0.9), (0.15, 0.2, 0.25))


def make_random_spec(
    seed: int,
    kind: str | None = None,
    frames: int = 32,
    height: int = 48,
    width: int = 48,
    fps: int = 8,
    min_duration: int = 4,
    max_duration: int | None = None,
) -> SyntheticEffectSpec:
    """Draw a valid random effect spec.

    Keeps a >= 2 frame static tail (t_end <= frames - 2) so the annotated end
    is unambiguous from the rendered frames, and sizes/contrasts so every
    in-motion transition survives uint8 quantization.
    """
    rng = np.random.default_rng(seed)
    if kind is None:
        kind = EFFECT_KINDS[int(rng.integers(0, len(EFFECT_KINDS)))]
    if max_duration is None:
        max_duration = max(min_duration, (2 * frames) // 3)
    max_duration = min(max_duration, frames - 4)

    last_error: ValidationError | None = None
    for _ in range(64):
        dur = int(rng.integers(min_duration, max_duration + 1))
        t_start = int(rng.integers(2, frames - dur - 1))

        half_lo = max(2.0, min(4.0, height / 9), height / 12)
        half = float(rng.uniform(half_lo, max(half_lo + 0.5, height / 5.5)))
        lo = half + 2.0
        cx = float(rng.uniform(lo, width - 1 - lo))
        # Levitation needs headroom; keep the object in the lower two thirds.
        cy_lo = lo + (0.3 * height if kind == "levitate" else 0.0)
        cy = float(rng.uniform(cy_lo, height - 1 - lo))
        background = _BACKGROUNDS[int(rng.integers(0, len(_BACKGROUNDS)))]
        # Pick a palette color far enough from the background for quantization.
        color = _PALETTE[int(rng.integers(0, len(_PALETTE)))]
        if max(abs(a - b) for a, b in zip(color, background)) < 0.35:
            color = (1.0 - background[0], 1.0 - background[1], 1.0 - background[2])
        shape = "square" if rng.random() < 0.5 or kind == "squish" else "disc"

        spec = SyntheticEffectSpec(
            kind=kind,
            obj=ObjectSpec(cx=cx, cy=cy, half=half, color=color, shape=shape),
            background=background,
            t_start=t_start,
            t_end=t_start + dur,
            frames=frames,
            height=height,
            width=width,
            fps=fps,
            seed=int(rng.integers(0, 2**31 - 1)),
        )
        try:
            _MotionModel(spec)  # rejects cramped geometry (e.g. no headroom)
        except ValidationError as exc:
            last_error = exc
            continue
        return spec
    raise ValidationError(f"could not draw a valid {kind} spec: {last_error}")


def make_two_object_spec(
    seed: int,
    mover: str = "left",
    kind: str = "levitate",
    frames: int = 24,
    height: int = 32,
    width: int = 32,
    fps: int = 8,
    t_start: int | None = None,
    duration: int | None = None,
) -> SyntheticEffectSpec:
    """A scene with one moving object and one static distractor, side by side.

    `mover` selects which side animates; the returned spec's mask covers the
    mover only.
    """
    if mover not in ("left", "right"):
        raise ValidationError("mover must be 'left' or 'right'")
    rng = np.random.default_rng(seed)
    half = float(rng.uniform(max(3.0, height / 10), height / 7))
    cy = float(rng.uniform(0.55 * height, height - half - 3.5))
    cx_left = width * 0.25
    cx_right = width * 0.75
    color_a = _PALETTE[int(rng.integers(0, len(_PALETTE)))]
    color_b = _PALETTE[(int(rng.integers(1, len(_PALETTE))) +
                        _PALETTE.index(color_a)) % len(_PALETTE)]
    if duration is None:
        dur_lo = max(2, min(6, frames // 4))
        duration = int(rng.integers(dur_lo, max(dur_lo + 1, frames // 2)))
    if t_start is None:
        # Keep a visible pre-motion prefix (the spatial condition lives there).
        start_lo = min(5, max(1, frames - duration - 2))
        t_start = int(rng.integers(start_lo, max(start_lo + 1, frames - duration - 1)))

    left = ObjectSpec(cx=cx_left, cy=cy, half=half, color=color_a)
    right = ObjectSpec(cx=cx_right, cy=cy, half=half, color=color_b)
    moving, static = (left, right) if mover == "left" else (right, left)
    return SyntheticEffectSpec(
        kind=kind,
        obj=moving,
        background=(0.1, 0.1, 0.12),
        t_start=t_start,
        t_end=t_start + duration,
        frames=frames,
        height=height,
        width=width,
        fps=fps,
        seed=int(rng.integers(0, 2**31 - 1)),
        static_objects=(static,),
    )


def side_regions(spec: SyntheticEffectSpec) -> tuple[np.ndarray, np.ndarray]:
    """Boolean [H, W] half-plane regions around the mover and the distractor.

    The split falls at the midpoint between the two object centers, so motion
    energy of either object lands in its own region.
    """
    if len(spec.static_objects) != 1:
        raise ValidationError("side_regions needs exactly one static distractor")
    other = spec.static_objects[0]
    mid = 0.5 * (spec.obj.cx + other.cx)
    cols = np.arange(spec.width)
    left_half = cols[None, :] < mid
    left_half = np.repeat(left_half, spec.height, axis=0)
    if spec.obj.cx < other.cx:
        return left_half, ~left_half
    return ~left_half, left_half

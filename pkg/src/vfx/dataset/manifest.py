"""Manifest and frame-directory I/O.

A manifest is a JSON file holding a top-level list of records with keys
`clip`, `mask` (optional/null), `start`, `end`, `total_frames`, `fps`,
`prompt`, `category`. Paths are stored relative to the manifest's directory
when possible and resolved against it on load.

Clips and masks live as directories of zero-padded PNG frames
(`frame_00000.png`, ...); masks are single-channel PNGs with values {0, 255}.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from vfx.dataset.types import (
    DatasetManifest,
    ManifestRecord,
    MaskSequence,
    TimestampAnnotation,
    VideoClip,
)
from vfx.errors import SchemaError, ValidationError

_REQUIRED_KEYS = ("clip", "start", "end", "total_frames", "fps", "prompt", "category")
_ALLOWED_KEYS = frozenset(_REQUIRED_KEYS) | {"mask"}


def save_clip(clip: VideoClip, directory: Path | str) -> Path:
    """Write a clip as frame_%05d.png files; returns the directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    data = np.round(clip.frames * 255.0).astype(np.uint8)
    for t in range(clip.num_frames):
        Image.fromarray(data[t]).save(directory / f"frame_{t:05d}.png")
    return directory


def load_clip(directory: Path | str, fps: int = 8) -> VideoClip:
    directory = Path(directory)
    paths = sorted(directory.glob("frame_*.png"))
    if not paths:
        raise ValidationError(f"no frame_*.png files in {directory}")
    frames = np.stack([np.asarray(Image.open(p).convert("RGB")) for p in paths])
    return VideoClip(frames=(frames.astype(np.float32) / 255.0), fps=fps)


def save_mask(mask: MaskSequence, directory: Path | str) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    data = (mask.masks * 255).astype(np.uint8)
    for t in range(mask.num_frames):
        Image.fromarray(data[t], mode="L").save(directory / f"frame_{t:05d}.png")
    return directory


def load_mask(directory: Path | str) -> MaskSequence:
    directory = Path(directory)
    paths = sorted(directory.glob("frame_*.png"))
    if not paths:
        raise ValidationError(f"no frame_*.png files in {directory}")
    masks = np.stack([np.asarray(Image.open(p).convert("L")) for p in paths])
    return MaskSequence(masks=(masks >= 128).astype(np.uint8))


def save_reference_image(image: np.ndarray, path: Path | str) -> Path:
    """Write an [H, W, C] float image in [0, 1] as a PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.round(image * 255.0).astype(np.uint8)).save(path)
    return path


def load_reference_image(path: Path | str) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"reference image {path} does not exist")
    return np.asarray(Image.open(path).convert("RGB")).astype(np.float32) / 255.0


def _relative_or_absolute(path: Path, base: Path) -> str:
    try:
        return str(path.resolve().relative_to(base.resolve()))
    except ValueError:
        return str(path.resolve())


def save_manifest(manifest: DatasetManifest, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    base = path.parent
    rows = []
    for rec in manifest.records:
        rows.append(
            {
                "clip": _relative_or_absolute(rec.clip_path, base),
                "mask": _relative_or_absolute(rec.mask_path, base)
                if rec.mask_path is not None
                else None,
                "start": rec.annotation.t_start,
                "end": rec.annotation.t_end,
                "total_frames": rec.annotation.total_frames,
                "fps": rec.fps,
                "prompt": rec.prompt,
                "category": rec.category,
            }
        )
    path.write_text(json.dumps(rows, indent=2) + "\n")
    return path


def load_manifest(path: Path | str) -> DatasetManifest:
    """Load and validate a manifest; raises SchemaError naming the offending
    record and field, ValidationError for missing referenced paths."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"manifest file {path} does not exist")
    try:
        rows = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(rows, list):
        raise SchemaError("manifest must be a top-level JSON list of records")

    base = path.parent
    records = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            raise SchemaError(f"record {i}: expected an object, got {type(row).__name__}")
        unknown = set(row) - _ALLOWED_KEYS
        if unknown:
            raise SchemaError(f"record {i}: unknown field(s) {sorted(unknown)}")
        for key in _REQUIRED_KEYS:
            if key not in row:
                raise SchemaError(f"record {i}: missing field '{key}'")
        for key in ("start", "end", "total_frames", "fps"):
            if not isinstance(row[key], int):
                raise SchemaError(f"record {i}: field '{key}' must be an integer")
        try:
            ann = TimestampAnnotation(row["start"], row["end"], row["total_frames"])
        except ValidationError as exc:
            raise SchemaError(f"record {i}: field 'start'/'end': {exc}") from exc
        if row["fps"] <= 0:
            raise SchemaError(f"record {i}: field 'fps' must be positive")

        clip_path = base / row["clip"]
        if not clip_path.exists():
            raise ValidationError(f"record {i}: clip path {clip_path} does not exist")
        mask_path = None
        if row.get("mask") is not None:
            mask_path = base / row["mask"]
            if not mask_path.exists():
                raise ValidationError(f"record {i}: mask path {mask_path} does not exist")

        records.append(
            ManifestRecord(
                clip_path=clip_path,
                mask_path=mask_path,
                annotation=ann,
                prompt=row["prompt"],
                category=row["category"],
                fps=row["fps"],
            )
        )
    return DatasetManifest(records=tuple(records))

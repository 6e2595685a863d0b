"""Clip/mask/timestamp data types, synthetic effect generation, manifest I/O,
and temporal augmentation."""

from vfx.dataset.augment import shift_motion_segment, temporal_augment
from vfx.dataset.manifest import (
    load_clip,
    load_manifest,
    load_mask,
    load_reference_image,
    save_clip,
    save_manifest,
    save_mask,
    save_reference_image,
)
from vfx.dataset.synthetic import (
    generate_synthetic_clip,
    make_random_spec,
    make_two_object_spec,
    side_regions,
)
from vfx.dataset.types import (
    EFFECT_KINDS,
    DatasetManifest,
    ManifestRecord,
    MaskSequence,
    ObjectSpec,
    SyntheticEffectSpec,
    TimestampAnnotation,
    VideoClip,
    check_mask_matches_clip,
)

__all__ = [
    "EFFECT_KINDS",
    "DatasetManifest",
    "ManifestRecord",
    "MaskSequence",
    "ObjectSpec",
    "SyntheticEffectSpec",
    "TimestampAnnotation",
    "VideoClip",
    "check_mask_matches_clip",
    "generate_synthetic_clip",
    "load_clip",
    "load_manifest",
    "load_mask",
    "load_reference_image",
    "make_random_spec",
    "make_two_object_spec",
    "save_clip",
    "save_manifest",
    "save_mask",
    "save_reference_image",
    "shift_motion_segment",
    "side_regions",
    "temporal_augment",
]

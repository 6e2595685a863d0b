"""Desk-scale controllable video diffusion transformer.

Synthetic effect clips, motion-timestamp annotation, temporal control via
timestamp tokens or temporal-mask embeddings, spatial control via a
zero-bridged mask branch, LoRA fine-tuning, a deterministic trainer/sampler,
and timing-accuracy metrics. See the `vfx` CLI for the end-to-end pipeline.
"""

__version__ = "0.1.0"

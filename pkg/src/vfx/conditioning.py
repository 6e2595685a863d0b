"""Conditioning signal builders.

Text prompts are embedded by a frozen, deterministic hash-seeded table (a toy
stand-in for a large text encoder; prompts here only need to separate effect
categories). Motion timing enters the denoiser one of two ways:

  * timestamp tokens — a small trainable map projects the normalized
    (start, end) pair to M tokens in the text embedding space; the tokens are
    concatenated in front of the text tokens and serve as extra cross-attention
    keys/values.
  * temporal-mask embedding — a per-latent-frame binary motion mask is
    projected into the timestep-embedding space and added to each frame's
    timestep embedding inside the denoiser.

Every trainable conditioning head zero-initializes its final layer, so at
initialization no control signal perturbs the base model's computation.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np
import torch
from torch import Tensor, nn

from vfx.dataset.types import MaskSequence, TimestampAnnotation
from vfx.errors import ValidationError


def _word_embedding(word: str, dim: int) -> np.ndarray:
    digest = hashlib.sha256(word.encode("utf-8")).digest()
    seed = int.from_bytes(digest[:8], "little")
    rng = np.random.default_rng(seed)
    return rng.standard_normal(dim) / np.sqrt(dim)


def encode_text(prompt: str, d_tau: int = 64, length: int = 16) -> Tensor:
    """Deterministic frozen text embedding: one token per whitespace word.

    Returns a float32 [length, d_tau] tensor; short prompts are padded with
    zero tokens, long ones truncated. Identical prompts give identical tokens.
    """
    words = prompt.split()
    if not words:
        raise ValidationError("prompt must be non-empty")
    out = np.zeros((length, d_tau), dtype=np.float64)
    for i, word in enumerate(words[:length]):
        out[i] = _word_embedding(word, d_tau)
    return torch.from_numpy(out.astype(np.float32))


class TimestampTokenEncoder(nn.Module):
    """Trainable map from a normalized (start, end) pair to M condition tokens.

    The two scalars are expanded into fixed sinusoidal features (several
    frequencies per endpoint) before the MLP, so comparisons between frame
    positions and the conditioned endpoints are inner-product shaped rather
    than something the downstream blocks must synthesize from raw scalars.
    Two hidden nonlinear layers feed a zero-initialized output layer, so the
    tokens are exactly zero before training.
    """

    FREQUENCIES = (1.0, 2.0, 4.0, 8.0)

    def __init__(self, m_tokens: int = 4, d_tau: int = 64, hidden: int = 64):
        super().__init__()
        if m_tokens < 1:
            raise ValidationError("need at least one timestamp token")
        self.m_tokens = m_tokens
        self.d_tau = d_tau
        in_dim = 2 + 4 * len(self.FREQUENCIES)
        self.fc1 = nn.Linear(in_dim, hidden)
        self.fc2 = nn.Linear(hidden, hidden)
        self.out = nn.Linear(hidden, m_tokens * d_tau)
        nn.init.zeros_(self.out.weight)
        nn.init.zeros_(self.out.bias)

    def featurize(self, pair: Tensor) -> Tensor:
        freqs = pair.new_tensor(self.FREQUENCIES)
        angles = 2.0 * math.pi * pair[:, :, None] * freqs  # [B, 2, F]
        waves = torch.cat([torch.sin(angles), torch.cos(angles)], dim=-1)
        return torch.cat([pair, waves.flatten(1)], dim=1)

    def forward(self, pair: Tensor) -> Tensor:
        """pair: [B, 2] with 0 <= start < end <= 1 -> tokens [B, M, d_tau]."""
        if pair.ndim != 2 or pair.shape[1] != 2:
            raise ValidationError("expected a [B, 2] (start, end) tensor")
        with torch.no_grad():
            s, e = pair[:, 0], pair[:, 1]
            if (s < 0).any() or (e > 1).any() or (s >= e).any():
                raise ValidationError("need 0 <= start < end <= 1")
        h = torch.nn.functional.silu(self.fc1(self.featurize(pair)))
        h = torch.nn.functional.silu(self.fc2(h))
        return self.out(h).view(-1, self.m_tokens, self.d_tau)


class TemporalMaskEmbedder(nn.Module):
    """Projects each latent frame's binary motion flag into the timestep
    embedding space. Zero-initialized output layer: a no-op until trained."""

    def __init__(self, d_emb: int, hidden: int = 32):
        super().__init__()
        self.fc1 = nn.Linear(1, hidden)
        self.out = nn.Linear(hidden, d_emb)
        nn.init.zeros_(self.out.weight)
        nn.init.zeros_(self.out.bias)

    def forward(self, mask: Tensor) -> Tensor:
        """mask: [B, T_latent] in {0, 1} -> [B, T_latent, d_emb]."""
        if mask.ndim != 2:
            raise ValidationError("expected a [B, T_latent] mask")
        h = torch.nn.functional.silu(self.fc1(mask.unsqueeze(-1).to(self.fc1.weight.dtype)))
        return self.out(h)


def concat_condition_tokens(timestamp_tokens: Tensor, text_tokens: Tensor) -> Tensor:
    """Timestamp tokens first, then text tokens, along the sequence axis.

    Accepts [M, d] + [L, d] or batched [B, M, d] + [B, L, d].
    """
    if timestamp_tokens.shape[-1] != text_tokens.shape[-1]:
        raise ValidationError(
            f"token dims differ: {timestamp_tokens.shape[-1]} vs {text_tokens.shape[-1]}"
        )
    if timestamp_tokens.ndim != text_tokens.ndim:
        raise ValidationError("timestamp and text tokens must have the same rank")
    return torch.cat([timestamp_tokens, text_tokens], dim=-2)


def build_temporal_mask(ann: TimestampAnnotation, t_latent: int) -> np.ndarray:
    """Binary [t_latent] vector: 1 on latent frames overlapping [t_start, t_end).

    Latent frame j covers pixel frames [j*f, (j+1)*f) with f = T / t_latent;
    any overlap with the motion interval marks the frame as moving.
    """
    if t_latent < 1:
        raise ValidationError("t_latent must be >= 1")
    if ann.total_frames % t_latent != 0:
        raise ValidationError(
            f"{ann.total_frames} pixel frames do not divide into {t_latent} latent frames"
        )
    factor = ann.total_frames // t_latent
    first = ann.t_start // factor
    last = (ann.t_end - 1) // factor
    mask = np.zeros(t_latent, dtype=np.uint8)
    mask[first : last + 1] = 1
    return mask


def build_spatial_condition(mask: MaskSequence, ann: TimestampAnnotation) -> np.ndarray:
    """Spatial mask condition: the instance mask on frames before t_start,
    zeros from t_start on. Returns a uint8 [T, H, W] array."""
    if mask.num_frames != ann.total_frames:
        raise ValidationError(
            f"mask covers {mask.num_frames} frames, annotation {ann.total_frames}"
        )
    cond = mask.masks.copy()
    cond[ann.t_start :] = 0
    return cond

"""Plug-and-play mask control branch.

A trainable copy of the first half of the denoiser blocks runs in parallel on
the same input tokens plus an embedded spatial mask condition; each copied
block feeds the corresponding main-branch block output through a
zero-initialized 1x1 linear bridge (a "zero convolution"). With the bridges
at zero the branch is invisible, so attaching it never changes the base
model's outputs before training.

Alternative injection routes (concatenating the latent mask with the noisy
latent along channels, or concatenating a first-frame mask with the reference
image) are deliberately not provided: they are poor fits for a
transformer-based denoiser, and the branch-plus-bridge form keeps the base
model untouched at initialization.
"""

from __future__ import annotations

import copy
import math

import numpy as np
import torch
from torch import Tensor, nn

from vfx.backbone import DiTConfig, LoRALinear, VideoDiT
from vfx.errors import ValidationError


def downsample_condition(cond: np.ndarray, temporal_factor: int,
                         spatial_factor: int) -> np.ndarray:
    """Max-pool a pixel-space [T, H, W] binary condition onto the latent grid:
    a latent cell is 1 iff any covered pixel is 1."""
    if cond.ndim != 3:
        raise ValidationError("expected a [T, H, W] condition")
    t, h, w = cond.shape
    if t % temporal_factor or h % spatial_factor or w % spatial_factor:
        raise ValidationError(
            f"condition shape ({t}, {h}, {w}) not divisible by factors "
            f"({temporal_factor}, {spatial_factor})"
        )
    x = cond.reshape(
        t // temporal_factor, temporal_factor,
        h // spatial_factor, spatial_factor,
        w // spatial_factor, spatial_factor,
    )
    return x.max(axis=(1, 3, 5))


class ZeroLinear(nn.Linear):
    """Linear bridge initialized to exactly zero (weight and bias)."""

    def __init__(self, dim: int):
        super().__init__(dim, dim)
        nn.init.zeros_(self.weight)
        nn.init.zeros_(self.bias)


class ControlBranch(nn.Module):
    """Copies of the first ceil(n/2) denoiser blocks plus per-block zero bridges.

    The condition embedder adds a learned projection of each token's binary
    mask cells to the branch's input tokens; the branch then mirrors the main
    stack and emits one residual per copied block.
    """

    def __init__(self, cfg: DiTConfig, source_blocks: list[nn.Module]):
        super().__init__()
        n_copy = math.ceil(len(source_blocks) / 2)
        copies = []
        for block in source_blocks[:n_copy]:
            clone = copy.deepcopy(block)
            # The branch copies plain weights only; adapters stay main-branch.
            for owner in clone.modules():
                for name, child in list(owner.named_children()):
                    if isinstance(child, LoRALinear):
                        setattr(owner, name, child.base)
            copies.append(clone)
        self.blocks = nn.ModuleList(copies)
        self.bridges = nn.ModuleList(ZeroLinear(cfg.d_model) for _ in copies)
        cells_per_token = cfg.patch_size * cfg.patch_size
        self.cond_embed = nn.Linear(cells_per_token, cfg.d_model)
        self.cfg = cfg

    def forward(self, tokens: Tensor, spatial: Tensor, cond_frames: Tensor,
                cond_tokens: Tensor, rope, tokens_per_frame: int) -> list[Tensor]:
        """Returns one residual tensor per copied block.

        spatial: [B, T_lat, H_lat, W_lat] binary condition on the latent grid.
        """
        cfg = self.cfg
        expect = (tokens.shape[0], cfg.latent_frames, cfg.latent_height, cfg.latent_width)
        if tuple(spatial.shape) != expect:
            raise ValidationError(
                f"spatial condition shape {tuple(spatial.shape)} != expected {expect}"
            )
        cond_cells = self._patchify_condition(spatial.to(tokens.dtype))
        h = tokens + self.cond_embed(cond_cells)
        residuals = []
        for block, bridge in zip(self.blocks, self.bridges):
            h = block(h, cond_frames, cond_tokens, rope, tokens_per_frame)
            residuals.append(bridge(h))
        return residuals

    def _patchify_condition(self, spatial: Tensor) -> Tensor:
        b = spatial.shape[0]
        t, hp, wp = self.cfg.grid
        p = self.cfg.patch_size
        x = spatial.view(b, t, hp, p, wp, p)
        x = x.permute(0, 1, 2, 4, 3, 5)
        return x.reshape(b, t * hp * wp, p * p)


def attach_control(model: VideoDiT) -> VideoDiT:
    """Attach a mask control branch copied from the model's current blocks."""
    if model.control is not None:
        raise ValidationError("control branch already attached")
    model.control = ControlBranch(model.cfg, list(model.blocks))
    return model


def detach_control(model: VideoDiT) -> VideoDiT:
    model.control = None
    return model

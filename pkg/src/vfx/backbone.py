"""Toy video diffusion transformer.

The latent codec stands in for a learned video autoencoder: encoding is
block-average pooling over (temporal, spatial, spatial) factors, decoding is
nearest-neighbor upsampling. The denoiser is a stack of transformer blocks
over patchified latent tokens with:

  * adaptive layer normalization driven by the diffusion-timestep embedding
    (optionally shifted per latent frame by a temporal-mask embedding),
  * self-attention with separable 3D rotary position encoding over the
    (frame, row, column) token grid,
  * cross-attention whose keys/values come from the condition token sequence
    (timestamp tokens, when present, followed by text tokens),
  * a pointwise MLP.

A reference image conditions generation through a zero-initialized, trainable
projection of its latent, added to the input tokens. LoRA adapters can wrap
any attention projection; a mask-control branch can be attached on top (see
vfx.spatial_control). With LoRA factors at zero and every zero-initialized
head untouched, the adapted forward equals the base forward exactly.

Single-writer contract: forward is pure given parameters and safe to call
concurrently; only the trainer mutates parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import Tensor, nn

from vfx.dataset.types import VideoClip
from vfx.errors import NumericsError, ValidationError


# ---------------------------------------------------------------------------
# Latent codec
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class LatentCodec:
    """Block-average encoder / nearest-neighbor decoder.

    encode: [T, H, W, C] -> [T/f_t, H/f_s, W/f_s, C]; requires divisibility.
    decode(encode(x)) reproduces x exactly when x is constant on codec blocks.
    """

    temporal_factor: int = 4
    spatial_factor: int = 8

    def __post_init__(self):
        if self.temporal_factor < 1 or self.spatial_factor < 1:
            raise ValidationError("codec factors must be >= 1")

    def _check(self, t: int, h: int, w: int) -> None:
        if t % self.temporal_factor or h % self.spatial_factor or w % self.spatial_factor:
            raise ValidationError(
                f"shape ({t}, {h}, {w}) not divisible by codec factors "
                f"({self.temporal_factor}, {self.spatial_factor}, {self.spatial_factor})"
            )

    def encode(self, frames: np.ndarray) -> np.ndarray:
        if frames.ndim != 4:
            raise ValidationError("expected a [T, H, W, C] array")
        t, h, w, c = frames.shape
        self._check(t, h, w)
        ft, fs = self.temporal_factor, self.spatial_factor
        x = frames.reshape(t // ft, ft, h // fs, fs, w // fs, fs, c)
        return x.mean(axis=(1, 3, 5), dtype=np.float64).astype(np.float32)

    def encode_clip(self, clip: VideoClip) -> np.ndarray:
        return self.encode(clip.frames)

    def encode_image(self, image: np.ndarray) -> np.ndarray:
        """Spatial-only pooling of an [H, W, C] image to the latent grid."""
        if image.ndim != 3:
            raise ValidationError("expected an [H, W, C] image")
        h, w, c = image.shape
        fs = self.spatial_factor
        if h % fs or w % fs:
            raise ValidationError(f"image dims ({h}, {w}) not divisible by {fs}")
        x = image.reshape(h // fs, fs, w // fs, fs, c)
        return x.mean(axis=(1, 3), dtype=np.float64).astype(np.float32)

    def decode(self, latent: np.ndarray) -> np.ndarray:
        if latent.ndim != 4:
            raise ValidationError("expected a [T', H', W', C] latent")
        ft, fs = self.temporal_factor, self.spatial_factor
        x = np.repeat(latent, ft, axis=0)
        x = np.repeat(x, fs, axis=1)
        return np.repeat(x, fs, axis=2)


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class DiTConfig:
    d_model: int = 128
    n_blocks: int = 4
    n_heads: int = 4
    d_tau: int = 64
    patch_size: int = 2
    latent_frames: int = 12
    latent_height: int = 8
    latent_width: int = 8
    channels: int = 3
    use_rope: bool = True
    mlp_ratio: float = 4.0
    d_cond: int = 0  # 0 -> d_model
    timestamp_tokens: int = 4
    timestamp_hidden: int = 64
    mask_embed_hidden: int = 32

    def __post_init__(self):
        if self.d_model % self.n_heads:
            raise ValidationError("d_model must be divisible by n_heads")
        if (self.d_model // self.n_heads) % 2:
            raise ValidationError("head dim must be even (rotary pairs)")
        if self.latent_height % self.patch_size or self.latent_width % self.patch_size:
            raise ValidationError("latent dims must be divisible by patch_size")

    @property
    def cond_dim(self) -> int:
        return self.d_cond or self.d_model

    @property
    def head_dim(self) -> int:
        return self.d_model // self.n_heads

    @property
    def grid(self) -> tuple[int, int, int]:
        return (
            self.latent_frames,
            self.latent_height // self.patch_size,
            self.latent_width // self.patch_size,
        )

    @property
    def n_tokens(self) -> int:
        t, h, w = self.grid
        return t * h * w

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


# ---------------------------------------------------------------------------
# Rotary position encoding over the (frame, row, column) grid
# ---------------------------------------------------------------------------
def rope_angles(grid: tuple[int, int, int], head_dim: int, base: float = 10000.0) -> Tensor:
    """Per-token rotation angles [N, head_dim/2].

    Feature pairs are split across the three axes (the frame axis takes any
    remainder); each axis uses standard geometric frequencies over its index.
    """
    n_pairs = head_dim // 2
    pairs_h = pairs_w = n_pairs // 3
    pairs_t = n_pairs - pairs_h - pairs_w
    tt, hh, ww = grid
    idx_t, idx_h, idx_w = np.meshgrid(
        np.arange(tt), np.arange(hh), np.arange(ww), indexing="ij"
    )
    parts = []
    for pos, pairs in ((idx_t, pairs_t), (idx_h, pairs_h), (idx_w, pairs_w)):
        if pairs == 0:
            continue
        freqs = base ** (-np.arange(pairs) / pairs)
        parts.append(pos.reshape(-1, 1) * freqs[None, :])
    angles = np.concatenate(parts, axis=1)
    return torch.from_numpy(angles.astype(np.float32))


def apply_rope(x: Tensor, cos: Tensor, sin: Tensor) -> Tensor:
    """Rotate feature pairs of x [B, heads, N, head_dim] by per-token angles."""
    x1, x2 = x.reshape(*x.shape[:-1], -1, 2).unbind(-1)
    out = torch.stack([x1 * cos - x2 * sin, x1 * sin + x2 * cos], dim=-1)
    return out.reshape(x.shape)


# ---------------------------------------------------------------------------
# LoRA
# ---------------------------------------------------------------------------
class LoRALinear(nn.Module):
    """A frozen linear layer plus a trainable low-rank residual.

    The effective weight is W + alpha * A @ B^T with A [out, rank] and
    B [in, rank]; B starts at zero, so the wrapped layer initially computes
    exactly what the base layer does.
    """

    def __init__(self, base: nn.Linear, rank: int, alpha: float = 1.0):
        super().__init__()
        out_dim, in_dim = base.weight.shape
        if not 0 < rank < min(out_dim, in_dim):
            raise ValidationError(
                f"rank must satisfy 0 < rank < min({out_dim}, {in_dim}), got {rank}"
            )
        self.base = base
        self.rank = rank
        self.alpha = alpha
        factory = {"dtype": base.weight.dtype, "device": base.weight.device}
        self.lora_a = nn.Parameter(torch.randn(out_dim, rank, **factory) / math.sqrt(rank))
        self.lora_b = nn.Parameter(torch.zeros(in_dim, rank, **factory))

    def forward(self, x: Tensor) -> Tensor:
        return self.base(x) + self.alpha * ((x @ self.lora_b) @ self.lora_a.T)

    def effective_weight(self) -> Tensor:
        return self.base.weight + self.alpha * self.lora_a @ self.lora_b.T

    def added_parameters(self) -> int:
        return self.lora_a.numel() + self.lora_b.numel()


ATTENTION_TARGETS = ("q", "k", "v", "out")
MLP_TARGETS = ("mlp_in", "mlp_out")
LORA_TARGETS = ATTENTION_TARGETS  # default injection points


def _lora_sites(model: "VideoDiT", targets: tuple[str, ...]):
    """Yield (owner module, attribute name) for every requested injection point."""
    for block in model.blocks:
        for attn in (block.self_attn, block.cross_attn):
            for name in ATTENTION_TARGETS:
                if name in targets:
                    yield attn, name
        if "mlp_in" in targets:
            yield block.mlp, "0"
        if "mlp_out" in targets:
            yield block.mlp, "2"


def attach_lora(
    model: "VideoDiT",
    targets: tuple[str, ...] = LORA_TARGETS,
    rank: int = 8,
    alpha: float = 1.0,
    freeze_base: bool = True,
    generator: torch.Generator | None = None,
) -> "VideoDiT":
    """Wrap the targeted projections with low-rank adapters, in place.

    Targets: attention projections q/k/v/out (default) and optionally the
    block MLP layers mlp_in/mlp_out. Base weights are frozen (only the
    adapter factors stay trainable) unless freeze_base is False.
    """
    known = ATTENTION_TARGETS + MLP_TARGETS
    for t in targets:
        if t not in known:
            raise ValidationError(f"unknown LoRA target {t!r}; expected one of {known}")
    if model.lora_config is not None:
        raise ValidationError("LoRA adapters are already attached")
    for owner, name in _lora_sites(model, tuple(targets)):
        base = getattr(owner, name)
        wrapped = LoRALinear(base, rank=rank, alpha=alpha)
        if generator is not None:
            with torch.no_grad():
                wrapped.lora_a.copy_(
                    torch.randn(wrapped.lora_a.shape, generator=generator,
                                dtype=wrapped.lora_a.dtype) / math.sqrt(rank)
                )
        setattr(owner, name, wrapped)
    if freeze_base:
        for p_name, param in model.named_parameters():
            param.requires_grad_("lora_a" in p_name or "lora_b" in p_name)
    model.lora_config = {"targets": tuple(targets), "rank": rank, "alpha": alpha}
    return model


def detach_lora(model: "VideoDiT") -> "VideoDiT":
    """Remove adapters, restoring the original projection modules in place."""
    for owner, name in _lora_sites(model, ATTENTION_TARGETS + MLP_TARGETS):
        layer = getattr(owner, name)
        if isinstance(layer, LoRALinear):
            setattr(owner, name, layer.base)
    for param in model.parameters():
        param.requires_grad_(True)
    model.lora_config = None
    return model


def lora_parameter_count(model: "VideoDiT") -> int:
    return sum(
        m.added_parameters() for m in model.modules() if isinstance(m, LoRALinear)
    )


# ---------------------------------------------------------------------------
# Attention
# ---------------------------------------------------------------------------
class SelfAttention(nn.Module):
    def __init__(self, d_model: int, n_heads: int):
        super().__init__()
        self.n_heads = n_heads
        self.head_dim = d_model // n_heads
        self.q = nn.Linear(d_model, d_model)
        self.k = nn.Linear(d_model, d_model, bias=False)
        self.v = nn.Linear(d_model, d_model, bias=False)
        self.out = nn.Linear(d_model, d_model)

    def forward(self, x: Tensor, rope: tuple[Tensor, Tensor] | None = None,
                need_weights: bool = False):
        b, n, d = x.shape
        q = self.q(x).view(b, n, self.n_heads, self.head_dim).transpose(1, 2)
        k = self.k(x).view(b, n, self.n_heads, self.head_dim).transpose(1, 2)
        v = self.v(x).view(b, n, self.n_heads, self.head_dim).transpose(1, 2)
        if rope is not None:
            cos, sin = rope
            q = apply_rope(q, cos, sin)
            k = apply_rope(k, cos, sin)
        attn = torch.softmax(q @ k.transpose(-2, -1) / math.sqrt(self.head_dim), dim=-1)
        y = (attn @ v).transpose(1, 2).reshape(b, n, d)
        y = self.out(y)
        if need_weights:
            return y, attn
        return y


class CrossAttention(nn.Module):
    """Queries from latent tokens, keys/values from condition tokens.

    Condition tokens are layer-normalized first, which pins every token
    source (text, timestamp) to one scale: without it, trained text-token
    logits can sit so far above a fresh zero-initialized token's logit that
    the new token's softmax weight underflows to exactly zero and no gradient
    ever reaches its encoder. A zero token stays exactly zero under the norm,
    and the key/value projections carry no bias, so an all-zero condition
    token still contributes zero logits and a zero value vector.
    """

    def __init__(self, d_model: int, d_tau: int, n_heads: int):
        super().__init__()
        self.n_heads = n_heads
        self.head_dim = d_model // n_heads
        self.token_norm = nn.LayerNorm(d_tau)
        self.q = nn.Linear(d_model, d_model)
        self.k = nn.Linear(d_tau, d_model, bias=False)
        self.v = nn.Linear(d_tau, d_model, bias=False)
        self.out = nn.Linear(d_model, d_model)

    def forward(self, x: Tensor, cond_tokens: Tensor, need_weights: bool = False):
        b, n, d = x.shape
        if cond_tokens.ndim == 2:
            cond_tokens = cond_tokens.unsqueeze(0).expand(b, -1, -1)
        cond_tokens = self.token_norm(cond_tokens)
        m = cond_tokens.shape[1]
        q = self.q(x).view(b, n, self.n_heads, self.head_dim).transpose(1, 2)
        k = self.k(cond_tokens).view(b, m, self.n_heads, self.head_dim).transpose(1, 2)
        v = self.v(cond_tokens).view(b, m, self.n_heads, self.head_dim).transpose(1, 2)
        attn = torch.softmax(q @ k.transpose(-2, -1) / math.sqrt(self.head_dim), dim=-1)
        y = (attn @ v).transpose(1, 2).reshape(b, n, d)
        y = self.out(y)
        if need_weights:
            return y, attn
        return y


# ---------------------------------------------------------------------------
# Transformer block
# ---------------------------------------------------------------------------
class DiTBlock(nn.Module):
    """adaLN(self-attention) -> cross-attention -> adaLN(MLP), all residual.

    The modulation (shift/scale/gate for the attention and MLP branches) is
    produced per latent frame from the conditioning embedding and broadcast
    over that frame's spatial tokens.
    """

    def __init__(self, d_model: int, n_heads: int, d_cond: int, d_tau: int,
                 mlp_ratio: float = 4.0):
        super().__init__()
        self.norm1 = nn.LayerNorm(d_model, elementwise_affine=False)
        self.self_attn = SelfAttention(d_model, n_heads)
        self.norm_cross = nn.LayerNorm(d_model)
        self.cross_attn = CrossAttention(d_model, d_tau, n_heads)
        self.norm2 = nn.LayerNorm(d_model, elementwise_affine=False)
        hidden = int(d_model * mlp_ratio)
        self.mlp = nn.Sequential(
            nn.Linear(d_model, hidden), nn.GELU(), nn.Linear(hidden, d_model)
        )
        self.modulation = nn.Linear(d_cond, 6 * d_model)
        nn.init.normal_(self.modulation.weight, std=0.02)
        nn.init.zeros_(self.modulation.bias)

    def forward(self, x: Tensor, cond_frames: Tensor, cond_tokens: Tensor,
                rope: tuple[Tensor, Tensor] | None, tokens_per_frame: int) -> Tensor:
        # cond_frames: [B, T_lat, d_cond] -> per-token modulation.
        mod = self.modulation(cond_frames)
        mod = mod.repeat_interleave(tokens_per_frame, dim=1)  # [B, N, 6d]
        shift1, scale1, gate1, shift2, scale2, gate2 = mod.chunk(6, dim=-1)

        h = self.norm1(x) * (1 + scale1) + shift1
        x = x + gate1 * self.self_attn(h, rope)
        x = x + self.cross_attn(self.norm_cross(x), cond_tokens)
        h = self.norm2(x) * (1 + scale2) + shift2
        x = x + gate2 * self.mlp(h)
        return x


# ---------------------------------------------------------------------------
# Condition bundle
# ---------------------------------------------------------------------------
@dataclass
class ConditionBundle:
    """Everything the denoiser consumes per step besides the noisy latent.

    Exactly one of timestamp_pair / temporal_mask may be set (one temporal
    strategy at a time); spatial is required only when a control branch is
    attached.
    """

    text_tokens: Tensor
    ref_latent: Tensor
    timestamp_pair: Tensor | None = None
    temporal_mask: Tensor | None = None
    spatial: Tensor | None = None

    def __post_init__(self):
        if self.timestamp_pair is not None and self.temporal_mask is not None:
            raise ValidationError("at most one temporal strategy may be active")


# ---------------------------------------------------------------------------
# Denoiser
# ---------------------------------------------------------------------------
def timestep_embedding(steps: Tensor, dim: int) -> Tensor:
    """Sinusoidal embedding of (integer) diffusion steps: [B] -> [B, dim]."""
    half = dim // 2
    freqs = torch.exp(
        -math.log(10000.0) * torch.arange(half, dtype=torch.float64) / half
    ).to(steps.device)
    args = steps.to(torch.float64)[:, None] * freqs[None, :]
    emb = torch.cat([torch.sin(args), torch.cos(args)], dim=-1)
    if dim % 2:
        emb = torch.nn.functional.pad(emb, (0, 1))
    return emb


STRATEGIES = ("none", "timestamp_tokens", "temporal_mask")


class VideoDiT(nn.Module):
    """The full toy denoiser: patchifier, block stack, output head, and any
    attached conditioning heads / adapters."""

    def __init__(self, cfg: DiTConfig, strategy: str = "none"):
        super().__init__()
        if strategy not in STRATEGIES:
            raise ValidationError(f"unknown temporal strategy {strategy!r}")
        self.cfg = cfg
        self.strategy = strategy
        self.lora_config: dict | None = None

        p, c = cfg.patch_size, cfg.channels
        patch_dim = p * p * c
        self.patch_proj = nn.Linear(patch_dim, cfg.d_model)
        # Reference-image pathway: zero-initialized so the reference is
        # invisible to the base model until trained.
        self.ref_proj = nn.Linear(patch_dim, cfg.d_model, bias=False)
        nn.init.zeros_(self.ref_proj.weight)

        self.time_mlp = nn.Sequential(
            nn.Linear(cfg.d_model, cfg.cond_dim),
            nn.SiLU(),
            nn.Linear(cfg.cond_dim, cfg.cond_dim),
        )
        self.blocks = nn.ModuleList(
            DiTBlock(cfg.d_model, cfg.n_heads, cfg.cond_dim, cfg.d_tau, cfg.mlp_ratio)
            for _ in range(cfg.n_blocks)
        )
        self.out_norm = nn.LayerNorm(cfg.d_model)
        self.out_proj = nn.Linear(cfg.d_model, patch_dim)

        from vfx.conditioning import TemporalMaskEmbedder, TimestampTokenEncoder

        if strategy == "timestamp_tokens":
            self.timestamp_encoder = TimestampTokenEncoder(
                cfg.timestamp_tokens, cfg.d_tau, cfg.timestamp_hidden
            )
        elif strategy == "temporal_mask":
            self.mask_embedder = TemporalMaskEmbedder(cfg.cond_dim, cfg.mask_embed_hidden)
        self.control = None
        # Mean |residual| of the control taps from the latest forward; stays
        # exactly 0.0 until the zero bridges move (logged during training).
        self.last_control_residual = 0.0

        angles = rope_angles(cfg.grid, cfg.head_dim)
        self.register_buffer("rope_cos", torch.cos(angles), persistent=False)
        self.register_buffer("rope_sin", torch.sin(angles), persistent=False)
        # Absolute frame-position term for the per-frame modulation: rotary
        # phases are purely relative, but expressing "motion during [s, e)"
        # needs each frame's absolute index.
        frame_pos = timestep_embedding(
            torch.arange(cfg.latent_frames), cfg.cond_dim
        ).to(torch.float32)
        self.register_buffer("frame_pos", frame_pos, persistent=False)

    # -- token plumbing -----------------------------------------------------
    def patchify(self, x: Tensor) -> Tensor:
        """[B, T, H, W, C] -> [B, N, p*p*C] over the (frame, row, col) grid."""
        b = x.shape[0]
        t, hp, wp = self.cfg.grid
        p, c = self.cfg.patch_size, x.shape[-1]
        x = x.view(b, t, hp, p, wp, p, c)
        x = x.permute(0, 1, 2, 4, 3, 5, 6)
        return x.reshape(b, t * hp * wp, p * p * c)

    def unpatchify(self, tokens: Tensor) -> Tensor:
        b = tokens.shape[0]
        t, hp, wp = self.cfg.grid
        p, c = self.cfg.patch_size, self.cfg.channels
        x = tokens.view(b, t, hp, wp, p, p, c)
        x = x.permute(0, 1, 2, 4, 3, 5, 6)
        return x.reshape(b, t, hp * p, wp * p, c)

    def condition_tokens(self, cond: ConditionBundle) -> Tensor:
        """Assemble the cross-attention key/value sequence for this model."""
        from vfx.conditioning import concat_condition_tokens

        text = cond.text_tokens
        if text.ndim == 2:
            text = text.unsqueeze(0)
        if self.strategy == "timestamp_tokens":
            if cond.timestamp_pair is None:
                raise ValidationError("model expects a timestamp pair in the bundle")
            ts = self.timestamp_encoder(cond.timestamp_pair.to(text.dtype))
            return concat_condition_tokens(ts, text.expand(ts.shape[0], -1, -1))
        return text

    def _validate_bundle(self, cond: ConditionBundle, batch: int) -> None:
        if self.strategy != "timestamp_tokens" and cond.timestamp_pair is not None:
            raise ValidationError(f"strategy {self.strategy!r} takes no timestamp pair")
        if self.strategy == "temporal_mask" and cond.temporal_mask is None:
            raise ValidationError("model expects a temporal mask in the bundle")
        if self.strategy != "temporal_mask" and cond.temporal_mask is not None:
            raise ValidationError(f"strategy {self.strategy!r} takes no temporal mask")
        if self.control is not None and cond.spatial is None:
            raise ValidationError("control branch attached but no spatial condition given")
        if cond.ref_latent.shape[0] != batch:
            raise ValidationError("reference latent batch size mismatch")

    def forward(self, noisy: Tensor, steps: Tensor, cond: ConditionBundle) -> Tensor:
        """Network output for a noisy latent: the velocity-mixed target.

        noisy: [B, T_lat, H_lat, W_lat, C]; steps: [B] integer diffusion steps;
        returns a tensor shaped like `noisy`. The raw head predicts the
        velocity mix sqrt(a)*eps - sqrt(1-a)*x0, which keeps clean-content
        structure at unit weight even at high noise;
        vfx.diffusion_engine.predict_noise converts it to predicted noise.
        """
        cfg = self.cfg
        b = noisy.shape[0]
        expect = (b, cfg.latent_frames, cfg.latent_height, cfg.latent_width, cfg.channels)
        if tuple(noisy.shape) != expect:
            raise ValidationError(f"latent shape {tuple(noisy.shape)} != expected {expect}")
        if (steps < 0).any():
            raise ValidationError("diffusion steps must be non-negative")
        self._validate_bundle(cond, b)

        ref = cond.ref_latent.to(noisy.dtype)  # [B, H_lat, W_lat, C]
        ref_frames = ref[:, None].expand(-1, cfg.latent_frames, -1, -1, -1)
        tokens = self.patch_proj(self.patchify(noisy)) + self.ref_proj(
            self.patchify(ref_frames)
        )

        t_emb = self.time_mlp(timestep_embedding(steps, cfg.d_model).to(noisy.dtype))
        cond_frames = t_emb[:, None, :] + self.frame_pos[None, :, :].to(noisy.dtype)
        if self.strategy == "temporal_mask":
            cond_frames = cond_frames + self.mask_embedder(cond.temporal_mask)

        cond_tokens = self.condition_tokens(cond)
        rope = (self.rope_cos, self.rope_sin) if cfg.use_rope else None
        tokens_per_frame = self.cfg.grid[1] * self.cfg.grid[2]

        taps = None
        if self.control is not None:
            taps = self.control(
                tokens, cond.spatial, cond_frames, cond_tokens, rope, tokens_per_frame
            )
            with torch.no_grad():
                self.last_control_residual = float(
                    torch.stack([t.abs().mean() for t in taps]).mean()
                )

        h = tokens
        for i, block in enumerate(self.blocks):
            h = block(h, cond_frames, cond_tokens, rope, tokens_per_frame)
            if taps is not None and i < len(taps):
                h = h + taps[i]

        out = self.unpatchify(self.out_proj(self.out_norm(h)))
        if not torch.isfinite(out).all():
            raise NumericsError("non-finite activations in denoiser output")
        return out

    # -- bookkeeping ----------------------------------------------------------
    def parameter_summary(self) -> dict:
        total = trainable = 0
        for p in self.parameters():
            total += p.numel()
            trainable += p.numel() if p.requires_grad else 0
        return {"total": total, "trainable": trainable, "frozen": total - trainable}

"""Noise schedule, training loop, and sampler.

The diffusion state is the reference-residual latent: the encoded clip minus
the encoded reference image (broadcast over latent frames). Static content is
exactly zero there, so a sample's motionless frames collapse onto the
reference and the denoiser's capacity goes into modeling what moves and when.
Decoding adds the reference latent back before upsampling.

Training follows the adapter regime: the (optionally pretrained) backbone is
frozen and only LoRA factors, conditioning heads, the reference-image
projection, and any control branch receive gradients. The network predicts
the velocity mix sqrt(a)*eps - sqrt(1-a)*x0 under a cosine signal schedule
and trains with mean squared error against it; `predict_noise` converts the
output exactly to predicted noise. The velocity target keeps clean-latent
structure (where the control signals live) at unit weight across noise
levels, which a plain noise target scales down by sqrt(alpha_bar) at exactly
the steps where generation commits to them. The optimizer is AdamW with
linear warmup and cosine decay. Everything is deterministic given (seed,
config, data): batch order, noise draws, and parameter updates all derive
from the config seed.

Sampling is a deterministic DDIM-style loop over an evenly spaced subset of
the training steps, conditioned on a reference image (injected through the
zero-initialized reference projection), text, and the configured temporal /
spatial control signals. Sampling jobs are independent and safe to run in
parallel; the training loop is the single writer of model parameters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import torch

from vfx.backbone import ConditionBundle, DiTConfig, LatentCodec, VideoDiT, attach_lora
from vfx.conditioning import build_spatial_condition, build_temporal_mask, encode_text
from vfx.dataset.augment import shift_motion_segment
from vfx.dataset.manifest import load_clip, load_mask
from vfx.dataset.types import (
    DatasetManifest,
    MaskSequence,
    TimestampAnnotation,
    VideoClip,
)
from vfx.errors import NumericsError, ValidationError
from vfx.spatial_control import attach_control, downsample_condition

TEMPORAL_STRATEGIES = ("none", "timestamp_tokens", "temporal_mask")


# ---------------------------------------------------------------------------
# Noise schedule
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class NoiseSchedule:
    """Cumulative signal coefficients alpha_bar[t], strictly decreasing over t."""

    alpha_bar: np.ndarray

    def __post_init__(self):
        ab = self.alpha_bar
        if ab.ndim != 1 or ab.size < 1:
            raise ValidationError("alpha_bar must be a 1-D array")
        if (np.diff(ab) >= 0).any():
            raise ValidationError("alpha_bar must be strictly decreasing")
        if ab[0] > 1.0 or ab[-1] < 0.0:
            raise ValidationError("alpha_bar must lie in (0, 1]")

    def __len__(self) -> int:
        return self.alpha_bar.size

    @staticmethod
    def cosine(n_steps: int = 1000, offset: float = 0.008) -> "NoiseSchedule":
        t = (np.arange(1, n_steps + 1) / n_steps + offset) / (1.0 + offset)
        ab = np.cos(t * np.pi / 2.0) ** 2
        ab = ab / (np.cos((offset / (1.0 + offset)) * np.pi / 2.0) ** 2)
        ab = np.clip(ab, 1e-8, 1.0 - 1e-8)
        # The clip floor can flatten the tail; restore strict monotonicity.
        for i in range(1, n_steps):
            if ab[i] >= ab[i - 1]:
                ab[i] = ab[i - 1] * (1.0 - 1e-9)
        return NoiseSchedule(alpha_bar=ab)

    def snr(self) -> np.ndarray:
        return self.alpha_bar / (1.0 - self.alpha_bar)


def _signal_coeff(schedule: NoiseSchedule, t: torch.Tensor, like: torch.Tensor) -> torch.Tensor:
    ab = torch.from_numpy(schedule.alpha_bar).to(like.dtype)
    return ab[t].view(-1, *([1] * (like.ndim - 1)))


def add_noise(schedule: NoiseSchedule, x0: torch.Tensor, t: torch.Tensor,
              eps: torch.Tensor) -> torch.Tensor:
    """x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps."""
    if eps.shape != x0.shape:
        raise ValidationError("noise must match the latent shape")
    at = _signal_coeff(schedule, t, x0)
    return torch.sqrt(at) * x0 + torch.sqrt(1.0 - at) * eps


def velocity_target(schedule: NoiseSchedule, x0: torch.Tensor, t: torch.Tensor,
                    eps: torch.Tensor) -> torch.Tensor:
    """v_t = sqrt(alpha_bar_t) * eps - sqrt(1 - alpha_bar_t) * x0."""
    at = _signal_coeff(schedule, t, x0)
    return torch.sqrt(at) * eps - torch.sqrt(1.0 - at) * x0


def predict_noise(model: VideoDiT, schedule: NoiseSchedule, noisy: torch.Tensor,
                  t: torch.Tensor, cond: ConditionBundle) -> torch.Tensor:
    """Predicted noise for a noisy latent (exact conversion of the network's
    velocity output): eps_hat = sqrt(1-a)*x_t + sqrt(a)*v_hat."""
    at = _signal_coeff(schedule, t, noisy)
    v_hat = model(noisy, t, cond)
    return torch.sqrt(1.0 - at) * noisy + torch.sqrt(at) * v_hat


def sampling_step_indices(n_train_steps: int, n_sample_steps: int) -> list[int]:
    """Evenly spaced descending subset of [0, n_train_steps)."""
    if not 1 <= n_sample_steps <= n_train_steps:
        raise ValidationError("sample step count must be in [1, train steps]")
    idx = np.unique(np.round(np.linspace(0, n_train_steps - 1, n_sample_steps)).astype(int))
    return list(idx[::-1])


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TrainConfig:
    """Everything a training run needs; serializes 1:1 to the CLI JSON config."""

    # data geometry
    frames: int = 24
    height: int = 32
    width: int = 32
    channels: int = 3
    fps: int = 8
    temporal_factor: int = 2
    spatial_factor: int = 8
    # model
    d_model: int = 96
    n_blocks: int = 4
    n_heads: int = 4
    d_tau: int = 48
    patch_size: int = 1
    use_rope: bool = True
    mlp_ratio: float = 4.0
    timestamp_tokens: int = 4
    text_length: int = 8
    # adapters
    temporal_strategy: str = "timestamp_tokens"
    spatial_control: bool = False
    lora_rank: int = 8
    lora_alpha: float = 1.0
    lora_targets: tuple[str, ...] = ("q", "k", "v", "out")
    # optimization
    learning_rate: float = 1e-4
    steps: int = 3000
    warmup_steps: int = 100
    decay: str = "cosine"
    final_lr_scale: float = 0.1
    # Conditioning heads sit behind zero-initialized layers and deep frozen
    # paths; a higher relative learning rate keeps them from stalling.
    head_lr_scale: float = 1.0
    # Fraction of each batch whose diffusion step is drawn from the top 40%
    # of the schedule, where the condition is the only timing signal.
    high_noise_fraction: float = 0.0
    # Optional extra per-step loss weight w_t = min(1/snr_t, max), pushing the
    # objective toward clean-latent-space error beyond what the velocity
    # target already provides. 0 (default) disables it.
    loss_snr_weight_max: float = 0.0
    batch_size: int = 4
    weight_decay: float = 0.01
    noise_steps: int = 1000
    sample_steps: int = 50
    sample_eta: float = 1.0
    seed: int = 0
    category: str | None = None
    augment: bool = True
    # Base-network handling: `train_base=True` trains every parameter (used to
    # pretrain the toy stand-in for a released video backbone); otherwise the
    # base stays frozen and only adapters learn. `base_checkpoint` seeds the
    # base weights from a previous (typically train_base) run.
    train_base: bool = False
    base_checkpoint: str | None = None

    def __post_init__(self):
        if self.temporal_strategy not in TEMPORAL_STRATEGIES:
            raise ValidationError(
                f"temporal_strategy must be one of {TEMPORAL_STRATEGIES}"
            )
        if self.decay not in ("cosine", "constant"):
            raise ValidationError("decay must be 'cosine' or 'constant'")
        for name in ("frames", "height", "width", "learning_rate", "steps",
                     "batch_size", "noise_steps", "sample_steps", "fps"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if not 0.0 <= self.high_noise_fraction <= 1.0:
            raise ValidationError("high_noise_fraction must lie in [0, 1]")
        if self.head_lr_scale <= 0:
            raise ValidationError("head_lr_scale must be positive")
        if self.frames % self.temporal_factor:
            raise ValidationError("frames must divide by the temporal factor")
        if self.height % self.spatial_factor or self.width % self.spatial_factor:
            raise ValidationError("height/width must divide by the spatial factor")

    @property
    def latent_frames(self) -> int:
        return self.frames // self.temporal_factor

    @property
    def latent_height(self) -> int:
        return self.height // self.spatial_factor

    @property
    def latent_width(self) -> int:
        return self.width // self.spatial_factor

    def codec(self) -> LatentCodec:
        return LatentCodec(self.temporal_factor, self.spatial_factor)

    def dit_config(self) -> DiTConfig:
        return DiTConfig(
            d_model=self.d_model,
            n_blocks=self.n_blocks,
            n_heads=self.n_heads,
            d_tau=self.d_tau,
            patch_size=self.patch_size,
            latent_frames=self.latent_frames,
            latent_height=self.latent_height,
            latent_width=self.latent_width,
            channels=self.channels,
            use_rope=self.use_rope,
            mlp_ratio=self.mlp_ratio,
            timestamp_tokens=self.timestamp_tokens,
        )

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["lora_targets"] = list(self.lora_targets)
        return out

    @staticmethod
    def from_dict(data: dict) -> "TrainConfig":
        unknown = set(data) - set(TrainConfig.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown train config key(s): {sorted(unknown)}")
        if "lora_targets" in data:
            data = dict(data, lora_targets=tuple(data["lora_targets"]))
        return TrainConfig(**data)


TRAINABLE_PREFIXES = ("timestamp_encoder.", "mask_embedder.", "ref_proj.", "control.")


def configure_trainable(model: VideoDiT, train_base: bool = False) -> VideoDiT:
    """Freeze the base network; adapters and conditioning heads stay trainable.

    With train_base=True nothing is frozen (base pretraining mode)."""
    for name, param in model.named_parameters():
        adapter = ("lora_a" in name or "lora_b" in name
                   or name.startswith(TRAINABLE_PREFIXES))
        param.requires_grad_(train_base or adapter)
    return model


def build_model(cfg: TrainConfig) -> VideoDiT:
    """Deterministically construct the model a config describes.

    Base weights come from `base_checkpoint` when given (the pretrained toy
    backbone); the control branch is copied from those weights, then LoRA is
    attached, then the freeze policy is applied.
    """
    torch.manual_seed(cfg.seed)
    model = VideoDiT(cfg.dit_config(), strategy=cfg.temporal_strategy)
    if cfg.base_checkpoint is not None:
        from vfx.checkpoint import load_checkpoint

        base, _ = load_checkpoint(cfg.base_checkpoint)
        if base.cfg != model.cfg:
            raise ValidationError(
                "base checkpoint geometry does not match this config"
            )
        base_state = base.state_dict()
        own_state = model.state_dict()
        merged = {k: base_state.get(k, v) for k, v in own_state.items()}
        model.load_state_dict(merged)
    if cfg.spatial_control:
        attach_control(model)
    if cfg.lora_rank > 0:
        attach_lora(model, targets=cfg.lora_targets, rank=cfg.lora_rank,
                    alpha=cfg.lora_alpha, freeze_base=False)
    return configure_trainable(model, train_base=cfg.train_base)


# ---------------------------------------------------------------------------
# Training data
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TrainingItem:
    clip: VideoClip
    annotation: TimestampAnnotation
    prompt: str
    category: str
    mask: MaskSequence | None = None


def items_from_manifest(manifest: DatasetManifest,
                        category: str | None = None) -> list[TrainingItem]:
    items = []
    for rec in manifest.filter_category(category).records:
        clip = load_clip(rec.clip_path, fps=rec.fps)
        mask = load_mask(rec.mask_path) if rec.mask_path is not None else None
        items.append(
            TrainingItem(clip=clip, annotation=rec.annotation, prompt=rec.prompt,
                         category=rec.category, mask=mask)
        )
    if not items:
        raise ValidationError("no training items after category filtering")
    return items


# ---------------------------------------------------------------------------
# Trainer
# ---------------------------------------------------------------------------
class Trainer:
    """Single-writer optimization loop over a fixed in-memory item list."""

    def __init__(self, model: VideoDiT, cfg: TrainConfig,
                 items: list[TrainingItem], log_path: Path | str | None = None):
        if not items:
            raise ValidationError("trainer needs at least one item")
        for i, item in enumerate(items):
            shape = item.clip.frames.shape
            if shape != (cfg.frames, cfg.height, cfg.width, cfg.channels):
                raise ValidationError(
                    f"item {i} clip shape {shape} does not match config "
                    f"({cfg.frames}, {cfg.height}, {cfg.width}, {cfg.channels})"
                )
        if cfg.spatial_control and model.control is None:
            raise ValidationError("config enables spatial control but model has no branch")
        if model.strategy != cfg.temporal_strategy:
            raise ValidationError("model strategy does not match config")

        self.model = model
        self.cfg = cfg
        self.items = items
        self.codec = cfg.codec()
        self.schedule = NoiseSchedule.cosine(cfg.noise_steps)
        self.log_path = Path(log_path) if log_path is not None else None

        self._text_cache: dict[str, torch.Tensor] = {}
        self._ref_latents = [
            torch.from_numpy(self.codec.encode_image(item.clip.frames[0]))
            for item in items
        ]
        self.rng = np.random.default_rng(cfg.seed)
        self.noise_gen = torch.Generator().manual_seed(cfg.seed + 1)

        head_params, other_params = [], []
        for name, p in model.named_parameters():
            if not p.requires_grad:
                continue
            if name.startswith(("timestamp_encoder.", "mask_embedder.", "ref_proj.")):
                head_params.append(p)
            else:
                other_params.append(p)
        if not head_params and not other_params:
            raise ValidationError("model has no trainable parameters")
        groups = []
        if other_params:
            groups.append({"params": other_params, "lr_scale": 1.0})
        if head_params:
            groups.append({"params": head_params, "lr_scale": cfg.head_lr_scale})
        self.optimizer = torch.optim.AdamW(
            groups, lr=cfg.learning_rate, weight_decay=cfg.weight_decay
        )
        self.history: list[dict] = []

    # -- schedule -------------------------------------------------------------
    def lr_at(self, step: int) -> float:
        cfg = self.cfg
        if cfg.warmup_steps > 0 and step < cfg.warmup_steps:
            return cfg.learning_rate * (step + 1) / cfg.warmup_steps
        if cfg.decay == "constant" or cfg.steps <= cfg.warmup_steps:
            return cfg.learning_rate
        progress = (step - cfg.warmup_steps) / (cfg.steps - cfg.warmup_steps)
        floor = cfg.final_lr_scale
        return cfg.learning_rate * (floor + (1 - floor) * 0.5 * (1 + math.cos(math.pi * progress)))

    # -- batch assembly ---------------------------------------------------------
    def _text_tokens(self, prompt: str) -> torch.Tensor:
        if prompt not in self._text_cache:
            self._text_cache[prompt] = encode_text(
                prompt, d_tau=self.cfg.d_tau, length=self.cfg.text_length
            )
        return self._text_cache[prompt]

    def _prepare(self, index: int) -> dict:
        """Latent target and conditioning for one (possibly augmented) item."""
        cfg = self.cfg
        item = self.items[index]
        ann = item.annotation
        frames = item.clip.frames
        mask = item.mask
        if cfg.augment:
            d = ann.duration
            new_start = int(self.rng.integers(0, ann.total_frames - d + 1))
            frames = shift_motion_segment(frames, ann, new_start)
            if mask is not None:
                mask = MaskSequence(
                    masks=shift_motion_segment(mask.masks, ann, new_start),
                    instance_id=mask.instance_id,
                )
            ann = TimestampAnnotation(new_start, new_start + d, ann.total_frames)

        ref = self._ref_latents[index]
        residual = torch.from_numpy(self.codec.encode(frames)) - ref[None]
        out: dict = {
            "latent": residual,
            "ref": ref,
            "text": self._text_tokens(item.prompt),
        }
        if cfg.temporal_strategy == "timestamp_tokens":
            out["pair"] = torch.tensor(ann.normalized, dtype=torch.float32)
        elif cfg.temporal_strategy == "temporal_mask":
            out["tmask"] = torch.from_numpy(
                build_temporal_mask(ann, cfg.latent_frames).astype(np.float32)
            )
        if cfg.spatial_control:
            if mask is not None:
                cond = build_spatial_condition(mask, ann)
                cond = downsample_condition(cond, cfg.temporal_factor, cfg.spatial_factor)
            else:
                cond = np.zeros(
                    (cfg.latent_frames, cfg.latent_height, cfg.latent_width),
                    dtype=np.uint8,
                )
            out["spatial"] = torch.from_numpy(cond.astype(np.float32))
        return out

    def _batch_bundle(self, prepared: list[dict]) -> tuple[torch.Tensor, ConditionBundle]:
        cfg = self.cfg
        x0 = torch.stack([p["latent"] for p in prepared])
        bundle = ConditionBundle(
            text_tokens=torch.stack([p["text"] for p in prepared]),
            ref_latent=torch.stack([p["ref"] for p in prepared]),
            timestamp_pair=torch.stack([p["pair"] for p in prepared])
            if cfg.temporal_strategy == "timestamp_tokens" else None,
            temporal_mask=torch.stack([p["tmask"] for p in prepared])
            if cfg.temporal_strategy == "temporal_mask" else None,
            spatial=torch.stack([p["spatial"] for p in prepared])
            if cfg.spatial_control else None,
        )
        return x0, bundle

    # -- steps ------------------------------------------------------------------
    def step(self, step_idx: int) -> dict:
        cfg = self.cfg
        indices = self.rng.integers(0, len(self.items), size=cfg.batch_size)
        prepared = [self._prepare(int(i)) for i in indices]
        x0, bundle = self._batch_bundle(prepared)

        t = torch.randint(0, cfg.noise_steps, (cfg.batch_size,), generator=self.noise_gen)
        if cfg.high_noise_fraction > 0.0:
            t_high = torch.randint(int(0.6 * cfg.noise_steps), cfg.noise_steps,
                                   (cfg.batch_size,), generator=self.noise_gen)
            pick = torch.rand(cfg.batch_size, generator=self.noise_gen)
            t = torch.where(pick < cfg.high_noise_fraction, t_high, t)
        eps = torch.randn(x0.shape, generator=self.noise_gen, dtype=x0.dtype)
        x_t = add_noise(self.schedule, x0, t, eps)

        lr = self.lr_at(step_idx)
        for group in self.optimizer.param_groups:
            group["lr"] = lr * group["lr_scale"]

        self.optimizer.zero_grad(set_to_none=True)
        pred = self.model(x_t, t, bundle)
        target = velocity_target(self.schedule, x0, t, eps)
        err = (pred - target) ** 2
        if cfg.loss_snr_weight_max > 0.0:
            snr = torch.from_numpy(self.schedule.snr()).to(err.dtype)[t]
            w = torch.clamp(1.0 / snr, max=cfg.loss_snr_weight_max)
            w = w / w.mean()
            loss = torch.mean(w.view(-1, *([1] * (err.ndim - 1))) * err)
        else:
            loss = torch.mean(err)
        if not torch.isfinite(loss):
            raise NumericsError(
                f"non-finite loss at step {step_idx} (lr={lr:.3g}); aborting"
            )
        loss.backward()
        grad_sq = 0.0
        for group in self.optimizer.param_groups:
            for p in group["params"]:
                if p.grad is not None:
                    grad_sq += float(p.grad.detach().pow(2).sum())
        self.optimizer.step()

        record = {
            "step": step_idx,
            "loss": float(loss.detach()),
            "lr": lr,
            "grad_norm": math.sqrt(grad_sq),
        }
        if self.model.control is not None:
            record["control_residual"] = self.model.last_control_residual
        self.history.append(record)
        return record

    def run(self) -> list[dict]:
        log_fh = open(self.log_path, "w") if self.log_path is not None else None
        try:
            for step_idx in range(self.cfg.steps):
                record = self.step(step_idx)
                if log_fh is not None:
                    log_fh.write(json.dumps(record) + "\n")
        finally:
            if log_fh is not None:
                log_fh.close()
        return self.history


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SampleRequest:
    """One deterministic generation job.

    `eta` interpolates the reverse process between a pure DDIM trajectory (0)
    and ancestral-style sampling (1); the injected noise comes from the seeded
    generator, so every eta stays deterministic given the seed.
    """

    ref_image: np.ndarray
    prompt: str
    start: float
    end: float
    seed: int = 0
    mask: MaskSequence | None = None
    n_steps: int | None = None
    eta: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.start < self.end <= 1.0):
            raise ValidationError("need 0 <= start < end <= 1")
        if self.eta is not None and not 0.0 <= self.eta <= 1.0:
            raise ValidationError("eta must lie in [0, 1]")


def sample(model: VideoDiT, cfg: TrainConfig, request: SampleRequest,
           schedule: NoiseSchedule | None = None) -> VideoClip:
    """Deterministic DDIM-style generation conditioned per the model's strategy."""
    schedule = schedule or NoiseSchedule.cosine(cfg.noise_steps)
    codec = cfg.codec()
    if request.ref_image.shape != (cfg.height, cfg.width, cfg.channels):
        raise ValidationError(
            f"reference image shape {request.ref_image.shape} != "
            f"({cfg.height}, {cfg.width}, {cfg.channels})"
        )
    n_steps = request.n_steps or cfg.sample_steps

    t_total = cfg.frames
    s_frame = int(round(request.start * t_total))
    e_frame = int(round(request.end * t_total))
    e_frame = max(e_frame, s_frame + 1)
    ann = TimestampAnnotation(s_frame, e_frame, t_total)

    bundle = ConditionBundle(
        text_tokens=encode_text(request.prompt, cfg.d_tau, cfg.text_length).unsqueeze(0),
        ref_latent=torch.from_numpy(codec.encode_image(request.ref_image)).unsqueeze(0),
        timestamp_pair=torch.tensor([[request.start, request.end]], dtype=torch.float32)
        if model.strategy == "timestamp_tokens" else None,
        temporal_mask=torch.from_numpy(
            build_temporal_mask(ann, cfg.latent_frames).astype(np.float32)
        ).unsqueeze(0) if model.strategy == "temporal_mask" else None,
    )
    if model.control is not None:
        if request.mask is not None:
            cond = build_spatial_condition(request.mask, ann)
            cond = downsample_condition(cond, cfg.temporal_factor, cfg.spatial_factor)
        else:
            cond = np.zeros(
                (cfg.latent_frames, cfg.latent_height, cfg.latent_width), dtype=np.uint8
            )
        bundle = replace(bundle, spatial=torch.from_numpy(cond.astype(np.float32)).unsqueeze(0))

    gen = torch.Generator().manual_seed(request.seed)
    shape = (1, cfg.latent_frames, cfg.latent_height, cfg.latent_width, cfg.channels)
    x = torch.randn(shape, generator=gen)
    steps = sampling_step_indices(len(schedule), n_steps)
    ab = schedule.alpha_bar
    eta = cfg.sample_eta if request.eta is None else request.eta

    with torch.no_grad():
        for i, t in enumerate(steps):
            v_hat = model(x, torch.tensor([t]), bundle)
            a_t = float(ab[t])
            x0 = math.sqrt(a_t) * x - math.sqrt(1.0 - a_t) * v_hat
            x0 = x0.clamp(-1.0, 1.0)  # reference-residual range
            eps = math.sqrt(1.0 - a_t) * x + math.sqrt(a_t) * v_hat
            a_prev = float(ab[steps[i + 1]]) if i + 1 < len(steps) else 1.0
            sigma = 0.0
            if eta > 0.0 and a_prev < 1.0:
                sigma = eta * math.sqrt((1.0 - a_prev) / (1.0 - a_t)) * math.sqrt(
                    max(1.0 - a_t / a_prev, 0.0)
                )
            x = (
                math.sqrt(a_prev) * x0
                + math.sqrt(max(1.0 - a_prev - sigma**2, 0.0)) * eps
            )
            if sigma > 0.0:
                x = x + sigma * torch.randn(shape, generator=gen)

    residual = x[0].numpy().astype(np.float32)
    latent = residual + bundle.ref_latent[0].numpy()[None]
    frames = np.clip(codec.decode(latent), 0.0, 1.0)
    return VideoClip(frames=frames, fps=cfg.fps)

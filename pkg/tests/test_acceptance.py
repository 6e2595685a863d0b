"""Acceptance gate: one test per release criterion, each printing a PASS/FAIL
line in the terminal summary. Training-based criteria share session-scoped
pretrained bases; everything is seeded and deterministic.
"""

import dataclasses
import json
import math
from pathlib import Path

import numpy as np
import pytest
import torch

from vfx.backbone import ConditionBundle, DiTConfig, VideoDiT, attach_lora
from vfx.checkpoint import save_checkpoint
from vfx.cli import main
from vfx.conditioning import encode_text
from vfx.dataset import (
    TimestampAnnotation,
    VideoClip,
    generate_synthetic_clip,
    make_random_spec,
    make_two_object_spec,
    side_regions,
    temporal_augment,
)
from vfx.diffusion_engine import (
    NoiseSchedule,
    SampleRequest,
    TrainConfig,
    Trainer,
    TrainingItem,
    add_noise,
    build_model,
    sample,
)
from vfx.annotation import annotate_clip
from vfx.metrics import (
    EvalProtocolConfig,
    EvalReference,
    Segment,
    SegmentPair,
    frame_error,
    motion_energy_ratio,
    run_eval_protocol,
    second_error,
    temporal_iou,
)
from vfx.spatial_control import attach_control

torch.set_num_threads(2)

# ---------------------------------------------------------------------------
# Shared smoke configuration (desk scale)
# ---------------------------------------------------------------------------
SMOKE = dict(
    frames=24, height=32, width=32, temporal_factor=2, spatial_factor=8,
    d_model=96, n_blocks=4, n_heads=4, d_tau=48, patch_size=2,
    batch_size=8, warmup_steps=100, seed=0,
)
PRETRAIN_STEPS = 2500
ADAPT_STEPS = 2000          # fixed by the temporal-control criterion
ORDERING_STEPS = 800        # matched budget for the strategy comparison
ADAPT_KW = dict(lora_rank=16, learning_rate=2e-3, head_lr_scale=10.0,
                high_noise_fraction=0.5)


def levitate_items(seed0: int, count: int) -> list[TrainingItem]:
    items = []
    for s in range(count):
        spec = make_random_spec(seed=seed0 + s, kind="levitate", frames=24,
                                height=32, width=32, min_duration=2, max_duration=20)
        clip, mask, ann = generate_synthetic_clip(spec)
        items.append(TrainingItem(clip=clip, annotation=ann, prompt="levitate it",
                                  category="levitate", mask=mask))
    return items


@pytest.fixture(scope="session")
def levitate_base_ckpt(tmp_path_factory) -> Path:
    """Toy stand-in for a released backbone: fully trained, no conditioning."""
    cfg = TrainConfig(**SMOKE, temporal_strategy="none", lora_rank=0,
                      train_base=True, learning_rate=2e-3, steps=PRETRAIN_STEPS)
    model = build_model(cfg)
    Trainer(model, cfg, levitate_items(100, 32)).run()
    path = tmp_path_factory.mktemp("base") / "levitate_base.vfxckpt"
    save_checkpoint(path, model, cfg.to_dict())
    return path


def adapter_config(base_ckpt: Path, strategy: str, steps: int, seed: int) -> TrainConfig:
    return TrainConfig(**SMOKE | {"seed": seed}, temporal_strategy=strategy,
                       base_checkpoint=str(base_ckpt), steps=steps, **ADAPT_KW)


def protocol_eval(model, cfg, refs, seed=3):
    def sampler(ref, truth, job_seed):
        return sample(model, cfg, SampleRequest(
            ref_image=ref.image, prompt="levitate it",
            start=truth.start / ref.total_frames, end=truth.end / ref.total_frames,
            seed=job_seed,
        ))

    return run_eval_protocol(sampler, refs, EvalProtocolConfig(
        pairs_per_reference=5, seed=seed,
    ))


def held_out_references(count=5):
    return [
        EvalReference(image=item.clip.frames[0], category="levitate", fps=8,
                      total_frames=24, name=f"ref{i}")
        for i, item in enumerate(levitate_items(900, count))
    ]


# ---------------------------------------------------------------------------
# Criterion 1: init-identity of every adapter
# ---------------------------------------------------------------------------
def test_criterion_01_init_identity(acceptance_report):
    torch.manual_seed(0)
    cfg = DiTConfig(d_model=48, n_blocks=3, n_heads=2, d_tau=24, patch_size=1,
                    latent_frames=4, latent_height=2, latent_width=2, channels=3,
                    mlp_ratio=2.0, timestamp_tokens=3)
    base = VideoDiT(cfg, strategy="none")
    text = encode_text("levitate it", d_tau=cfg.d_tau, length=4)

    variants = {}
    for strategy in ("timestamp_tokens", "temporal_mask"):
        model = VideoDiT(cfg, strategy=strategy)
        model.load_state_dict(base.state_dict(), strict=False)
        attach_control(model)
        attach_lora(model, rank=4)
        variants[strategy] = model

    gen = torch.Generator().manual_seed(1)
    worst = 0.0
    for _ in range(100):
        x = torch.randn(1, 4, 2, 2, 3, generator=gen)
        step = torch.randint(0, 1000, (1,), generator=gen)
        ref = torch.rand(1, 2, 2, 3, generator=gen)
        spatial = (torch.rand(1, 4, 2, 2, generator=gen) > 0.5).float()

        # Strategy-II variant: the zero-init encoder emits exactly the zero
        # tokens we hand the base model, so the key/value sets match.
        base_tokens = torch.cat([torch.zeros(3, cfg.d_tau), text]).unsqueeze(0)
        out_base = base(x, step, ConditionBundle(text_tokens=base_tokens, ref_latent=ref))
        out_adapted = variants["timestamp_tokens"](
            x, step, ConditionBundle(text_tokens=text.unsqueeze(0), ref_latent=ref,
                                     timestamp_pair=torch.tensor([[0.2, 0.7]]),
                                     spatial=spatial))
        worst = max(worst, float((out_base - out_adapted).abs().max()))

        out_base2 = base(x, step, ConditionBundle(text_tokens=text.unsqueeze(0),
                                                  ref_latent=ref))
        out_adapted2 = variants["temporal_mask"](
            x, step, ConditionBundle(text_tokens=text.unsqueeze(0), ref_latent=ref,
                                     temporal_mask=torch.tensor([[0.0, 1.0, 1.0, 0.0]]),
                                     spatial=spatial))
        worst = max(worst, float((out_base2 - out_adapted2).abs().max()))

    acceptance_report("criterion 01 init-identity", worst <= 1e-6,
                      f"max |adapted - base| = {worst:.2e}")
    assert worst <= 1e-6


# ---------------------------------------------------------------------------
# Criterion 2: finite-difference gradient checks
# ---------------------------------------------------------------------------
def _gradcheck_model(strategy: str):
    cfg = DiTConfig(d_model=24, n_blocks=2, n_heads=2, d_tau=16, patch_size=1,
                    latent_frames=4, latent_height=2, latent_width=2, channels=3,
                    mlp_ratio=2.0, d_cond=24, timestamp_tokens=2,
                    timestamp_hidden=12, mask_embed_hidden=8)
    torch.manual_seed(0)
    model = VideoDiT(cfg, strategy=strategy)
    if strategy == "timestamp_tokens":
        attach_control(model)
        attach_lora(model, rank=2, freeze_base=False)
    model.double()
    gen = torch.Generator().manual_seed(5)
    with torch.no_grad():
        for p in model.parameters():
            p.copy_(torch.randn(p.shape, generator=gen, dtype=torch.float64) * 0.2)
            p.requires_grad_(True)
    return cfg, model


def _training_loss(model, cfg, batch):
    x_t, steps, bundle, eps = batch
    return torch.mean((model(x_t, steps, bundle) - eps) ** 2)


def _gradcheck_batch(cfg, strategy, with_spatial):
    gen = torch.Generator().manual_seed(11)
    sched = NoiseSchedule.cosine(100)
    x0 = torch.randn(2, 4, 2, 2, 3, generator=gen, dtype=torch.float64) * 0.3
    eps = torch.randn(2, 4, 2, 2, 3, generator=gen, dtype=torch.float64)
    t = torch.tensor([23, 71])
    x_t = add_noise(sched, x0, t, eps)
    text = encode_text("levitate it", d_tau=cfg.d_tau, length=4).double()
    bundle = ConditionBundle(
        text_tokens=text.unsqueeze(0).expand(2, -1, -1),
        ref_latent=torch.rand(2, 2, 2, 3, generator=gen, dtype=torch.float64),
        timestamp_pair=torch.tensor([[0.1, 0.6], [0.3, 0.9]], dtype=torch.float64)
        if strategy == "timestamp_tokens" else None,
        temporal_mask=torch.tensor([[0, 1, 1, 0], [1, 1, 0, 0]], dtype=torch.float64)
        if strategy == "temporal_mask" else None,
        spatial=(torch.rand(2, 4, 2, 2, generator=gen, dtype=torch.float64) > 0.5).double()
        if with_spatial else None,
    )
    return x_t, t, bundle, eps


def test_criterion_02_gradient_checks(acceptance_report):
    rng = np.random.default_rng(7)
    checked = 0
    worst = 0.0
    group_counts = {}
    for strategy in ("timestamp_tokens", "temporal_mask"):
        cfg, model = _gradcheck_model(strategy)
        total_params = sum(p.numel() for p in model.parameters())
        assert total_params <= 50_000, f"tiny config has {total_params} params"
        batch = _gradcheck_batch(cfg, strategy, with_spatial=strategy == "timestamp_tokens")

        loss = _training_loss(model, cfg, batch)
        loss.backward()

        if strategy == "timestamp_tokens":
            groups = {
                "backbone": ["blocks.0.mlp.0.weight", "patch_proj.weight",
                             "time_mlp.0.weight", "out_proj.weight",
                             "blocks.1.modulation.weight"],
                "lora": ["blocks.0.self_attn.q.lora_b", "blocks.1.cross_attn.v.lora_a",
                         "blocks.0.cross_attn.k.lora_b", "blocks.1.self_attn.out.lora_a"],
                "timestamp_encoder": ["timestamp_encoder.fc1.weight",
                                      "timestamp_encoder.out.weight",
                                      "timestamp_encoder.fc2.bias"],
                "control": ["control.bridges.0.weight", "control.cond_embed.weight",
                            "control.blocks.0.self_attn.q.weight",
                            "control.blocks.0.mlp.2.weight"],
            }
        else:
            groups = {
                "mask_embedder": ["mask_embedder.fc1.weight", "mask_embedder.out.weight",
                                  "mask_embedder.out.bias"],
                "backbone2": ["blocks.0.self_attn.q.weight", "ref_proj.weight"],
            }

        params = dict(model.named_parameters())
        for group, names in groups.items():
            for name in names:
                param = params[name]
                flat = param.detach().reshape(-1)
                idx = int(rng.integers(0, flat.numel()))
                analytic = float(param.grad.reshape(-1)[idx])
                h = 1e-5 * max(1.0, abs(float(flat[idx])))
                with torch.no_grad():
                    param.reshape(-1)[idx] += h
                    up = float(_training_loss(model, cfg, batch))
                    param.reshape(-1)[idx] -= 2 * h
                    down = float(_training_loss(model, cfg, batch))
                    param.reshape(-1)[idx] += h
                fd = (up - down) / (2 * h)
                rel = abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-10)
                worst = max(worst, rel)
                checked += 1
                group_counts[group] = group_counts.get(group, 0) + 1
                assert rel <= 1e-4, f"{name}[{idx}]: analytic {analytic:.3e} fd {fd:.3e}"

    acceptance_report(
        "criterion 02 gradient-checks",
        checked >= 32 and worst <= 1e-4,
        f"{checked} params across {len(group_counts)} groups, worst rel err {worst:.2e}",
    )
    assert checked >= 32


# ---------------------------------------------------------------------------
# Criterion 3: metric oracles, exhaustive sweep
# ---------------------------------------------------------------------------
def test_criterion_03_metric_oracles(acceptance_report):
    t_max = 32
    segments = [Segment(s, e) for s in range(t_max) for e in range(s + 1, t_max + 1)]
    frames = np.arange(t_max)
    member = np.array([(seg.start <= frames) & (frames < seg.end) for seg in segments])
    inter = member.astype(np.int32) @ member.astype(np.int32).T
    sizes = member.sum(axis=1)
    union = sizes[:, None] + sizes[None, :] - inter

    checked = 0
    for i, pred in enumerate(segments):
        for j, truth in enumerate(segments):
            iou = temporal_iou(pred, truth)
            assert iou == inter[i, j] / union[i, j]
            pair = [SegmentPair(pred, truth, fps=8)]
            # Integer-frame counting oracle for endpoint errors: |a - b| is
            # the size of the symmetric difference of the frame prefixes.
            start_err = int(np.sum((frames < pred.start) != (frames < truth.start)))
            end_err = int(np.sum((frames < pred.end) != (frames < truth.end)))
            e_f = frame_error(pair)
            assert e_f == start_err + end_err
            assert second_error(pair) * 8 == e_f  # exact: fps is a power of two
            checked += 1
    assert temporal_iou(segments[0], segments[0]) == 1.0
    acceptance_report("criterion 03 metric-oracles", True,
                      f"{checked} segment pairs, exact match")


# ---------------------------------------------------------------------------
# Criterion 4: augmentation law
# ---------------------------------------------------------------------------
def test_criterion_04_augmentation_law(acceptance_report):
    rng = np.random.default_rng(13)
    t_total, dur = 49, 20
    clip = VideoClip(frames=np.zeros((t_total, 8, 8, 3), dtype=np.float32), fps=8)
    ann = TimestampAnnotation(7, 27, t_total)
    counts = np.zeros(t_total - dur + 1, dtype=int)
    ok = True
    for _ in range(10_000):
        _, new_ann = temporal_augment(clip, ann, rng)
        ok &= 0 <= new_ann.t_start <= 29
        ok &= 20 <= new_ann.t_end <= 49
        ok &= new_ann.duration == dur
        counts[new_ann.t_start] += 1
    ratio = counts.max() / counts.min() if counts.min() > 0 else math.inf
    passed = ok and counts.min() > 0 and ratio < 1.5
    acceptance_report("criterion 04 augmentation-law", passed,
                      f"bins {counts.min()}..{counts.max()}, max/min {ratio:.3f}")
    assert passed


# ---------------------------------------------------------------------------
# Criterion 5: annotation oracle on all four effects
# ---------------------------------------------------------------------------
def test_criterion_05_annotation_oracle(acceptance_report):
    kinds = ("levitate", "dissolve", "explode", "squish")
    mismatches = []
    for i in range(50):
        spec = make_random_spec(seed=1000 + i, kind=kinds[i % 4], frames=32,
                                height=48, width=48)
        clip, _, ann = generate_synthetic_clip(spec)
        got = annotate_clip(clip)
        if (got.t_start, got.t_end) != (ann.t_start, ann.t_end):
            mismatches.append((i, kinds[i % 4]))
    acceptance_report("criterion 05 annotation-oracle", not mismatches,
                      f"50 specs, {len(mismatches)} mismatches")
    assert not mismatches


# ---------------------------------------------------------------------------
# Criterion 6: temporal-control smoke (timestamp tokens)
# ---------------------------------------------------------------------------
@pytest.fixture(scope="session")
def temporal_smoke_result(levitate_base_ckpt):
    cfg = adapter_config(levitate_base_ckpt, "timestamp_tokens", ADAPT_STEPS, seed=0)
    model = build_model(cfg)
    history = Trainer(model, cfg, levitate_items(100, 32)).run()
    report = protocol_eval(model, cfg, held_out_references(5))
    return history, report


def test_criterion_06_temporal_control_smoke(temporal_smoke_result, acceptance_report):
    history, report = temporal_smoke_result
    losses = [r["loss"] for r in history]
    loss_ratio = np.mean(losses[-100:]) / np.mean(losses[:100])
    avg = report["average"]
    passed = avg["t_iou"] >= 0.6 and avg["e_f"] <= 0.25 * 24
    acceptance_report(
        "criterion 06 temporal-smoke", passed,
        f"T_IoU {avg['t_iou']:.3f} (>=0.6), E_f {avg['e_f']:.2f} (<=6), "
        f"loss ratio {loss_ratio:.3f}, failures {avg['extraction_failures']}",
    )
    assert passed


def test_criterion_06b_smoke_loss_decrease(temporal_smoke_result, acceptance_report):
    # Companion check from the trainer contract: final/initial loss < 0.25.
    history, _ = temporal_smoke_result
    losses = [r["loss"] for r in history]
    ratio = np.mean(losses[-100:]) / np.mean(losses[:100])
    acceptance_report("criterion 06b smoke-loss-ratio", ratio < 0.25,
                      f"final/initial = {ratio:.3f}")
    assert ratio < 0.25


# ---------------------------------------------------------------------------
# Criterion 7: strategy ordering across seeds
# ---------------------------------------------------------------------------
def test_criterion_07_strategy_ordering(levitate_base_ckpt, acceptance_report):
    items = levitate_items(100, 32)
    refs = held_out_references(5)
    means = {}
    for strategy in ("timestamp_tokens", "temporal_mask"):
        ious = []
        for seed in (1, 2, 3):
            cfg = adapter_config(levitate_base_ckpt, strategy, ORDERING_STEPS, seed)
            model = build_model(cfg)
            Trainer(model, cfg, items).run()
            report = protocol_eval(model, cfg, refs, seed=3)
            ious.append(report["average"]["t_iou"])
        means[strategy] = float(np.mean(ious))
    passed = means["timestamp_tokens"] >= means["temporal_mask"]
    acceptance_report(
        "criterion 07 strategy-ordering", passed,
        f"timestamp_tokens {means['timestamp_tokens']:.3f} >= "
        f"temporal_mask {means['temporal_mask']:.3f} (3 seeds)",
    )
    assert passed


# ---------------------------------------------------------------------------
# Criterion 8: spatial-control smoke
# ---------------------------------------------------------------------------
def two_object_items(seed0: int, count: int) -> list[TrainingItem]:
    items = []
    for i in range(count):
        spec = make_two_object_spec(seed=seed0 + i, mover="left" if i % 2 == 0 else "right")
        clip, mask, ann = generate_synthetic_clip(spec)
        items.append(TrainingItem(clip=clip, annotation=ann, prompt="levitate it",
                                  category="levitate", mask=mask))
    return items


@pytest.fixture(scope="session")
def spatial_smoke_result(tmp_path_factory):
    pre_cfg = TrainConfig(**SMOKE, temporal_strategy="none", lora_rank=0,
                          train_base=True, learning_rate=2e-3, steps=2000)
    base = build_model(pre_cfg)
    Trainer(base, pre_cfg, two_object_items(500, 24)).run()
    base_path = tmp_path_factory.mktemp("spatial") / "two_object_base.vfxckpt"
    save_checkpoint(base_path, base, pre_cfg.to_dict())

    cfg = TrainConfig(**SMOKE, temporal_strategy="none", spatial_control=True,
                      base_checkpoint=str(base_path), steps=2000, **ADAPT_KW)
    model = build_model(cfg)
    history = Trainer(model, cfg, two_object_items(500, 24)).run()
    return model, cfg, history


def test_criterion_08_spatial_control_smoke(spatial_smoke_result, acceptance_report):
    model, cfg, history = spatial_smoke_result
    ratios, swaps_followed = [], []
    for i in range(10):
        spec_left = make_two_object_spec(seed=7000 + i, mover="left")
        spec_right = make_two_object_spec(seed=7000 + i, mover="right")
        clip_l, mask_l, ann = generate_synthetic_clip(spec_left)
        _, mask_r, _ = generate_synthetic_clip(spec_right)
        region_l, region_r = side_regions(spec_left)
        ref = clip_l.frames[0]
        start, end = ann.t_start / 24, ann.t_end / 24

        out_l = sample(model, cfg, SampleRequest(ref_image=ref, prompt="levitate it",
                                                 start=start, end=end, seed=100 + i,
                                                 mask=mask_l))
        out_r = sample(model, cfg, SampleRequest(ref_image=ref, prompt="levitate it",
                                                 start=start, end=end, seed=100 + i,
                                                 mask=mask_r))
        ratios.append(motion_energy_ratio(out_l, region_l, region_r))
        swap_ratio = motion_energy_ratio(out_r, region_r, region_l)
        swaps_followed.append(swap_ratio > 1.0)

    n_good = sum(r >= 3.0 for r in ratios)
    n_swap = sum(swaps_followed)
    residuals = [r["control_residual"] for r in history]
    grows = residuals[0] == 0.0 and np.mean(residuals[-100:]) > 0.0
    passed = n_good >= 8 and n_swap >= 8 and grows
    acceptance_report(
        "criterion 08 spatial-smoke", passed,
        f"ratio>=3 for {n_good}/10, swap follows mask {n_swap}/10, "
        f"bridge residual 0 -> {np.mean(residuals[-100:]):.4f}",
    )
    assert passed


# ---------------------------------------------------------------------------
# Criterion 9: end-to-end determinism through the CLI
# ---------------------------------------------------------------------------
def test_criterion_09_cli_determinism(tmp_path, acceptance_report):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "count": 6, "effects": ["levitate"], "frames": 8, "height": 16,
        "width": 16, "min_duration": 2, "max_duration": 4, "seed": 2,
    }))
    data = tmp_path / "data"
    assert main(["data", "synth", "--spec", str(spec), "--out", str(data)]) == 0

    train_cfg = tmp_path / "train.json"
    train_cfg.write_text(json.dumps({
        "frames": 8, "height": 16, "width": 16, "temporal_factor": 2,
        "spatial_factor": 8, "d_model": 32, "n_blocks": 2, "n_heads": 2,
        "d_tau": 16, "patch_size": 1, "timestamp_tokens": 2, "text_length": 4,
        "lora_rank": 4, "learning_rate": 1e-3, "steps": 40, "warmup_steps": 5,
        "batch_size": 2, "noise_steps": 50, "sample_steps": 8, "seed": 0,
    }))

    ckpts, frames = [], []
    for run in ("a", "b"):
        out = tmp_path / f"run_{run}"
        assert main(["train", "--config", str(train_cfg),
                     "--manifest", str(data / "manifest.json"), "--out", str(out)]) == 0
        ckpts.append((out / "model.vfxckpt").read_bytes())
        samp = tmp_path / f"samp_{run}"
        assert main(["sample", "--ckpt", str(out),
                     "--ref", str(data / "clip_00000" / "frame_00000.png"),
                     "--prompt", "levitate it", "--start", "0.25", "--end", "0.75",
                     "--seed", "11", "--out", str(samp)]) == 0
        frames.append(b"".join(p.read_bytes()
                               for p in sorted((samp / "sample").glob("*.png"))))

    passed = ckpts[0] == ckpts[1] and frames[0] == frames[1]
    acceptance_report("criterion 09 determinism", passed,
                      "identical parameter blobs and sampled frames")
    assert passed


# ---------------------------------------------------------------------------
# Criterion 10: mixed vs per-category training both complete with reports
# ---------------------------------------------------------------------------
def test_criterion_10_mixed_vs_single(tmp_path, acceptance_report):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "count": 8, "effects": ["levitate", "dissolve", "explode", "squish"],
        "frames": 8, "height": 16, "width": 16, "min_duration": 2,
        "max_duration": 4, "seed": 4,
    }))
    data = tmp_path / "data"
    assert main(["data", "synth", "--spec", str(spec), "--out", str(data)]) == 0

    base_cfg = {
        "frames": 8, "height": 16, "width": 16, "temporal_factor": 2,
        "spatial_factor": 8, "d_model": 32, "n_blocks": 2, "n_heads": 2,
        "d_tau": 16, "patch_size": 1, "timestamp_tokens": 2, "text_length": 4,
        "lora_rank": 4, "learning_rate": 1e-3, "steps": 30, "warmup_steps": 5,
        "batch_size": 2, "noise_steps": 50, "sample_steps": 5, "seed": 0,
    }
    categories = ["levitate", "dissolve", "explode", "squish"]
    reports = {}
    for name, category in [("mixed", None)] + [(c, c) for c in categories]:
        cfg_path = tmp_path / f"train_{name}.json"
        cfg = dict(base_cfg)
        if category is not None:
            cfg["category"] = category
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / f"run_{name}"
        assert main(["train", "--config", str(cfg_path),
                     "--manifest", str(data / "manifest.json"), "--out", str(out)]) == 0
        report_path = tmp_path / f"report_{name}.json"
        assert main(["eval", "--ckpt", str(out), "--manifest", str(data / "manifest.json"),
                     "--pairs", "2", "--seed", "1", "--out", str(report_path)]) == 0
        reports[name] = json.loads(report_path.read_text())

    mixed_rows = set(reports["mixed"]["per_effect"])
    ok = mixed_rows == set(categories)
    for c in categories:
        row = reports[c]["per_effect"]
        ok &= set(row) == set(categories)  # eval manifest spans all four
        ok &= all({"t_iou", "e_f", "e_s"} <= set(v) for v in row.values())
    acceptance_report("criterion 10 mixed-vs-single", ok,
                      "5 trainings completed, per-effect report rows present")
    assert ok

"""Command-line entry point.

Subcommands: data (synth / augment), annotate, train, sample, eval, inspect.
Each run takes a JSON config (flags override config keys), rejects unknown
keys, writes every artifact under --out, and records the fully resolved
config as resolved_config.json for reproducibility.

Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 validation error.
Errors print a single machine-parsable line: `vfx: error: <category>: <msg>`.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from vfx import diffusion_engine as engine
from vfx.annotation import MotionDetectorConfig, annotate_clip
from vfx.checkpoint import load_checkpoint, read_header, save_checkpoint
from vfx.dataset import (
    DatasetManifest,
    ManifestRecord,
    MaskSequence,
    TimestampAnnotation,
    VideoClip,
    generate_synthetic_clip,
    load_clip,
    load_manifest,
    load_mask,
    load_reference_image,
    make_random_spec,
    make_two_object_spec,
    save_clip,
    save_manifest,
    save_mask,
    shift_motion_segment,
)
from vfx.errors import ValidationError, VfxError
from vfx.metrics import EvalProtocolConfig, EvalReference, run_eval_protocol

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3

CHECKPOINT_NAME = "model.vfxckpt"


def _num_workers() -> int:
    raw = os.environ.get("VFX_NUM_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"VFX_NUM_WORKERS must be an integer, got {raw!r}")


def _load_json_config(path: str | None, allowed: set[str], defaults: dict,
                      overrides: dict) -> dict:
    config = dict(defaults)
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ValidationError(f"config file {p} does not exist")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {p} is not valid JSON: {exc}")
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
        unknown = set(data) - allowed
        if unknown:
            raise ValidationError(f"unknown config key(s): {sorted(unknown)}")
        config.update(data)
    config.update({k: v for k, v in overrides.items() if v is not None})
    return config


def _write_resolved(out_dir: Path, config: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "resolved_config.json").write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# vfx data synth / augment
# ---------------------------------------------------------------------------
_SYNTH_DEFAULTS = {
    "seed": 0,
    "count": 16,
    "effects": ["levitate", "dissolve", "explode", "squish"],
    "frames": 24,
    "height": 32,
    "width": 32,
    "fps": 8,
    "min_duration": 2,
    "max_duration": None,
    "scene": "single",  # or "two_object"
}


def _synth_one(config: dict, out: Path, index: int) -> ManifestRecord:
    effects = config["effects"]
    kind = effects[index % len(effects)]
    seed = config["seed"] * 100003 + index
    if config["scene"] == "two_object":
        spec = make_two_object_spec(
            seed=seed, mover="left" if index % 2 == 0 else "right", kind=kind,
            frames=config["frames"], height=config["height"], width=config["width"],
            fps=config["fps"],
        )
    else:
        spec = make_random_spec(
            seed=seed, kind=kind, frames=config["frames"], height=config["height"],
            width=config["width"], fps=config["fps"],
            min_duration=config["min_duration"],
            max_duration=config["max_duration"],
        )
    clip, mask, ann = generate_synthetic_clip(spec)
    clip_dir = save_clip(clip, out / f"clip_{index:05d}")
    mask_dir = save_mask(mask, out / f"mask_{index:05d}")
    return ManifestRecord(
        clip_path=clip_dir, mask_path=mask_dir, annotation=ann,
        prompt=f"{kind} it", category=kind, fps=spec.fps,
    )


def cmd_data_synth(args) -> int:
    config = _load_json_config(
        args.spec, set(_SYNTH_DEFAULTS), _SYNTH_DEFAULTS,
        {"seed": args.seed},
    )
    if config["scene"] not in ("single", "two_object"):
        raise ValidationError("scene must be 'single' or 'two_object'")
    out = Path(args.out)
    _write_resolved(out, config)
    indices = range(config["count"])
    workers = min(_num_workers(), config["count"])
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda i: _synth_one(config, out, i), indices))
    else:
        records = [_synth_one(config, out, i) for i in indices]
    manifest = DatasetManifest(records=tuple(records))
    save_manifest(manifest, out / "manifest.json")
    print(f"wrote {len(records)} clips and manifest.json under {out}")
    return EXIT_OK


def cmd_data_augment(args) -> int:
    manifest = load_manifest(args.manifest)
    out = Path(args.out)
    _write_resolved(out, {"seed": args.seed, "manifest": str(args.manifest)})
    rng = np.random.default_rng(args.seed)
    records = []
    for i, rec in enumerate(manifest.records):
        clip = load_clip(rec.clip_path, fps=rec.fps)
        ann = rec.annotation
        new_start = int(rng.integers(0, ann.total_frames - ann.duration + 1))
        frames = shift_motion_segment(clip.frames, ann, new_start)
        clip_dir = save_clip(VideoClip(frames=frames, fps=clip.fps), out / f"clip_{i:05d}")
        mask_dir = None
        if rec.mask_path is not None:
            mask = load_mask(rec.mask_path)
            mask_dir = save_mask(
                MaskSequence(masks=shift_motion_segment(mask.masks, ann, new_start)),
                out / f"mask_{i:05d}",
            )
        new_ann = TimestampAnnotation(new_start, new_start + ann.duration, ann.total_frames)
        records.append(
            ManifestRecord(clip_path=clip_dir, mask_path=mask_dir, annotation=new_ann,
                           prompt=rec.prompt, category=rec.category, fps=rec.fps)
        )
    save_manifest(DatasetManifest(records=tuple(records)), out / "manifest.json")
    print(f"wrote {len(records)} augmented clips under {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# vfx annotate
# ---------------------------------------------------------------------------
def cmd_annotate(args) -> int:
    clip = load_clip(args.clip, fps=args.fps)
    cfg = MotionDetectorConfig(displacement_threshold=args.threshold)
    ann = annotate_clip(clip, cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "clip": str(args.clip),
        "start": ann.t_start,
        "end": ann.t_end,
        "total_frames": ann.total_frames,
        "fps": clip.fps,
    }
    out.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"motion interval [{ann.t_start}, {ann.t_end}) of {ann.total_frames} frames")
    return EXIT_OK


# ---------------------------------------------------------------------------
# vfx train
# ---------------------------------------------------------------------------
def cmd_train(args) -> int:
    allowed = set(engine.TrainConfig.__dataclass_fields__)
    config = _load_json_config(args.config, allowed, {}, {"seed": args.seed})
    cfg = engine.TrainConfig.from_dict(config)
    out = Path(args.out)
    _write_resolved(out, cfg.to_dict())

    manifest = load_manifest(args.manifest)
    items = engine.items_from_manifest(manifest, category=cfg.category)
    model = engine.build_model(cfg)
    trainer = engine.Trainer(model, cfg, items, log_path=out / "train_log.jsonl")
    history = trainer.run()
    save_checkpoint(out / CHECKPOINT_NAME, model, train_config=cfg.to_dict())
    print(
        f"trained {cfg.steps} steps on {len(items)} clips; "
        f"final loss {history[-1]['loss']:.4f}; checkpoint at {out / CHECKPOINT_NAME}"
    )
    return EXIT_OK


def _checkpoint_path(raw: str) -> Path:
    path = Path(raw)
    if path.is_dir():
        path = path / CHECKPOINT_NAME
    return path


def _train_config_from_header(header: dict) -> engine.TrainConfig:
    snapshot = header.get("train")
    if not snapshot:
        raise ValidationError("checkpoint carries no training config snapshot")
    return engine.TrainConfig.from_dict(snapshot)


# ---------------------------------------------------------------------------
# vfx sample
# ---------------------------------------------------------------------------
def cmd_sample(args) -> int:
    model, header = load_checkpoint(_checkpoint_path(args.ckpt))
    cfg = _train_config_from_header(header)
    ref = load_reference_image(args.ref)
    mask = load_mask(args.mask) if args.mask else None
    request = engine.SampleRequest(
        ref_image=ref, prompt=args.prompt, start=args.start, end=args.end,
        seed=args.seed if args.seed is not None else 0,
        mask=mask, n_steps=args.steps, eta=args.eta,
    )
    out = Path(args.out)
    _write_resolved(out, {
        "ckpt": str(args.ckpt), "ref": str(args.ref), "prompt": args.prompt,
        "start": args.start, "end": args.end, "seed": request.seed,
        "steps": request.n_steps or cfg.sample_steps, "mask": args.mask,
        "eta": cfg.sample_eta if args.eta is None else args.eta,
    })
    clip = engine.sample(model, cfg, request)
    save_clip(clip, out / "sample")
    print(f"wrote {clip.num_frames} frames under {out / 'sample'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# vfx eval
# ---------------------------------------------------------------------------
def cmd_eval(args) -> int:
    model, header = load_checkpoint(_checkpoint_path(args.ckpt))
    cfg = _train_config_from_header(header)
    manifest = load_manifest(args.manifest)
    if not manifest.records:
        raise ValidationError("evaluation manifest is empty")

    references = []
    masks: dict[str, MaskSequence | None] = {}
    for i, rec in enumerate(manifest.records):
        clip = load_clip(rec.clip_path, fps=rec.fps)
        name = f"ref_{i:04d}"
        references.append(
            EvalReference(image=clip.frames[0], category=rec.category,
                          fps=rec.fps, total_frames=rec.annotation.total_frames,
                          name=name)
        )
        masks[name] = load_mask(rec.mask_path) if rec.mask_path is not None else None

    def sampler(ref: EvalReference, truth, seed: int):
        request = engine.SampleRequest(
            ref_image=ref.image, prompt=f"{ref.category} it",
            start=truth.start / ref.total_frames, end=truth.end / ref.total_frames,
            seed=seed, mask=masks.get(ref.name),
        )
        return engine.sample(model, cfg, request)

    protocol = EvalProtocolConfig(pairs_per_reference=args.pairs, seed=args.seed or 0)
    report = run_eval_protocol(sampler, references, protocol)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    avg = report["average"]
    print(
        f"T_IoU {avg['t_iou']:.3f}  E_f {avg['e_f']:.2f}  E_s {avg['e_s']:.3f}  "
        f"failures {avg['extraction_failures']}/{avg['pairs']} -> {out}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# vfx inspect
# ---------------------------------------------------------------------------
def cmd_inspect(args) -> int:
    header = read_header(_checkpoint_path(args.ckpt))
    model_info = header["model"]
    total = frozen = 0
    for p in header["params"]:
        n = int(np.prod(p["shape"])) if p["shape"] else 1
        total += n
        frozen += n if p["frozen"] else 0
    print(json.dumps(model_info, indent=2, sort_keys=True))
    print(f"parameters: total={total} trainable={total - frozen} frozen={frozen}")
    print(f"tensors: {len(header['params'])}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / main
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vfx", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_data = sub.add_parser("data", help="synthesize or augment datasets")
    data_sub = p_data.add_subparsers(dest="data_command", required=True)

    p_synth = data_sub.add_parser("synth", help="generate synthetic effect clips")
    p_synth.add_argument("--spec", help="generator config JSON")
    p_synth.add_argument("--seed", type=int)
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=cmd_data_synth)

    p_aug = data_sub.add_parser("augment", help="re-shift motion segments in time")
    p_aug.add_argument("--manifest", required=True)
    p_aug.add_argument("--seed", type=int, default=0)
    p_aug.add_argument("--out", required=True)
    p_aug.set_defaults(func=cmd_data_augment)

    p_ann = sub.add_parser("annotate", help="extract motion timestamps from a clip")
    p_ann.add_argument("--clip", required=True, help="directory of frame PNGs")
    p_ann.add_argument("--threshold", type=float, default=0.5)
    p_ann.add_argument("--fps", type=int, default=8)
    p_ann.add_argument("--out", required=True)
    p_ann.set_defaults(func=cmd_annotate)

    p_train = sub.add_parser("train", help="train adapters on a manifest")
    p_train.add_argument("--config", help="train config JSON")
    p_train.add_argument("--manifest", required=True)
    p_train.add_argument("--seed", type=int)
    p_train.add_argument("--out", required=True)
    p_train.set_defaults(func=cmd_train)

    p_sample = sub.add_parser("sample", help="generate a clip from a checkpoint")
    p_sample.add_argument("--ckpt", required=True)
    p_sample.add_argument("--ref", required=True, help="reference image PNG")
    p_sample.add_argument("--prompt", required=True)
    p_sample.add_argument("--start", type=float, required=True)
    p_sample.add_argument("--end", type=float, required=True)
    p_sample.add_argument("--seed", type=int)
    p_sample.add_argument("--mask", help="mask frame directory (control models)")
    p_sample.add_argument("--steps", type=int)
    p_sample.add_argument("--eta", type=float, help="sampler stochasticity in [0, 1]")
    p_sample.add_argument("--out", required=True)
    p_sample.set_defaults(func=cmd_sample)

    p_eval = sub.add_parser("eval", help="run the timing-accuracy protocol")
    p_eval.add_argument("--ckpt", required=True)
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--pairs", type=int, default=5)
    p_eval.add_argument("--seed", type=int)
    p_eval.add_argument("--out", required=True)
    p_eval.set_defaults(func=cmd_eval)

    p_inspect = sub.add_parser("inspect", help="print checkpoint header and counts")
    p_inspect.add_argument("--ckpt", required=True)
    p_inspect.set_defaults(func=cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"vfx: error: validation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except VfxError as exc:
        print(f"vfx: error: runtime: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"vfx: error: io: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

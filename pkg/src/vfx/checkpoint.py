"""Single-file checkpoint container.

Layout: an 8-byte magic, a little-endian uint64 header length, a UTF-8 JSON
header, then raw little-endian float32 parameter blobs in header order. The
header records the model config, each parameter's name/shape/frozen flag, and
an optional training-config snapshot. No timestamps or environment data are
stored, so identical runs produce byte-identical files.

Control-branch weights live under the `control.` name prefix; its presence in
the header toggles branch reconstruction at load time.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from vfx.backbone import DiTConfig, VideoDiT, attach_lora
from vfx.errors import ValidationError

MAGIC = b"VFXCKPT1"
FORMAT_VERSION = 1


def save_checkpoint(path: Path | str, model: VideoDiT,
                    train_config: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    state = model.state_dict()
    named_params = dict(model.named_parameters())
    params = []
    for name, tensor in state.items():
        param = named_params.get(name)
        params.append(
            {
                "name": name,
                "shape": list(tensor.shape),
                "frozen": True if param is None else not param.requires_grad,
            }
        )
    header = {
        "format_version": FORMAT_VERSION,
        "model": {
            "config": model.cfg.to_dict(),
            "strategy": model.strategy,
            "lora": model.lora_config,
            "control": model.control is not None,
        },
        "train": train_config,
        "params": params,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for spec in params:
            blob = state[spec["name"]].detach().to(torch.float32).numpy()
            fh.write(np.ascontiguousarray(blob, dtype="<f4").tobytes())
    return path


def _read_header(path: Path) -> tuple[dict, int]:
    if not path.exists():
        raise ValidationError(f"checkpoint {path} does not exist")
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValidationError(f"{path} is not a checkpoint (bad magic)")
        (header_len,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(header_len).decode("utf-8"))
    if header.get("format_version") != FORMAT_VERSION:
        raise ValidationError(
            f"unsupported checkpoint version {header.get('format_version')}"
        )
    return header, len(MAGIC) + 8 + header_len


def read_header(path: Path | str) -> dict:
    header, _ = _read_header(Path(path))
    return header


def load_checkpoint(path: Path | str) -> tuple[VideoDiT, dict]:
    """Rebuild the model described by a checkpoint and load its parameters."""
    from vfx.spatial_control import attach_control

    path = Path(path)
    header, data_offset = _read_header(path)
    model_info = header["model"]
    cfg = DiTConfig(**model_info["config"])
    model = VideoDiT(cfg, strategy=model_info["strategy"])

    if any(p["name"].startswith("control.") for p in header["params"]):
        attach_control(model)
    lora = model_info.get("lora")
    if lora:
        attach_lora(model, targets=tuple(lora["targets"]), rank=lora["rank"],
                    alpha=lora["alpha"], freeze_base=False)

    state = {}
    with open(path, "rb") as fh:
        fh.seek(data_offset)
        for spec in header["params"]:
            count = int(np.prod(spec["shape"])) if spec["shape"] else 1
            blob = fh.read(count * 4)
            if len(blob) != count * 4:
                raise ValidationError(f"checkpoint truncated at parameter {spec['name']}")
            arr = np.frombuffer(blob, dtype="<f4").reshape(spec["shape"]).copy()
            state[spec["name"]] = torch.from_numpy(arr)
    model.load_state_dict(state, strict=True)

    frozen = {p["name"]: p["frozen"] for p in header["params"]}
    for name, param in model.named_parameters():
        param.requires_grad_(not frozen.get(name, False))
    return model, header

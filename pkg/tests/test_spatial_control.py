import dataclasses

import numpy as np
import pytest
import torch

from vfx.backbone import ConditionBundle, VideoDiT, attach_lora
from vfx.conditioning import encode_text
from vfx.errors import ValidationError
from vfx.spatial_control import ControlBranch, ZeroLinear, attach_control, downsample_condition

from tests.test_backbone import TINY, tiny_inputs


def bundle_with_spatial(bundle, value=0.0, cfg=TINY, batch=2):
    spatial = torch.full(
        (batch, cfg.latent_frames, cfg.latent_height, cfg.latent_width), value
    )
    return dataclasses.replace(bundle, spatial=spatial)


class TestDownsampleCondition:
    def test_all_ones(self):
        cond = np.ones((8, 16, 16), dtype=np.uint8)
        out = downsample_condition(cond, 4, 8)
        assert out.shape == (2, 2, 2)
        assert (out == 1).all()

    def test_single_pixel_sets_single_cell(self):
        cond = np.zeros((8, 16, 16), dtype=np.uint8)
        cond[5, 9, 3] = 1
        out = downsample_condition(cond, 4, 8)
        assert out.sum() == 1
        assert out[1, 1, 0] == 1

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(0)
        cond = (rng.uniform(size=(8, 16, 16)) > 0.8).astype(np.uint8)
        out = downsample_condition(cond, 2, 4)
        for tj in range(4):
            for hj in range(4):
                for wj in range(4):
                    block = cond[tj * 2 : tj * 2 + 2, hj * 4 : hj * 4 + 4, wj * 4 : wj * 4 + 4]
                    assert out[tj, hj, wj] == block.max()

    def test_divisibility_enforced(self):
        with pytest.raises(ValidationError):
            downsample_condition(np.zeros((7, 16, 16), dtype=np.uint8), 4, 8)


class TestZeroBridgeInit:
    def test_zero_linear_outputs_zero(self):
        z = ZeroLinear(16)
        assert torch.all(z(torch.randn(4, 16)) == 0)

    def test_attach_is_identity_at_init(self):
        torch.manual_seed(0)
        base = VideoDiT(TINY, strategy="none")
        x, steps, bundle = tiny_inputs()
        base_out = base(x, steps, bundle)

        model = VideoDiT(TINY, strategy="none")
        model.load_state_dict(base.state_dict())
        attach_control(model)
        for value in (0.0, 1.0):
            out = model(x, steps, bundle_with_spatial(bundle, value))
            assert torch.allclose(out, base_out, atol=1e-6)

    def test_branch_copies_half_the_blocks(self):
        model = VideoDiT(TINY, strategy="none")
        attach_control(model)
        assert len(model.control.blocks) == 1  # ceil(2 / 2)
        assert len(model.control.bridges) == 1

    def test_missing_spatial_condition_rejected(self):
        model = VideoDiT(TINY, strategy="none")
        attach_control(model)
        x, steps, bundle = tiny_inputs()
        with pytest.raises(ValidationError):
            model(x, steps, bundle)

    def test_wrong_condition_shape_rejected(self):
        model = VideoDiT(TINY, strategy="none")
        attach_control(model)
        x, steps, bundle = tiny_inputs()
        bad = dataclasses.replace(bundle, spatial=torch.zeros(2, 2, 2, 2))
        with pytest.raises(ValidationError):
            model(x, steps, bad)

    def test_double_attach_rejected(self):
        model = VideoDiT(TINY, strategy="none")
        attach_control(model)
        with pytest.raises(ValidationError):
            attach_control(model)

    def test_lora_stripped_from_branch_copies(self):
        model = VideoDiT(TINY, strategy="none")
        attach_lora(model, rank=4, freeze_base=False)
        attach_control(model)
        names = [n for n, _ in model.control.named_parameters()]
        assert not any("lora" in n for n in names)


class TestGradientRouting:
    def test_gradients_reach_branch_not_frozen_main(self):
        torch.manual_seed(0)
        model = VideoDiT(TINY, strategy="none")
        attach_control(model)
        # Freeze the main network the way the trainer does.
        for name, p in model.named_parameters():
            p.requires_grad_(name.startswith("control."))
        # Make the bridges non-zero so gradient flows through the branch.
        with torch.no_grad():
            for bridge in model.control.bridges:
                bridge.weight.normal_(std=0.05)
        x, steps, bundle = tiny_inputs()
        out = model(x, steps, bundle_with_spatial(bundle, 1.0))
        out.pow(2).mean().backward()
        branch_grads = [
            p.grad for n, p in model.named_parameters() if n.startswith("control.")
        ]
        assert any(g is not None and g.abs().sum() > 0 for g in branch_grads)
        main_grads = [
            p.grad for n, p in model.named_parameters() if not n.startswith("control.")
        ]
        assert all(g is None for g in main_grads)

    def test_nonzero_bridges_change_output(self):
        torch.manual_seed(0)
        model = VideoDiT(TINY, strategy="none")
        x, steps, bundle = tiny_inputs()
        base_out = model(x, steps, bundle)
        attach_control(model)
        with torch.no_grad():
            for bridge in model.control.bridges:
                bridge.weight.normal_(std=0.1)
        out = model(x, steps, bundle_with_spatial(bundle, 1.0))
        assert not torch.allclose(out, base_out, atol=1e-6)

    def test_residual_tracking_starts_at_zero(self):
        torch.manual_seed(0)
        model = VideoDiT(TINY, strategy="none")
        attach_control(model)
        x, steps, bundle = tiny_inputs()
        model(x, steps, bundle_with_spatial(bundle, 1.0))
        assert model.last_control_residual == 0.0
        with torch.no_grad():
            for bridge in model.control.bridges:
                bridge.weight.normal_(std=0.1)
        model(x, steps, bundle_with_spatial(bundle, 1.0))
        assert model.last_control_residual > 0.0

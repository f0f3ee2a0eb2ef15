import numpy as np
import pytest

from habitmotion.nk.gradcheck import gradcheck, make_inputs
from habitmotion.nk.losses import cross_entropy, smooth_l1
from habitmotion.nk.optim import AdamW, NonFiniteGradientError, adamw_step
from habitmotion.nk.tensor import Parameter, Tensor


def _param(value, name="p"):
    return Parameter(np.asarray(value, dtype=np.float64), name)


class TestAdamW:
    def test_single_step_reference_arithmetic(self):
        # m=0.1, v=0.001, bias-corrected to (1.0, 1.0): step = lr/(1+eps).
        p = _param([1.0])
        opt = AdamW([p], lr=0.1)
        p.grad = np.array([1.0])
        adamw_step(opt)
        assert abs(p.data[0] - 0.9) < 1e-6
        assert opt.step_count == 1

    def test_zero_gradient_leaves_parameter(self):
        p = _param([2.5])
        opt = AdamW([p], lr=0.1)
        p.grad = np.zeros(1)
        opt.step()
        assert p.data[0] == 2.5

    def test_decoupled_decay_shrinks_without_gradient(self):
        p = _param([2.0])
        opt = AdamW([p], lr=0.1, weight_decay=0.5)
        p.grad = np.zeros(1)
        opt.step()
        assert np.isclose(p.data[0], 2.0 * (1.0 - 0.1 * 0.5))

    def test_lr_zero_is_identity(self):
        p = _param(np.arange(4.0))
        opt = AdamW([p], lr=0.0)
        p.grad = np.ones(4)
        opt.step()
        assert np.array_equal(p.data, np.arange(4.0))

    def test_zero_epsilon_rejected(self):
        with pytest.raises(ValueError, match="epsilon"):
            AdamW([_param([1.0])], lr=0.1, eps=0.0)

    def test_bad_betas_rejected(self):
        with pytest.raises(ValueError, match="betas"):
            AdamW([_param([1.0])], lr=0.1, betas=(1.0, 0.999))

    def test_non_finite_gradient_aborts_atomically(self):
        a, b = _param([1.0], "a"), _param([1.0], "b")
        opt = AdamW([a, b], lr=0.1)
        a.grad = np.array([1.0])
        b.grad = np.array([np.nan])
        with pytest.raises(NonFiniteGradientError, match="b"):
            opt.step()
        assert a.data[0] == 1.0  # no partial update
        assert opt.step_count == 0

    def test_missing_gradient_rejected(self):
        p = _param([1.0])
        opt = AdamW([p], lr=0.1)
        with pytest.raises(NonFiniteGradientError, match="not populated"):
            opt.step()

    def test_two_steps_match_hand_rollout(self):
        p = _param([1.0])
        opt = AdamW([p], lr=0.1)
        theta, m, v = 1.0, 0.0, 0.0
        for t in (1, 2):
            g = theta  # pretend loss 0.5 p^2
            p.grad = np.array([g])
            opt.step()
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            mh = m / (1 - 0.9**t)
            vh = v / (1 - 0.999**t)
            theta = theta - 0.1 * mh / (np.sqrt(vh) + 1e-8)
            assert np.isclose(p.data[0], theta, rtol=0, atol=1e-15)


class TestSmoothL1:
    def test_zero_difference(self):
        x = Tensor(np.ones(5))
        assert smooth_l1(x, Tensor(np.ones(5))).data == 0.0

    def test_quadratic_branch(self):
        # 0.5 * 0.5^2 / 1 = 0.125
        assert np.isclose(smooth_l1(Tensor([0.5]), Tensor([0.0]), 1.0).data, 0.125)

    def test_linear_branch(self):
        # |2| - 0.5 = 1.5
        assert np.isclose(smooth_l1(Tensor([2.0]), Tensor([0.0]), 1.0).data, 1.5)

    def test_threshold_scales_quadratic_zone(self):
        assert np.isclose(smooth_l1(Tensor([0.5]), Tensor([0.0]), 2.0).data, 0.0625)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            smooth_l1(Tensor(np.zeros(3)), Tensor(np.zeros(4)))

    def test_gradient_both_branches(self):
        pred, target = make_inputs(5, (9,), (9,), scale=2.0)
        target.requires_grad = False
        assert gradcheck(lambda a, b: smooth_l1(a, b, 1.0), [pred, target]) < 1e-6


def test_cross_entropy_matches_manual():
    logits = Tensor(np.array([[2.0, 0.0, -1.0], [0.0, 1.0, 0.5]]))
    labels = [0, 2]
    value = float(cross_entropy(logits, labels).data)
    manual = 0.0
    for row, lab in zip(logits.data, labels):
        manual -= row[lab] - np.log(np.exp(row).sum())
    assert np.isclose(value, manual / 2)


def test_cross_entropy_gradient():
    (logits,) = make_inputs(6, (4, 3))
    labels = np.array([0, 1, 2, 1])
    assert gradcheck(lambda x: cross_entropy(x, labels), [logits]) < 1e-6

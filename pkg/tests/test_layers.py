import numpy as np
import pytest

from habitmotion.nk import tensor as T
from habitmotion.nk.gradcheck import gradcheck, make_inputs
from habitmotion.nk.layers import (
    Conv1d,
    Init,
    LayerNorm,
    Linear,
    MultiHeadAttention,
    ResBlock1d,
    TransformerEncoder,
    conv1d,
    resolve_same_padding,
    upsample_nearest,
)
from habitmotion.nk.tensor import Tensor

INIT = Init(11)


def test_conv_identity_kernel_stride1():
    x = Tensor(np.random.default_rng(0).standard_normal((1, 2, 9)))
    w = Tensor(np.eye(2)[:, :, None])  # k=1 identity across channels
    b = Tensor(np.zeros(2))
    y = conv1d(x, w, b, stride=1, dilation=1, padding="same")
    assert np.allclose(y.data, x.data)


def test_conv_output_length_formula_all_lengths():
    rng = np.random.default_rng(1)
    for stride in (1, 2, 3, 4):
        for dilation in (1, 2, 3):
            for k in (1, 3, 4):
                w = Tensor(rng.standard_normal((2, 1, k)))
                b = Tensor(np.zeros(2))
                for length in range(1, 65):
                    x = Tensor(rng.standard_normal((1, 1, length)))
                    y = conv1d(x, w, b, stride=stride, dilation=dilation, padding="same")
                    assert y.data.shape[2] == -(-length // stride), (
                        stride, dilation, k, length, y.data.shape,
                    )


def test_conv_invalid_stride_dilation():
    x = Tensor(np.zeros((1, 1, 4)))
    w = Tensor(np.zeros((1, 1, 3)))
    b = Tensor(np.zeros(1))
    with pytest.raises(ValueError):
        conv1d(x, w, b, stride=0)
    with pytest.raises(ValueError):
        conv1d(x, w, b, dilation=0)


def test_conv_channel_mismatch():
    x = Tensor(np.zeros((1, 2, 4)))
    w = Tensor(np.zeros((1, 3, 3)))
    with pytest.raises(ValueError, match="channel"):
        conv1d(x, w, Tensor(np.zeros(1)))


@pytest.mark.parametrize("stride,dilation", [(1, 1), (2, 1), (1, 3), (2, 3)])
def test_conv_gradients(stride, dilation):
    conv = Conv1d(INIT, "c", 3, 4, 4, stride=stride, dilation=dilation)
    (x,) = make_inputs(2, (2, 3, 10))
    err = gradcheck(
        lambda x, w, b: (conv1d(x, w, b, stride, dilation, "same") ** 2.0).sum(),
        [x, conv.w, conv.b],
    )
    assert err < 1e-6


def test_resolve_same_padding_matches_ceil():
    for length in range(1, 30):
        pl, pr = resolve_same_padding(length, 4, 2, 1)
        keff = 4
        assert (length + pl + pr - keff) // 2 + 1 == -(-length // 2)


def test_upsample_nearest_values_and_gradient():
    x = Tensor(np.array([[[1.0, 2.0]]]), requires_grad=True)
    y = upsample_nearest(x, 2)
    assert np.allclose(y.data, [[[1.0, 1.0, 2.0, 2.0]]])
    (x2,) = make_inputs(4, (2, 3, 5))
    assert gradcheck(lambda x: (upsample_nearest(x, 3) ** 2.0).sum(), [x2]) < 1e-6


def test_residual_block_gradients_and_shape():
    block = ResBlock1d(INIT, "rb", 3, dilation=3)
    (x,) = make_inputs(5, (2, 3, 8))
    y = block(x)
    assert y.data.shape == x.data.shape
    assert gradcheck(lambda *a: (block(a[0]) ** 2.0).sum(), [x] + block.parameters()) < 1e-6


def test_layernorm_gradients_and_normalization():
    ln = LayerNorm(INIT, "ln", 6)
    (x,) = make_inputs(6, (2, 4, 6), scale=3.0)
    y = ln(x)
    assert np.allclose(y.data.mean(axis=-1), 0.0, atol=1e-10)
    assert gradcheck(lambda *a: (ln(a[0]) ** 2.0).sum(), [x, ln.gamma, ln.beta]) < 1e-6


def test_attention_single_token_is_value_projection():
    att = MultiHeadAttention(INIT, "att", 8, 2)
    x = Tensor(np.random.default_rng(3).standard_normal((1, 1, 8)))
    with T.no_grad():
        out = att(x)
        expected = att.wo(att.wv(x))
    assert np.allclose(out.data, expected.data)


def test_attention_gradients():
    att = MultiHeadAttention(INIT, "a2", 8, 2)
    (x,) = make_inputs(8, (2, 3, 8))
    err = gradcheck(lambda *a: (att(a[0]) ** 2.0).sum(), [x] + att.parameters())
    assert err < 1e-6


def test_attention_head_divisibility():
    with pytest.raises(ValueError, match="divisible"):
        MultiHeadAttention(INIT, "bad", 9, 2)


def test_transformer_encoder_gradients_and_finiteness():
    enc = TransformerEncoder(INIT, "enc", 5, 8, 2, 2)
    (x,) = make_inputs(9, (2, 6, 5), scale=10.0)
    pooled = enc(x)
    assert pooled.data.shape == (2, 8)
    assert np.all(np.isfinite(pooled.data))
    (xs,) = make_inputs(10, (1, 3, 5))
    assert gradcheck(lambda *a: (enc(a[0]) ** 2.0).sum(), [xs] + enc.parameters()) < 1e-6


def test_outputs_finite_for_extreme_inputs():
    rng = np.random.default_rng(12)
    assert np.all(np.isfinite(T.relu(Tensor(rng.standard_normal((2, 3, 6)) * 1e6)).data))
    ln = LayerNorm(INIT, "ln2", 6)
    assert np.all(np.isfinite(ln(Tensor(rng.standard_normal((4, 6)) * 1e6)).data))
    att = MultiHeadAttention(INIT, "a3", 8, 2)
    assert np.all(np.isfinite(att(Tensor(rng.standard_normal((1, 4, 8)) * 100.0)).data))


def test_linear_kaiming_init_deterministic():
    a = Linear(Init(3), "same.name", 6, 4)
    b = Linear(Init(3), "same.name", 6, 4)
    c = Linear(Init(4), "same.name", 6, 4)
    assert np.array_equal(a.w.data, b.w.data)
    assert not np.array_equal(a.w.data, c.w.data)
    assert np.allclose(a.b.data, 0.0)

"""
자동미분 엔진 테스트

gradient 검사는 precision(np.float64) 안에서 수행합니다.
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from src.autodiff import Adam, Graph, OptimizerState, Tensor, backward, grad_check, numeric_gradient
from src.autodiff import functional as F
from src.autodiff import optimizer_step, precision
from src.errors import ContractError, DimensionError


def _weights(shape, seed=0):
    return np.random.default_rng(seed).normal(size=shape)


class TestTensorBasics:
    def test_default_dtype_is_float32(self):
        assert Tensor([1.0, 2.0]).dtype == np.float32

    def test_precision_context_restores_dtype(self):
        with precision(np.float64):
            assert Tensor([1.0]).dtype == np.float64
        assert Tensor([1.0]).dtype == np.float32

    def test_graph_not_recorded_without_requires_grad(self):
        out = F.tanh(F.add(Tensor(np.ones(3)), Tensor(np.ones(3))))
        assert out.is_leaf
        assert len(Graph.from_output(out)) == 0

    def test_backward_rejects_non_scalar(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with pytest.raises(ContractError):
            backward(F.tanh(x))

    def test_item(self):
        assert Tensor([[2.5]]).item() == 2.5
        with pytest.raises(ContractError):
            Tensor(np.ones(3)).item()

    def test_backward_on_constant_loss_is_noop(self):
        loss = F.sum(Tensor(np.ones(3)))
        backward(loss)
        assert loss.grad is None

    def test_diamond_graph_gradient(self):
        # y = x*x + x  ->  dy/dx = 2x + 1
        with precision(np.float64):
            x = Tensor(np.array([1.5, -2.0]), requires_grad=True)
            loss = F.sum(F.add(F.mul(x, x), x))
            backward(loss)
        np.testing.assert_allclose(x.grad, [4.0, -3.0])

    def test_grad_accumulates_across_backward_calls(self):
        x = Tensor(np.ones(2), requires_grad=True)
        backward(F.sum(x))
        backward(F.sum(x))
        np.testing.assert_allclose(x.grad, [2.0, 2.0])

    def test_operators_match_functional(self):
        a = Tensor(np.array([1.0, 2.0]))
        b = Tensor(np.array([3.0, 5.0]))
        np.testing.assert_allclose((a + b).data, [4.0, 7.0])
        np.testing.assert_allclose((a - b).data, [-2.0, -3.0])
        np.testing.assert_allclose((a * 2).data, [2.0, 4.0])
        np.testing.assert_allclose((-a).data, [-1.0, -2.0])

    @pytest.mark.parametrize('fn, other, expected', [
        ('relu', None, [0.0, 2.0]),
        ('add', np.array([1.0, 1.0]), [0.0, 3.0]),
        ('sub', np.array([1.0, 1.0]), [-2.0, 1.0]),
        ('mul', np.array([3.0, 0.5]), [-3.0, 1.0]),
        ('scale', 2.0, [-2.0, 4.0]),
    ])
    def test_elementwise_by_name(self, fn, other, expected):
        np.testing.assert_allclose(F.elementwise(Tensor([-1.0, 2.0]), fn, other).data, expected)

    @pytest.mark.parametrize('fn, other', [('sigmoid', None), ('add', None)])
    def test_elementwise_rejects(self, fn, other):
        with pytest.raises(ContractError):
            F.elementwise(Tensor([1.0]), fn, other)


class TestShapeErrors:
    def test_matmul_inner_dimension(self):
        with pytest.raises(DimensionError, match=r"\(2, 3\).*\(4, 5\)"):
            F.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 5))))

    def test_add_rejects_unrelated_shapes(self):
        with pytest.raises(DimensionError):
            F.add(Tensor(np.ones((2, 3))), Tensor(np.ones((3, 2))))

    def test_bias_broadcast_allowed(self):
        out = F.add(Tensor(np.zeros((4, 3))), Tensor(np.arange(3.0)))
        np.testing.assert_allclose(out.data[2], [0.0, 1.0, 2.0])

    def test_conv_channel_mismatch(self):
        with pytest.raises(DimensionError):
            F.conv2d(Tensor(np.ones((1, 5, 5, 2))), Tensor(np.ones((3, 3, 1, 4))))

    def test_transpose_geometry_mismatch(self):
        with pytest.raises(DimensionError):
            F.conv2d_transpose(Tensor(np.ones((1, 4, 4, 2))), Tensor(np.ones((3, 3, 1, 2))), 2, (28, 28, 1))

    def test_bad_stride_and_padding(self):
        with pytest.raises(ContractError):
            F.conv_geometry(28, 28, 3, 3, 0, 'same')
        with pytest.raises(ContractError):
            F.conv_geometry(28, 28, 3, 3, 1, 'full')


class TestConvGeometry:
    @pytest.mark.parametrize('in_hw, k, stride, padding, out_hw', [
        (28, 5, 2, 'same', 14),
        (14, 5, 2, 'same', 7),
        (7, 3, 2, 'same', 4),
        (28, 4, 1, 'same', 28),
        (28, 3, 1, 'valid', 26),
        (28, 5, 2, 'valid', 12),
    ])
    def test_output_size(self, in_hw, k, stride, padding, out_hw):
        (h, w), _, _ = F.conv_geometry(in_hw, in_hw, k, k, stride, padding)
        assert (h, w) == (out_hw, out_hw)

    def test_same_padding_extra_goes_bottom_right(self):
        _, pad_h, pad_w = F.conv_geometry(28, 28, 4, 4, 1, 'same')
        assert pad_h == (1, 2) and pad_w == (1, 2)

    def test_conv_matches_direct_loop(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(2, 5, 5, 3))
        k = rng.normal(size=(3, 3, 3, 4))
        with precision(np.float64):
            out = F.conv2d(Tensor(x), Tensor(k), stride=1, padding='valid').data
        expected = np.zeros((2, 3, 3, 4))
        for i in range(3):
            for j in range(3):
                expected[:, i, j, :] = np.tensordot(x[:, i:i + 3, j:j + 3, :], k, axes=([1, 2, 3], [0, 1, 2]))
        np.testing.assert_allclose(out, expected, rtol=1e-10)


class TestGradCheck:
    """해석적 gradient 와 중앙 차분 비교 (상대 오차 1e-3 이하)"""

    def _check(self, fn, x):
        with precision(np.float64):
            assert grad_check(fn, x, eps=1e-6) <= 1e-3

    def test_tanh_mul_sum(self):
        w = _weights((3, 4), seed=1)
        self._check(lambda x: F.sum(F.mul(F.tanh(x), Tensor(w))), _weights((3, 4), seed=2) * 0.5)

    def test_relu_away_from_kink(self):
        x = np.array([[0.7, -0.4, 1.3], [-1.1, 0.5, 0.9]])
        w = _weights((2, 3), seed=3)
        self._check(lambda t: F.sum(F.mul(F.relu(t), Tensor(w))), x)

    def test_matmul_both_sides(self):
        a = _weights((3, 4), seed=4)
        b = _weights((4, 2), seed=5)
        self._check(lambda t: F.sum(F.tanh(F.matmul(t, Tensor(b)))), a)
        self._check(lambda t: F.sum(F.tanh(F.matmul(Tensor(a), t))), b)

    @pytest.mark.parametrize('stride, padding', [(1, 'same'), (2, 'same'), (1, 'valid'), (2, 'valid')])
    def test_conv2d_input_and_kernel(self, stride, padding):
        x = _weights((2, 6, 6, 2), seed=6)
        k = _weights((3, 3, 2, 3), seed=7) * 0.3
        (h, w), _, _ = F.conv_geometry(6, 6, 3, 3, stride, padding)
        proj = _weights((2, h, w, 3), seed=8)
        self._check(lambda t: F.sum(F.mul(F.conv2d(t, Tensor(k), stride, padding), Tensor(proj))), x)
        self._check(lambda t: F.sum(F.mul(F.conv2d(Tensor(x), t, stride, padding), Tensor(proj))), k)

    @pytest.mark.parametrize('in_hw, out_hw, stride', [(4, 7, 2), (7, 14, 2), (5, 5, 1)])
    def test_conv2d_transpose_input_and_kernel(self, in_hw, out_hw, stride):
        x = _weights((2, in_hw, in_hw, 3), seed=9)
        k = _weights((3, 3, 2, 3), seed=10) * 0.3
        proj = _weights((2, out_hw, out_hw, 2), seed=11)

        def through_input(t):
            return F.sum(F.mul(F.conv2d_transpose(t, Tensor(k), stride, (out_hw, out_hw, 2)), Tensor(proj)))

        def through_kernel(t):
            return F.sum(F.mul(F.conv2d_transpose(Tensor(x), t, stride, (out_hw, out_hw, 2)), Tensor(proj)))

        self._check(through_input, x)
        self._check(through_kernel, k)

    def test_softmax_and_l2(self):
        target = np.full((2, 5), 0.2)
        self._check(lambda t: F.l2_loss(F.softmax(t), Tensor(target)), _weights((2, 5), seed=12))

    def test_cross_entropy(self):
        labels = np.array([1, 4, 0])
        self._check(lambda t: F.softmax_cross_entropy(t, labels), _weights((3, 5), seed=13))

    def test_concat_reshape_mean(self):
        other = _weights((2, 2), seed=14)

        def fn(t):
            joined = F.concat([F.flatten(t), Tensor(other)], axis=1)
            return F.mean(F.tanh(F.reshape(joined, (2, 3, 2))))

        self._check(fn, _weights((2, 2, 2), seed=15))


class TestAdjoint:
    """<conv(x), y> == <x, conv_transpose(y)>"""

    @pytest.mark.parametrize('hw, stride, padding', [(28, 2, 'same'), (14, 2, 'same'), (7, 2, 'same'),
                                                     (9, 1, 'valid'), (10, 3, 'same')])
    def test_conv_transpose_is_adjoint(self, hw, stride, padding):
        rng = np.random.default_rng(hw)
        k = rng.normal(size=(3, 3, 2, 4))
        x = rng.normal(size=(2, hw, hw, 2))
        with precision(np.float64):
            y_shape = F.conv2d(Tensor(x), Tensor(k), stride, padding).shape
            y = rng.normal(size=y_shape)
            lhs = np.sum(F.conv2d(Tensor(x), Tensor(k), stride, padding).data * y)
            rhs = np.sum(x * F.conv2d_transpose(Tensor(y), Tensor(k), stride, (hw, hw, 2), padding).data)
        assert abs(lhs - rhs) <= 1e-4 * max(1.0, abs(lhs))


class TestSoftmax:
    @given(arrays(np.float64, (3, 10), elements=st.floats(-50, 50)))
    def test_rows_are_distributions(self, logits):
        with precision(np.float64):
            p = F.softmax(Tensor(logits)).data
        assert np.all(p >= 0)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)

    def test_large_logits_stay_finite(self):
        p = F.softmax(Tensor(np.array([[1000.0, 0.0, -1000.0]]))).data
        assert np.all(np.isfinite(p))
        assert p[0, 0] == pytest.approx(1.0)

    def test_nan_logits_rejected(self):
        with pytest.raises(ContractError):
            F.softmax(Tensor(np.array([[np.nan, 0.0]])))


class TestAdam:
    def test_first_step_moves_by_lr(self):
        # bias correction 후 첫 스텝 크기는 lr * sign(g)
        p = Tensor(np.array([1.0, -1.0]), requires_grad=True)
        p.grad = np.array([0.3, -5.0], dtype=np.float32)
        Adam(lr=0.01).step({'p': p})
        np.testing.assert_allclose(p.data, [0.99, -0.99], rtol=1e-5)
        assert p.grad is None

    def test_missing_grad_is_contract_error(self):
        p = Tensor(np.ones(2), requires_grad=True)
        with pytest.raises(ContractError):
            optimizer_step(OptimizerState(), {'p': p})

    def test_identical_params_stay_identical(self):
        a = Tensor(np.array([0.5, 0.2]), requires_grad=True)
        b = Tensor(np.array([0.5, 0.2]), requires_grad=True)
        opt = Adam(lr=0.05)
        for step in range(5):
            g = np.array([0.1 * step - 0.2, 0.3], dtype=np.float32)
            a.grad, b.grad = g.copy(), g.copy()
            opt.step({'a': a, 'b': b})
        np.testing.assert_array_equal(a.data, b.data)
        assert opt.steps == 5

    def test_minimizes_quadratic(self):
        w = Tensor(np.array([3.0, -2.0]), requires_grad=True)
        opt = Adam(lr=0.1)
        for _ in range(300):
            backward(F.sum(F.mul(w, w)))
            opt.step({'w': w})
        assert np.all(np.abs(w.data) < 0.1)


def test_numeric_gradient_of_linear_function():
    coeffs = np.array([1.0, -2.0, 0.5])
    with precision(np.float64):
        grad = numeric_gradient(lambda t: F.sum(F.mul(t, Tensor(coeffs))), np.zeros(3), eps=1e-4)
    np.testing.assert_allclose(grad, coeffs, atol=1e-8)

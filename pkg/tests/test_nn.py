import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from biview import nn

from gradutil import params_grad_error


def test_forward_examples():
    eye = nn.DenseLayer(np.eye(3), np.zeros(3), "identity")
    x = np.array([1.5, -2.0, 0.25])
    assert np.array_equal(eye.forward(x), x)
    sig = nn.DenseLayer(np.ones((4, 3)), np.zeros(4), "sigmoid")
    assert np.array_equal(sig.forward(np.zeros(3)), np.full(4, 0.5))
    rel = nn.DenseLayer(np.eye(2), np.zeros(2), "relu")
    assert rel.forward(np.array([-1.0, 2.0])).tolist() == [0.0, 2.0]


def test_shape_errors():
    layer = nn.DenseLayer.init(3, 2)
    with pytest.raises(nn.ShapeError):
        layer.forward(np.zeros(4))
    with pytest.raises(nn.ShapeError):
        nn.DenseLayer(np.zeros((2, 3)), np.zeros(3))
    with pytest.raises(nn.ShapeError):
        nn.MLP([nn.DenseLayer.init(3, 2), nn.DenseLayer.init(3, 2)])
    with pytest.raises(ValueError):
        nn.DenseLayer(np.zeros((2, 3)), np.zeros(2), "tanh")


def test_glorot_bounds(rng):
    w = nn.glorot(30, 50, rng)
    assert w.shape == (30, 50)
    assert np.abs(w).max() <= np.sqrt(6 / 80)


def test_softmax_xent_examples():
    for k in (2, 5, 17):
        loss, _ = nn.softmax_xent(np.full(k, 3.3), 1)
        assert loss == pytest.approx(np.log(k), abs=1e-14)
    loss, grad = nn.softmax_xent(np.array([1000.0, 0.0]), 0)
    assert np.isfinite(loss) and loss < 1e-300 + 1e-12
    assert np.all(np.isfinite(grad))


def test_softmax_xent_grad(rng):
    for _ in range(10):
        z = rng.normal(size=4)
        t = int(rng.integers(4))
        assert nn.grad_check(lambda x: nn.softmax_xent(x, t), z) < 1e-6


def test_batch_xent_is_mean_of_rows(rng):
    z = rng.normal(size=(6, 3))
    t = rng.integers(0, 3, 6)
    loss, grad = nn.softmax_xent_batch(z, t)
    rows = [nn.softmax_xent(z[i], int(t[i])) for i in range(6)]
    assert loss == pytest.approx(np.mean([r[0] for r in rows]))
    assert np.allclose(grad, np.array([r[1] for r in rows]) / 6)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 8), elements=st.floats(-50, 50)))
def test_softmax_properties(z):
    p = nn.softmax(z)
    assert abs(p.sum() - 1) < 1e-12 and np.all((p >= 0) & (p <= 1))
    for t in range(z.size):
        assert nn.softmax_xent(z, t)[0] >= 0


def test_grad_check_linear_layer(rng):
    layer = nn.DenseLayer.init(5, 3, "identity", rng)
    x = rng.normal(size=(4, 5))
    c = rng.normal(size=(4, 3))

    def loss():
        y, cache = layer.forward(x, return_cache=True)
        _, g = layer.backward(c, cache)
        return float((y * c).sum()), g

    assert params_grad_error(layer.params(), loss) < 1e-8


def test_grad_check_sigmoid_mlp(rng):
    for _ in range(10):
        mlp = nn.MLP.init([4, 6, 3], "sigmoid", "sigmoid", rng)
        x = rng.normal(size=(5, 4))
        c = rng.normal(size=(5, 3))

        def loss():
            y, caches = mlp.forward(x, return_cache=True)
            _, g = mlp.backward(c, caches)
            return float((y * c).sum()), g

        assert params_grad_error(mlp.params(), loss, eps=1e-5) < 1e-4


def test_grad_check_softmax_xent_end_to_end(rng):
    for _ in range(10):
        mlp = nn.MLP.init([4, 5, 3], "sigmoid", "identity", rng)
        x = rng.normal(size=(7, 4))
        t = rng.integers(0, 3, 7)

        def loss():
            y, caches = mlp.forward(x, return_cache=True)
            lv, dy = nn.softmax_xent_batch(y, t)
            return lv, mlp.backward(dy, caches)[1]

        assert params_grad_error(mlp.params(), loss) < 1e-5


def test_input_gradient(rng):
    mlp = nn.MLP.init([3, 4, 2], "sigmoid", "identity", rng)
    c = rng.normal(size=2)

    def fn(x):
        y, caches = mlp.forward(x, return_cache=True)
        return float(y @ c), mlp.backward(c, caches)[0]

    assert nn.grad_check(fn, rng.normal(size=3)) < 1e-6


def test_sgd_step():
    p = [np.array([1.0])]
    nn.step(nn.OptimizerState("sgd", 0.1), p, [np.array([1.0])])
    assert p[0][0] == pytest.approx(0.9)


@pytest.mark.parametrize("alg", ["sgd", "adam"])
def test_zero_gradient_is_fixed_point(alg):
    p = [np.array([1.0, -2.0]), np.array([[3.0]])]
    before = [x.copy() for x in p]
    opt = nn.OptimizerState(alg, 0.1)
    for _ in range(5):
        nn.step(opt, p, [np.zeros(2), np.zeros((1, 1))])
    assert all(np.array_equal(a, b) for a, b in zip(p, before))


def test_adam_quadratic():
    p = [np.array([1.0])]
    opt = nn.OptimizerState("adam", 0.05)
    for i in range(500):
        nn.step(opt, p, [2 * p[0]])
        if abs(p[0][0]) < 0.01:
            break
    assert abs(p[0][0]) < 0.01 and i < 500


def test_adam_first_step_is_lr_sized():
    p = [np.array([0.0, 0.0])]
    nn.step(nn.OptimizerState("adam", 0.01), p, [np.array([3.0, -1e-3])])
    assert np.allclose(p[0], [-0.01, 0.01], rtol=1e-4)


def test_step_shape_checks():
    with pytest.raises(nn.ShapeError):
        nn.step(nn.OptimizerState(), [np.zeros(2)], [np.zeros(3)])
    with pytest.raises(ValueError):
        nn.OptimizerState("rmsprop")


def test_deterministic_forward(rng):
    mlp = nn.MLP.init([4, 8, 2], rng=rng)
    x = rng.normal(size=(3, 4))
    assert np.array_equal(mlp.forward(x), mlp.forward(x))


def test_checkpoint_round_trip(tmp_path, rng):
    mlp = nn.MLP.init([4, 8, 2], rng=rng)
    nn.save_checkpoint(tmp_path / "m.json", {"enc": mlp.layers}, {"note": 1})
    groups, meta = nn.load_checkpoint(tmp_path / "m.json")
    assert meta == {"note": 1}
    for a, b in zip(groups["enc"], mlp.layers):
        assert np.array_equal(a.weight, b.weight) and np.array_equal(a.bias, b.bias)
        assert a.activation == b.activation

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from biview import nn
from biview.embedding import EmbeddingMatrix
from biview.fusion import (
    FusionHyper,
    FusionNet,
    GatedFusion,
    concat_views,
    fusionnet_train,
    gated_fuse,
    gated_loss,
    hard_labels,
    predict,
    train_gated,
)

from gradutil import params_grad_error
from tasks import linear_probe_accuracy, separable_and_noise, xor_views


def gate(d, w=None, b=0.0):
    return GatedFusion(np.zeros(2 * d) if w is None else w, b)


def test_zero_gate_averages(rng):
    a, s = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
    fused, alpha = gated_fuse(a, s, GatedFusion.init(3, 3))
    assert np.all(alpha == 0.5)
    assert np.allclose(fused.values, (a + s) / 2, atol=1e-15)
    assert fused.role == "fused"


def test_saturated_gate(rng):
    a, s = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
    fused, _ = gated_fuse(a, s, gate(3, b=50.0))
    assert np.max(np.abs(fused.values - a)) <= 1e-15
    fused, _ = gated_fuse(a, s, gate(3, b=-50.0))
    assert np.max(np.abs(fused.values - s)) <= 1e-15


def test_quarter_gate_example():
    fused, alpha = gated_fuse(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]), gate(2, b=-np.log(3.0)))
    assert alpha[0] == pytest.approx(0.25, abs=1e-15)
    assert fused.values[0] == pytest.approx([0.25, 0.75], abs=1e-15)


def test_exact_endpoints():
    # alpha of exactly 1 and 0 (saturated in float64) reproduce each view bit-for-bit
    a = np.array([[0.1, 0.2, 0.3]])
    s = np.array([[7.0, -1.0, 1e-9]])
    assert np.array_equal(gated_fuse(a, s, gate(3, b=80.0))[0].values, a)
    assert np.array_equal(gated_fuse(a, s, gate(3, b=-80.0))[0].values, s)


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, (4, 3), elements=st.floats(-10, 10)),
    arrays(np.float64, (4, 3), elements=st.floats(-10, 10)),
    arrays(np.float64, 6, elements=st.floats(-3, 3)),
    st.floats(-5, 5),
)
def test_fused_rows_are_convex(a, s, w, b):
    fused, alpha = gated_fuse(a, s, gate(3, w, b))
    assert np.all((alpha >= 0) & (alpha <= 1))
    lo, hi = np.minimum(a, s), np.maximum(a, s)
    tol = 1e-12 * (1 + np.abs(a) + np.abs(s))
    assert np.all(fused.values >= lo - tol) and np.all(fused.values <= hi + tol)


def test_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        gated_fuse(rng.normal(size=(3, 4)), rng.normal(size=(3, 2)), GatedFusion(np.zeros(6)))
    with pytest.raises(ValueError):
        gated_fuse(rng.normal(size=(3, 4)), rng.normal(size=(2, 4)), GatedFusion.init(4, 4))


def test_projection_for_unequal_views(rng):
    g = GatedFusion.init(6, 4, rng)
    assert g.proj_view == "n2v" and g.proj.n_in == 6 and g.proj.n_out == 4
    fused, _ = gated_fuse(rng.normal(size=(5, 6)), rng.normal(size=(5, 4)), g)
    assert fused.dim == 4


@pytest.mark.parametrize("dims", [(3, 3), (5, 3), (3, 4)])
def test_gated_gradient(rng, dims):
    d1, d2 = dims
    for _ in range(10):
        a, s = rng.normal(size=(8, d1)), rng.normal(size=(8, d2))
        g = GatedFusion.init(d1, d2, rng)
        g.w[:] = rng.normal(scale=0.5, size=g.w.shape)
        g.b[:] = rng.normal()
        head = nn.DenseLayer.init(min(d1, d2), 3, "identity", rng)
        nodes = np.array([0, 2, 3, 5, 7])
        tg = rng.integers(0, 3, nodes.size)
        params = g.params() + head.params()
        err = params_grad_error(params, lambda: gated_loss(g, head, a, s, nodes, tg))
        assert err < 1e-4


def mean_alpha_shift(informative_view, seeds=range(5)):
    shifts = []
    for seed in seeds:
        good, noise, y = separable_and_noise(seed)
        a, s = (good, noise) if informative_view == "n2v" else (noise, good)
        res = train_gated(a, s, y, np.arange(y.size), FusionHyper(epochs=100, seed=seed))
        assert np.all((res.alpha > 0) & (res.alpha < 1))
        shifts.append(res.alpha.mean() - 0.5)
    return float(np.mean(shifts))


def test_alpha_moves_toward_informative_view():
    assert mean_alpha_shift("n2v") >= 0.1
    assert mean_alpha_shift("sage") <= -0.1


def test_train_gated_loss_and_errors():
    good, noise, y = separable_and_noise(0)
    res = train_gated(good, noise, y, np.arange(150), FusionHyper(epochs=30))
    assert res.losses[-1] < res.losses[0]
    with pytest.raises(ValueError):
        train_gated(good, noise, y, [])
    with pytest.raises(ValueError):
        train_gated(good, noise, np.full(y.size, -1), [0, 1])


def test_fusionnet_dimensions(rng):
    net = FusionNet.init(128, 4)
    assert net.in_dim == 128 and net.out_dim == 64
    assert [l.n_out for l in net.encoder.layers] == [128, 64]
    assert net.encoder.layers[0].activation == "relu"
    assert concat_views(rng.normal(size=(3, 64)), rng.normal(size=(3, 64))).shape == (3, 128)
    with pytest.raises(ValueError):
        FusionNet.init(32, 2, hidden=16, out_dim=32)


def test_fusionnet_gradient(rng):
    for _ in range(10):
        net = FusionNet.init(6, 3, hidden=5, out_dim=4, rng=rng)
        z = rng.normal(size=(10, 6))
        tg = rng.integers(0, 3, 10)
        assert params_grad_error(net.params(), lambda: net.loss(z, tg)) < 1e-4


def test_fusionnet_separable_training_accuracy():
    good, _, y = separable_and_noise(1, classes=2)
    other = np.random.default_rng(1).normal(size=good.shape)
    res = fusionnet_train(good, other, y, np.arange(y.size), FusionHyper(hidden=16, out_dim=4))
    probs = predict(res.net, good, other)
    assert np.allclose(probs.sum(axis=1), 1.0)
    assert res.embedding.role == "enhanced" and res.embedding.dim == 4
    assert np.mean(hard_labels(probs) == y) == 1.0
    assert np.array_equal(probs, predict(res.net, good, other))


def test_predict_deterministic_and_gated(rng):
    good, noise, y = separable_and_noise(2, classes=2)
    g = train_gated(good, noise, y, np.arange(y.size), FusionHyper(epochs=60))
    p1 = predict(g, good, noise)
    p2 = predict(g.gate, good, noise, head=g.head)
    assert np.array_equal(p1, p2) and np.allclose(p1.sum(axis=1), 1.0)
    assert np.mean(hard_labels(p1) == y) == 1.0
    with pytest.raises(ValueError):
        predict(g.gate, good, noise)


def test_hard_labels_tie_lowest_index():
    assert hard_labels(np.array([[0.5, 0.5], [0.2, 0.8]])).tolist() == [0, 1]


def test_fusionnet_beats_single_views_on_xor():
    a, s, y = xor_views(0)
    res = fusionnet_train(a, s, y, np.arange(y.size), FusionHyper(out_dim=8, epochs=200))
    fused_acc = np.mean(hard_labels(predict(res.net, a, s)) == y)
    assert fused_acc - max(linear_probe_accuracy(a, y), linear_probe_accuracy(s, y)) >= 0.15


def test_fusionnet_accepts_embedding_matrices(rng):
    a = EmbeddingMatrix(rng.normal(size=(6, 3)), "n2v")
    s = EmbeddingMatrix(rng.normal(size=(6, 3)), "sage")
    res = fusionnet_train(a, s, np.array([0, 1] * 3), [0, 1, 2], FusionHyper(hidden=4, out_dim=2, epochs=2))
    assert res.embedding.values.shape == (6, 2)


def test_early_stopping_halts_on_overfit(rng):
    # random labels: validation loss rises once the net starts memorizing
    a, s = rng.normal(size=(200, 8)), rng.normal(size=(200, 8))
    y = rng.integers(0, 2, 200)
    hyper = FusionHyper(hidden=64, out_dim=4, epochs=300, lr=0.01, early_stopping=True, patience=5)
    res = fusionnet_train(a, s, y, np.arange(0, 200, 2), hyper, val_nodes=np.arange(1, 200, 2))
    assert len(res.losses) < 300


def test_minibatches_cover_training_set():
    good, noise, y = separable_and_noise(4)
    res = fusionnet_train(good, noise, y, np.arange(100), FusionHyper(hidden=8, out_dim=4, epochs=5, batch_size=32))
    assert len(res.losses) == 5

import math

import numpy as np
import pytest

import oracles
from sau.activations import ActivationKind, SauParams, kind_from_name
from sau.datasets import DatasetSplit, make_sine_regression, make_xor
from sau.nn import (
    NetworkSpec,
    NonFiniteLoss,
    ShapeMismatch,
    TrainConfig,
    cosine_lr,
    evaluate,
    forward_backward,
    init_network,
    train,
)

SAU5 = ActivationKind("sau", SauParams(0.15, 5.0))


def tiny_batch(seed=7, count=5, features=2, classes=3):
    rng = np.random.default_rng(seed)
    return (rng.normal(size=(count, features)),
            rng.integers(0, classes, size=count))


# ---------------------------------------------------------------------------
# construction and validation


def test_network_spec_validation():
    with pytest.raises(ValueError):
        NetworkSpec((4,), SAU5)
    with pytest.raises(ValueError):
        NetworkSpec((4, 0, 2), SAU5)
    with pytest.raises(ValueError):
        NetworkSpec((4, 3, 2), SAU5, head="huber")
    with pytest.raises(ValueError):
        NetworkSpec((4, 3, 2), SAU5, init="xavier")


def test_train_config_validation():
    TrainConfig(learning_rate=0.0, epochs=0, batch_size=1)  # legal no-op
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=-1.0, epochs=1, batch_size=1)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=math.nan, epochs=1, batch_size=1)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.1, epochs=1, batch_size=0)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.1, epochs=-1, batch_size=1)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.1, epochs=1, batch_size=1,
                    optimizer="rmsprop")
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.1, epochs=1, batch_size=1,
                    lr_schedule="linear")
    with pytest.raises(ValueError):
        # weight decay is an sgd_momentum knob
        TrainConfig(learning_rate=0.1, epochs=1, batch_size=1,
                    optimizer="adam", weight_decay=0.01)


def test_init_network_shapes_and_zero_biases():
    spec = NetworkSpec((784, 256, 10), SAU5, seed=42)
    net = init_network(spec)
    assert [w.shape for w in net.weights] == [(256, 784), (10, 256)]
    assert all(not b.any() for b in net.biases)
    assert net.alphas == [0.15]


def test_init_network_is_deterministic():
    spec = NetworkSpec((6, 5, 4), SAU5, seed=11)
    a, b = init_network(spec), init_network(spec)
    for wa, wb in zip(a.weights, b.weights):
        assert np.array_equal(wa, wb)
    assert init_network(NetworkSpec((6, 5, 4), SAU5, seed=12)).weights[0][0, 0] \
        != a.weights[0][0, 0]


def test_he_normal_scale():
    spec = NetworkSpec((784, 256, 10), SAU5, seed=0)
    net = init_network(spec)
    measured = float(net.weights[0].std())
    assert abs(measured - math.sqrt(2.0 / 784)) <= 0.003


def test_alphas_only_for_trainable_kinds():
    relu_net = init_network(NetworkSpec((4, 3, 3, 2), kind_from_name("relu")))
    assert relu_net.alphas == []
    prelu_net = init_network(NetworkSpec((4, 3, 3, 2),
                                         kind_from_name("prelu")))
    assert prelu_net.alphas == [0.25, 0.25]


# ---------------------------------------------------------------------------
# forward/backward


def test_zero_weight_net_uniform_softmax_loss():
    spec = NetworkSpec((4, 6, 10), SAU5, seed=3)
    net = init_network(spec)
    for w in net.weights:
        w[:] = 0.0
    batch = np.ones((7, 4))
    labels = np.arange(7) % 10
    loss, _ = forward_backward(net, batch, labels)
    assert abs(loss - oracles.LN10) <= 1e-12


def test_shape_mismatch_rejected():
    net = init_network(NetworkSpec((4, 3, 2), SAU5, seed=0))
    with pytest.raises(ShapeMismatch):
        forward_backward(net, np.ones((5, 3)), np.zeros(5, dtype=int))
    with pytest.raises(ShapeMismatch):
        evaluate(net, DatasetSplit(np.ones((5, 6)), np.zeros(5, dtype=int),
                                   "wide"))


def test_labels_out_of_range_rejected():
    net = init_network(NetworkSpec((4, 3, 2), SAU5, seed=0))
    with pytest.raises(ValueError):
        forward_backward(net, np.ones((3, 4)), np.array([0, 1, 2]))


def test_duplicate_sample_linearity():
    net = init_network(NetworkSpec((2, 4, 3), SAU5, seed=7))
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(2, 2))
    la, lb = 1, 2

    def grads_of(batch, labels):
        _, g = forward_backward(net, np.array(batch), np.array(labels))
        return g

    g_a = grads_of([a], [la])
    g_b = grads_of([b], [lb])
    g_aab = grads_of([a, a, b], [la, la, lb])
    for l in range(len(net.weights)):
        assert np.allclose(3.0 * g_aab.weights[l],
                           2.0 * g_a.weights[l] + g_b.weights[l],
                           rtol=0, atol=1e-12)
        assert np.allclose(3.0 * g_aab.biases[l],
                           2.0 * g_a.biases[l] + g_b.biases[l],
                           rtol=0, atol=1e-12)
    assert abs(3.0 * g_aab.alphas[0]
               - (2.0 * g_a.alphas[0] + g_b.alphas[0])) <= 1e-12


def fd_check(net, batch, labels, h=1e-5, tol=1e-5):
    """Central finite differences on every parameter of the net."""
    loss, grads = forward_backward(net, batch, labels)

    def loss_at():
        return forward_backward(net, batch, labels)[0]

    def check(holder, idx, analytic):
        keep = holder[idx]
        holder[idx] = keep + h
        up = loss_at()
        holder[idx] = keep - h
        down = loss_at()
        holder[idx] = keep
        fd = (up - down) / (2.0 * h)
        rel = abs(fd - analytic) / max(abs(analytic), 1e-12)
        assert rel <= tol, (idx, analytic, fd, rel)

    for l, w in enumerate(net.weights):
        for idx in np.ndindex(w.shape):
            check(w, idx, grads.weights[l][idx])
        for i in range(net.biases[l].size):
            check(net.biases[l], i, grads.biases[l][i])
    for l in range(len(net.alphas)):
        check(net.alphas, l, grads.alphas[l])
    return loss


def test_full_gradient_check_tiny_net():
    # fixed 2-4-3 net, seed 7, one batch of 5 samples
    net = init_network(NetworkSpec((2, 4, 3), SAU5, seed=7))
    batch, labels = tiny_batch()
    fd_check(net, batch, labels)


@pytest.mark.parametrize("name", ["sau_exact", "sau_zero", "prelu", "swish",
                                  "softplus"])
def test_full_gradient_check_other_activations(name):
    kind = kind_from_name(name, alpha=0.15, n=5.0) \
        if name.startswith("sau") else kind_from_name(name)
    net = init_network(NetworkSpec((2, 4, 3), kind, seed=7))
    batch, labels = tiny_batch()
    fd_check(net, batch, labels)


def test_full_gradient_check_mse_head():
    net = init_network(NetworkSpec((2, 4, 1), SAU5, head="mse", seed=9))
    rng = np.random.default_rng(9)
    batch = rng.normal(size=(5, 2))
    targets = rng.normal(size=(5, 1))
    fd_check(net, batch, targets)


def test_single_unit_alpha_gradient():
    # one SAU unit fed by a frozen identity path
    net = init_network(NetworkSpec((1, 1, 1), SAU5, head="mse", seed=1))
    net.weights[0][:] = 1.0
    net.weights[1][:] = 1.0
    batch = np.array([[0.4]])
    target = np.array([[1.0]])
    h = 1e-5
    _, grads = forward_backward(net, batch, target)
    net.alphas[0] += h
    up, _ = forward_backward(net, batch, target)
    net.alphas[0] -= 2 * h
    down, _ = forward_backward(net, batch, target)
    net.alphas[0] += h
    fd = (up - down) / (2.0 * h)
    assert abs(fd - grads.alphas[0]) / abs(grads.alphas[0]) <= 1e-6


# ---------------------------------------------------------------------------
# evaluate


def test_evaluate_argmax_tie_breaks_to_lowest_index():
    net = init_network(NetworkSpec((3, 2, 4), SAU5, seed=0))
    for w in net.weights:
        w[:] = 0.0  # constant (all-equal) logits
    data = DatasetSplit(np.ones((8, 3)), np.array([0, 0, 1, 2, 3, 0, 1, 0]),
                        "ties")
    loss, acc = evaluate(net, data)
    assert acc == 4 / 8  # the four label-0 samples win the tie-break
    assert abs(loss - math.log(4.0)) <= 1e-12


def test_evaluate_perfect_logits():
    net = init_network(NetworkSpec((2, 2), kind_from_name("relu")))
    net.weights[0][:] = np.array([[40.0, 0.0], [0.0, 40.0]])
    data = DatasetSplit(np.eye(2), np.array([0, 1]), "onehot")
    _, acc = evaluate(net, data)
    assert acc == 1.0


def test_evaluate_is_pure_and_chunking_consistent():
    net = init_network(NetworkSpec((3, 8, 4), SAU5, seed=5))
    rng = np.random.default_rng(5)
    data = DatasetSplit(rng.normal(size=(2500, 3)),
                        rng.integers(0, 4, size=2500), "chunky")
    before = [w.copy() for w in net.weights]
    first = evaluate(net, data)
    second = evaluate(net, data)
    assert first == second
    for w, keep in zip(net.weights, before):
        assert np.array_equal(w, keep)
    # chunked mean equals the one-shot mean
    one_shot = evaluate(net, data, chunk=10_000)
    assert abs(first[0] - one_shot[0]) <= 1e-9
    assert first[1] == one_shot[1]


# ---------------------------------------------------------------------------
# training


def test_cosine_lr_endpoints():
    assert cosine_lr(1.0, 0, 10) == 1.0
    assert abs(cosine_lr(1.0, 5, 10) - 0.5) <= 1e-15
    assert abs(cosine_lr(1.0, 10, 10)) <= 1e-16


def test_epochs_zero_changes_nothing():
    net = init_network(NetworkSpec((2, 4, 2), SAU5, seed=2))
    keep = [w.copy() for w in net.weights]
    cfg = TrainConfig(learning_rate=0.1, epochs=0, batch_size=2)
    report = train(net, make_xor(), cfg)
    assert report.records == []
    assert report.to_csv().splitlines() == [
        "epoch,train_loss,train_acc,test_loss,test_acc,alpha_layer_0"]
    for w, old in zip(net.weights, keep):
        assert np.array_equal(w, old)


def test_lr_zero_keeps_parameters_and_alpha():
    net = init_network(NetworkSpec((2, 4, 2), SAU5, seed=2))
    keep = [w.copy() for w in net.weights]
    cfg = TrainConfig(learning_rate=0.0, epochs=3, batch_size=4)
    report = train(net, make_xor(), cfg)
    assert len(report.records) == 3
    for rec in report.records:
        assert rec.alphas == (0.15,)
    for w, old in zip(net.weights, keep):
        assert np.array_equal(w, old)


def test_xor_trains_to_perfect_accuracy():
    net = init_network(NetworkSpec((2, 8, 2), SAU5, seed=0))
    cfg = TrainConfig(learning_rate=1e-2, epochs=2000, batch_size=4,
                      optimizer="adam", seed=0)
    report = train(net, make_xor(), cfg)
    assert report.final.train_acc == 1.0


def test_loss_decreases_for_every_activation_kind():
    data = make_sine_regression(128, seed=0)
    for name in ("sau", "sau_exact", "sau_zero", "relu", "leaky_relu", "elu",
                 "softplus", "swish", "gelu", "prelu", "relu6"):
        kind = kind_from_name(name, alpha=0.15, n=5.0) \
            if name.startswith("sau") else kind_from_name(name)
        net = init_network(NetworkSpec((1, 16, 1), kind, head="mse", seed=1))
        cfg = TrainConfig(learning_rate=1e-2, epochs=10, batch_size=128,
                          optimizer="adam", seed=1)
        report = train(net, data, cfg)
        first = report.records[0].train_loss
        last = report.records[-1].train_loss
        assert last < first, (name, first, last)
        assert all(math.isfinite(a) for rec in report.records
                   for a in rec.alphas)


def test_alpha_actually_moves_when_training():
    net = init_network(NetworkSpec((2, 8, 2), SAU5, seed=0))
    cfg = TrainConfig(learning_rate=1e-2, epochs=50, batch_size=4, seed=0)
    report = train(net, make_xor(), cfg)
    assert report.final.alphas[0] != 0.15


def test_training_is_deterministic():
    data = make_sine_regression(64, seed=3)

    def run():
        net = init_network(NetworkSpec((1, 8, 1), SAU5, head="mse", seed=4))
        cfg = TrainConfig(learning_rate=5e-3, epochs=5, batch_size=16,
                          optimizer="sgd_momentum", momentum=0.9,
                          weight_decay=1e-4, lr_schedule="cosine_annealing",
                          seed=4)
        return train(net, data, cfg, test=data)

    assert run().to_csv() == run().to_csv()


def test_sgd_momentum_and_schedule_change_trajectory():
    data = make_sine_regression(64, seed=3)

    def final_loss(**overrides):
        net = init_network(NetworkSpec((1, 8, 1), SAU5, head="mse", seed=4))
        cfg = TrainConfig(learning_rate=5e-3, epochs=5, batch_size=16,
                          optimizer="sgd_momentum", seed=4, **overrides)
        return train(net, data, cfg).final.train_loss

    assert final_loss() != final_loss(momentum=0.0)
    assert final_loss() != final_loss(lr_schedule="cosine_annealing")


def test_non_finite_loss_reports_epoch_and_step():
    data = make_sine_regression(32, seed=0)
    net = init_network(NetworkSpec((1, 4, 1), SAU5, head="mse", seed=0))
    cfg = TrainConfig(learning_rate=1e30, epochs=5, batch_size=8,
                      optimizer="sgd_momentum", seed=0)
    with pytest.raises(NonFiniteLoss) as exc_info:
        train(net, data, cfg)
    exc = exc_info.value
    assert exc.epoch is not None and exc.step is not None
    assert not math.isfinite(exc.loss_value)


def test_report_csv_shape():
    net = init_network(NetworkSpec((2, 4, 2), SAU5, seed=2))
    cfg = TrainConfig(learning_rate=1e-2, epochs=2, batch_size=4, seed=2)
    report = train(net, make_xor(), cfg, test=make_xor())
    lines = report.to_csv().splitlines()
    assert lines[0] == "epoch,train_loss,train_acc,test_loss,test_acc," \
                       "alpha_layer_0"
    assert len(lines) == 3
    assert lines[1].split(",")[0] == "0"
    # every numeric field round-trips through float()
    for line in lines[1:]:
        for field in line.split(",")[1:]:
            float(field)

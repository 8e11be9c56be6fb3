"""Minimal dense-network trainer with trainable activation slopes.

Design constraints, in priority order: bitwise reproducibility given a seed
(fixed shuffle order, fixed sequential reduction order, single-threaded
parameter updates), then clarity, then speed. Activation slopes (alpha) are
one scalar per hidden layer, updated by backprop alongside the weights;
weight decay never touches biases or alpha.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .activations import ActivationKind, eval_activation_arrays

__all__ = [
    "Tensor2D", "NetworkSpec", "TrainConfig", "TrainReport", "EpochRecord",
    "Network", "Gradients", "ShapeMismatch", "NonFiniteLoss",
    "init_network", "forward_backward", "train", "evaluate", "cosine_lr",
]

# Row-major (samples x features) float64 matrix; plain ndarray, named for
# the role it plays in signatures.
Tensor2D = np.ndarray

EVAL_CHUNK = 1024

HEADS = ("softmax", "mse")
OPTIMIZERS = ("adam", "sgd_momentum")
SCHEDULES = ("constant", "cosine_annealing")


class ShapeMismatch(ValueError):
    """Batch/label/parameter dimensions disagree."""


class NonFiniteLoss(RuntimeError):
    """Training produced a NaN/inf loss; carries the offending epoch/step
    (when raised inside train) and the loss value."""

    def __init__(self, message, loss_value, epoch=None, step=None):
        super().__init__(message)
        self.loss_value = loss_value
        self.epoch = epoch
        self.step = step


@dataclass(frozen=True)
class NetworkSpec:
    """Dense architecture: layer_sizes runs input -> hidden... -> output;
    the activation applies to hidden layers; the head is 'softmax'
    (classification over layer_sizes[-1] classes) or 'mse' (regression)."""

    layer_sizes: tuple
    activation: ActivationKind
    head: str = "softmax"
    init: str = "he_normal"
    seed: int = 0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2:
            raise ValueError(f"need at least input and output sizes, got {sizes}")
        if any(s < 1 for s in sizes):
            raise ValueError(f"layer sizes must be positive, got {sizes}")
        if self.head not in HEADS:
            raise ValueError(f"unknown head {self.head!r}; expected {HEADS}")
        if self.init != "he_normal":
            raise ValueError(f"unknown init rule {self.init!r}")


@dataclass
class Network:
    """Mutable parameter container produced by init_network."""

    spec: NetworkSpec
    weights: list      # weights[l] has shape (fan_out, fan_in)
    biases: list       # biases[l] has shape (fan_out,)
    alphas: list       # one float per hidden layer; [] if not trainable


@dataclass
class Gradients:
    weights: list
    biases: list
    alphas: list       # floats, parallel to Network.alphas


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    epochs: int
    batch_size: int
    seed: int = 0
    optimizer: str = "adam"
    momentum: float = 0.9          # sgd_momentum only
    weight_decay: float = 0.0      # sgd_momentum only, weights only
    beta1: float = 0.9             # adam
    beta2: float = 0.999           # adam
    eps: float = 1e-8              # adam
    lr_schedule: str = "constant"
    schedule_total_epochs: int = 0  # cosine horizon; 0 means epochs

    def __post_init__(self):
        # lr = 0 and epochs = 0 are legal no-op configurations
        if not (math.isfinite(self.learning_rate) and self.learning_rate >= 0.0):
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate!r}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size!r}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}; expected {OPTIMIZERS}")
        if self.lr_schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.lr_schedule!r}; expected {SCHEDULES}")
        if self.optimizer == "adam" and self.weight_decay != 0.0:
            raise ValueError("weight_decay is only supported with sgd_momentum")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    test_loss: float
    test_acc: float
    wall_seconds: float
    alphas: tuple


@dataclass
class TrainReport:
    records: list = field(default_factory=list)
    alpha_count: int = 0   # trainable hidden layers; fixes the CSV header
                           # even when there are zero records

    @property
    def final(self) -> EpochRecord:
        return self.records[-1]

    def alpha_columns(self):
        return [f"alpha_layer_{i}" for i in range(self.alpha_count)]

    def to_csv(self) -> str:
        """Metrics CSV: epoch,train_loss,train_acc,test_loss,test_acc plus
        one alpha_layer_i column per trainable hidden layer. Wall times are
        deliberately excluded so reruns are byte-identical."""
        header = ["epoch", "train_loss", "train_acc", "test_loss", "test_acc"]
        header += self.alpha_columns()
        lines = [",".join(header)]
        for r in self.records:
            row = [str(r.epoch), repr(r.train_loss), repr(r.train_acc),
                   repr(r.test_loss), repr(r.test_acc)]
            row += [repr(a) for a in r.alphas]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def cosine_lr(lr0: float, epoch: int, total: int) -> float:
    """Cosine annealing: lr0 * (1 + cos(pi * epoch / total)) / 2,
    epoch 0-based."""
    if total <= 0:
        return lr0
    return lr0 * (1.0 + math.cos(math.pi * epoch / total)) / 2.0


def init_network(spec: NetworkSpec) -> Network:
    """He-normal weights (std sqrt(2/fan_in)), zero biases, per-layer
    trainable slopes at their initial value; deterministic given spec.seed."""
    rng = np.random.default_rng(spec.seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        std = math.sqrt(2.0 / fan_in)
        weights.append(rng.normal(0.0, std, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    hidden_layers = len(spec.layer_sizes) - 2
    if spec.activation.trainable_alpha:
        alphas = [spec.activation.initial_alpha] * hidden_layers
    else:
        alphas = []
    return Network(spec, weights, biases, alphas)


def _check_batch(net: Network, batch) -> np.ndarray:
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2:
        raise ShapeMismatch(f"batch must be 2-D, got {batch.ndim}-D")
    if batch.shape[1] != net.spec.layer_sizes[0]:
        raise ShapeMismatch(
            f"batch has {batch.shape[1]} features but the network "
            f"expects {net.spec.layer_sizes[0]}")
    return batch


def _layer_alpha(net: Network, layer: int):
    return net.alphas[layer] if net.alphas else None


def _forward(net: Network, batch: np.ndarray, grads: bool):
    """Run the hidden layers; returns (output logits, per-layer caches).

    Each cache is (input activation, d_act/d_z, d_act/d_alpha) for the
    backward pass; caches are empty when grads=False.
    """
    kind = net.spec.activation
    a = batch
    caches = []
    last = len(net.weights) - 1
    for l in range(last):
        z = a @ net.weights[l].T + net.biases[l]
        value, d_dz, d_da = eval_activation_arrays(
            kind, z, alpha=_layer_alpha(net, l), grads=grads)
        if grads:
            caches.append((a, d_dz, d_da))
        a = value
    out = a @ net.weights[last].T + net.biases[last]
    if grads:
        caches.append((a, None, None))
    return out, caches


def _softmax_loss(out: np.ndarray, labels: np.ndarray, want_grad: bool):
    b, classes = out.shape
    labels = np.asarray(labels)
    if labels.shape != (b,):
        raise ShapeMismatch(f"expected {b} labels, got shape {labels.shape}")
    if labels.min() < 0 or labels.max() >= classes:
        raise ValueError(f"labels must lie in [0, {classes}), "
                         f"got range [{labels.min()}, {labels.max()}]")
    shift = out - out.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shift).sum(axis=1, keepdims=True))
    log_p = shift - log_norm
    rows = np.arange(b)
    loss = float(-log_p[rows, labels].mean())
    if not want_grad:
        return loss, None
    grad = np.exp(log_p)
    grad[rows, labels] -= 1.0
    return loss, grad / b


def _mse_loss(out: np.ndarray, labels: np.ndarray, want_grad: bool):
    b = out.shape[0]
    targets = np.asarray(labels, dtype=np.float64).reshape(b, -1)
    if targets.shape != out.shape:
        raise ShapeMismatch(
            f"targets with shape {targets.shape} do not match "
            f"outputs with shape {out.shape}")
    diff = out - targets
    loss = float(np.mean(diff * diff))
    if not want_grad:
        return loss, None
    return loss, (2.0 / diff.size) * diff


def forward_backward(net: Network, batch, labels):
    """One analytic-gradient pass; returns (mean loss, Gradients).

    The alpha gradient of a hidden layer is the sum over batch elements and
    units of upstream gradient times the activation's alpha-derivative (the
    1/batch factor rides in from the mean loss).
    """
    batch = _check_batch(net, batch)
    out, caches = _forward(net, batch, grads=True)
    head = _softmax_loss if net.spec.head == "softmax" else _mse_loss
    loss, delta = head(out, labels, want_grad=True)
    if not math.isfinite(loss):
        raise NonFiniteLoss(f"loss became {loss!r}", loss)

    grad_w = [None] * len(net.weights)
    grad_b = [None] * len(net.weights)
    grad_a = [0.0] * len(net.alphas)
    for l in range(len(net.weights) - 1, -1, -1):
        a_prev = caches[l][0]
        grad_w[l] = delta.T @ a_prev
        grad_b[l] = delta.sum(axis=0)
        if l == 0:
            break
        upstream = delta @ net.weights[l]
        _, d_dz, d_da = caches[l - 1]
        if net.alphas:
            grad_a[l - 1] = float((upstream * d_da).sum())
        delta = upstream * d_dz
    return loss, Gradients(grad_w, grad_b, grad_a)


def evaluate(net: Network, data, chunk: int = EVAL_CHUNK):
    """(mean loss, accuracy) without mutating parameters.

    Accuracy is the argmax-correct fraction (ties break to the lowest
    index); for the mse head accuracy is nan.
    """
    inputs = _check_batch(net, data.inputs)
    n = inputs.shape[0]
    head = _softmax_loss if net.spec.head == "softmax" else _mse_loss
    loss_sum = 0.0
    correct = 0
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        out, _ = _forward(net, inputs[start:stop], grads=False)
        part_labels = data.labels[start:stop]
        loss, _ = head(out, part_labels, want_grad=False)
        loss_sum += loss * (stop - start)
        if net.spec.head == "softmax":
            correct += int((out.argmax(axis=1) == part_labels).sum())
    accuracy = correct / n if net.spec.head == "softmax" else math.nan
    return loss_sum / n, accuracy


class _SgdMomentum:
    def __init__(self, cfg, net):
        self.mu = cfg.momentum
        self.wd = cfg.weight_decay
        self.vel_w = [np.zeros_like(w) for w in net.weights]
        self.vel_b = [np.zeros_like(b) for b in net.biases]
        self.vel_a = [0.0] * len(net.alphas)

    def step(self, net, grads, lr):
        for l, g in enumerate(grads.weights):
            if self.wd != 0.0:
                g = g + self.wd * net.weights[l]
            self.vel_w[l] = self.mu * self.vel_w[l] + g
            net.weights[l] -= lr * self.vel_w[l]
        for l, g in enumerate(grads.biases):
            self.vel_b[l] = self.mu * self.vel_b[l] + g
            net.biases[l] -= lr * self.vel_b[l]
        for l, g in enumerate(grads.alphas):
            self.vel_a[l] = self.mu * self.vel_a[l] + g
            net.alphas[l] -= lr * self.vel_a[l]


class _Adam:
    def __init__(self, cfg, net):
        self.b1, self.b2, self.eps = cfg.beta1, cfg.beta2, cfg.eps
        self.t = 0
        self.m_w = [np.zeros_like(w) for w in net.weights]
        self.v_w = [np.zeros_like(w) for w in net.weights]
        self.m_b = [np.zeros_like(b) for b in net.biases]
        self.v_b = [np.zeros_like(b) for b in net.biases]
        self.m_a = [0.0] * len(net.alphas)
        self.v_a = [0.0] * len(net.alphas)

    def _update(self, m, v, g):
        m = self.b1 * m + (1.0 - self.b1) * g
        v = self.b2 * v + (1.0 - self.b2) * (g * g)
        m_hat = m / (1.0 - self.b1 ** self.t)
        v_hat = v / (1.0 - self.b2 ** self.t)
        return m, v, m_hat, v_hat

    def step(self, net, grads, lr):
        self.t += 1
        for l, g in enumerate(grads.weights):
            self.m_w[l], self.v_w[l], m_hat, v_hat = \
                self._update(self.m_w[l], self.v_w[l], g)
            net.weights[l] -= lr * m_hat / (np.sqrt(v_hat) + self.eps)
        for l, g in enumerate(grads.biases):
            self.m_b[l], self.v_b[l], m_hat, v_hat = \
                self._update(self.m_b[l], self.v_b[l], g)
            net.biases[l] -= lr * m_hat / (np.sqrt(v_hat) + self.eps)
        for l, g in enumerate(grads.alphas):
            self.m_a[l], self.v_a[l], m_hat, v_hat = \
                self._update(self.m_a[l], self.v_a[l], g)
            net.alphas[l] -= lr * m_hat / (math.sqrt(v_hat) + self.eps)


def _make_optimizer(cfg: TrainConfig, net: Network):
    if cfg.optimizer == "adam":
        return _Adam(cfg, net)
    return _SgdMomentum(cfg, net)


def train(net: Network, data, cfg: TrainConfig, test=None) -> TrainReport:
    """Run epochs x ceil(N/batch) optimizer steps; deterministic per seed.

    Shuffling uses a dedicated generator seeded with cfg.seed; train/test
    metrics and the current per-layer alphas are recorded after every
    epoch. A non-finite loss aborts with the epoch/step recorded on the
    exception.
    """
    inputs = _check_batch(net, data.inputs)
    labels = data.labels
    n = inputs.shape[0]
    batch = min(cfg.batch_size, n)
    steps = (n + batch - 1) // batch
    total = cfg.schedule_total_epochs or cfg.epochs
    optimizer = _make_optimizer(cfg, net)
    rng = np.random.default_rng(cfg.seed)

    report = TrainReport(alpha_count=len(net.alphas))
    for epoch in range(cfg.epochs):
        started = time.perf_counter()
        if cfg.lr_schedule == "cosine_annealing":
            lr = cosine_lr(cfg.learning_rate, epoch, total)
        else:
            lr = cfg.learning_rate
        order = rng.permutation(n)
        for step in range(steps):
            chosen = order[step * batch:(step + 1) * batch]
            try:
                loss, grads = forward_backward(net, inputs[chosen],
                                               labels[chosen])
            except NonFiniteLoss as exc:
                exc.epoch = epoch
                exc.step = step
                raise
            optimizer.step(net, grads, lr)
        train_loss, train_acc = evaluate(net, data)
        if test is not None:
            test_loss, test_acc = evaluate(net, test)
        else:
            test_loss, test_acc = math.nan, math.nan
        report.records.append(EpochRecord(
            epoch, train_loss, train_acc, test_loss, test_acc,
            time.perf_counter() - started, tuple(net.alphas)))
    return report

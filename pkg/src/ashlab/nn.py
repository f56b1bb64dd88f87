"""Desk-scale neural networks: layers, losses, optimizers, training loop.

Models are containers of layer specs plus a name -> Tensor parameter
registry; every forward pass wraps the current parameters as Variables
on a fresh tape (define-by-run). Training is single-threaded and fully
deterministic for a given seed: weight init and data ordering draw from
disjoint counter ranges of one seeded stream.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import activations as act
from . import autodiff as ad
from .autodiff import Variable
from .tensor import RngState, ShapeError, Tensor

# Data-order draws start here so weight init (counter 0) can never
# collide with them, no matter how many parameters a model has.
_DATA_STREAM_OFFSET = 2 ** 48

LOSS_KINDS = ("softmax_xent", "mse")


class DivergenceError(RuntimeError):
    """Training hit a non-finite value; carries (epoch, batch, where)."""

    def __init__(self, epoch: int, batch: int, where: str):
        super().__init__(f"non-finite value at epoch {epoch}, batch {batch}, in {where}")
        self.epoch = epoch
        self.batch = batch
        self.where = where


class _NonFinite(Exception):
    def __init__(self, where: str):
        super().__init__(where)
        self.where = where


# ---------------------------------------------------------------------------
# Layers.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dense:
    in_dim: int
    out_dim: int


@dataclass(frozen=True)
class Conv2d:
    """Stride-1, valid-padding convolution on (B, H, W, C) inputs."""

    kh: int
    kw: int
    cin: int
    cout: int


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Activation:
    spec: act.ActivationSpec


Layer = Dense | Conv2d | Flatten | Activation

_LAYER_BASENAME = {Dense: "dense", Conv2d: "conv", Flatten: "flatten", Activation: "act"}


def _kaiming_uniform(rng: RngState, fan_in: int, shape: tuple[int, ...]) -> Tensor:
    bound = np.sqrt(6.0 / fan_in)
    n = int(np.prod(shape))
    return Tensor._wrap(((rng.uniform(n) * 2.0 - 1.0) * bound).reshape(shape))


def _init_layer_params(layer: Layer, name: str, rng: RngState) -> dict[str, Tensor]:
    if isinstance(layer, Dense):
        return {
            f"{name}.W": _kaiming_uniform(rng, layer.in_dim, (layer.in_dim, layer.out_dim)),
            f"{name}.b": Tensor._wrap(np.zeros(layer.out_dim)),
        }
    if isinstance(layer, Conv2d):
        fan_in = layer.kh * layer.kw * layer.cin
        return {
            f"{name}.W": _kaiming_uniform(rng, fan_in, (fan_in, layer.cout)),
            f"{name}.b": Tensor._wrap(np.zeros(layer.cout)),
        }
    if isinstance(layer, Activation):
        return {f"{name}.{p}": t for p, t in act.trainable_params(layer.spec).items()}
    return {}


# ---------------------------------------------------------------------------
# Structured primitives used by the layers.
# ---------------------------------------------------------------------------

def add_bias(x: Variable, b: Variable) -> Variable:
    """Row-broadcast bias add: (B, n) + (n,)."""
    if len(x.value.shape) != 2 or b.value.shape != (x.value.shape[1],):
        raise ShapeError(f"add_bias needs (B, n) + (n,), got {x.value.shape} + {b.value.shape}")
    out = Tensor._wrap(x.value.data + b.value.data)
    return ad.record(x.tape, "add_bias", (x, b), out,
                     (lambda g: g, lambda g: g.sum(axis=0)))


def conv_patches(x: Variable, kh: int, kw: int) -> Variable:
    """im2col: (B, H, W, C) -> (B*OH*OW, kh*kw*C) sliding patches."""
    if len(x.value.shape) != 4:
        raise ShapeError(f"conv input must be rank-4 (B,H,W,C), got {x.value.shape}")
    data = x.value.data
    b, h, w, c = data.shape
    oh, ow = h - kh + 1, w - kw + 1
    if oh < 1 or ow < 1:
        raise ShapeError(f"kernel ({kh}x{kw}) larger than input ({h}x{w})")
    cols = np.empty((b, oh, ow, kh * kw * c))
    slot = 0
    for dy in range(kh):
        for dx in range(kw):
            cols[:, :, :, slot * c:(slot + 1) * c] = data[:, dy:dy + oh, dx:dx + ow, :]
            slot += 1
    out = Tensor._wrap(cols.reshape(b * oh * ow, kh * kw * c))

    def vjp(g):
        g = g.reshape(b, oh, ow, kh * kw * c)
        grad = np.zeros((b, h, w, c))
        slot = 0
        for dy in range(kh):
            for dx in range(kw):
                grad[:, dy:dy + oh, dx:dx + ow, :] += g[:, :, :, slot * c:(slot + 1) * c]
                slot += 1
        return grad

    return ad.record(x.tape, "conv_patches", (x,), out, (vjp,))


def _apply_layer(layer: Layer, name: str, x: Variable,
                 pvars: dict[str, Variable]) -> Variable:
    if isinstance(layer, Dense):
        if len(x.value.shape) != 2 or x.value.shape[1] != layer.in_dim:
            raise ShapeError(f"{name}: expected (B, {layer.in_dim}), got {x.value.shape}")
        return add_bias(ad.matmul(x, pvars[f"{name}.W"]), pvars[f"{name}.b"])
    if isinstance(layer, Conv2d):
        if len(x.value.shape) == 3 and layer.cin == 1:
            # Channelless image stacks (e.g. IDX) get an implicit C=1 axis.
            shape = x.value.shape
            x = ad.reshape(x, (shape[0], shape[1], shape[2], 1))
        if len(x.value.shape) != 4 or x.value.shape[3] != layer.cin:
            raise ShapeError(f"{name}: expected (B,H,W,{layer.cin}), got {x.value.shape}")
        b, h, w, _ = x.value.shape
        oh, ow = h - layer.kh + 1, w - layer.kw + 1
        patches = conv_patches(x, layer.kh, layer.kw)
        pre = add_bias(ad.matmul(patches, pvars[f"{name}.W"]), pvars[f"{name}.b"])
        return ad.reshape(pre, (b, oh, ow, layer.cout))
    if isinstance(layer, Flatten):
        shape = x.value.shape
        return ad.reshape(x, (shape[0], int(np.prod(shape[1:]))))
    if isinstance(layer, Activation):
        prefix = f"{name}."
        params = {pn[len(prefix):]: v for pn, v in pvars.items() if pn.startswith(prefix)}
        return act.apply_spec(layer.spec, x, params)
    raise TypeError(f"unknown layer type {type(layer).__name__}")


# ---------------------------------------------------------------------------
# Model.
# ---------------------------------------------------------------------------

class Model:
    """Ordered layers plus the current parameter tensors, keyed by name."""

    def __init__(self, layers: list[Layer], seed: int | RngState = 0):
        rng = seed if isinstance(seed, RngState) else RngState(seed)
        self.layers = list(layers)
        self.layer_names = [f"{_LAYER_BASENAME[type(l)]}{i}" for i, l in enumerate(self.layers)]
        self.params: dict[str, Tensor] = {}
        for layer, name in zip(self.layers, self.layer_names):
            self.params.update(_init_layer_params(layer, name, rng))
        self.param_bounds: dict[str, float] = {}
        for layer, name in zip(self.layers, self.layer_names):
            if isinstance(layer, Activation):
                for short, lo in act.param_lower_bounds(layer.spec).items():
                    self.param_bounds[f"{name}.{short}"] = lo

    def forward(self, batch: Tensor, trainable: bool = True) -> tuple[Variable, dict[str, Variable]]:
        """Run the layers on a fresh tape; returns (output, param Variables)."""
        tape = ad.Tape()
        pvars = {name: tape.variable(t, requires_grad=trainable, name=name)
                 for name, t in self.params.items()}
        h = tape.variable(batch)
        for layer, name in zip(self.layers, self.layer_names):
            try:
                h = _apply_layer(layer, name, h, pvars)
            except ShapeError:
                raise
            except ValueError as exc:
                raise _NonFinite(name) from exc
        return h, pvars

    def zk_snapshot(self) -> dict[str, list[float]]:
        """Current trainable-threshold values, keyed by layer name."""
        snap: dict[str, list[float]] = {}
        for pname, t in self.params.items():
            layer, _, short = pname.rpartition(".")
            if short == "z_k":
                snap[layer] = [float(v) for v in t.data.reshape(-1)]
        return snap


# ---------------------------------------------------------------------------
# Losses and metrics.
# ---------------------------------------------------------------------------

def _one_hot(targets, n_classes: int) -> np.ndarray:
    arr = targets.data if isinstance(targets, Tensor) else np.asarray(targets)
    if arr.ndim == 2:
        if arr.shape[1] != n_classes:
            raise ShapeError(f"one-hot targets have {arr.shape[1]} columns, logits {n_classes}")
        return np.asarray(arr, dtype=np.float64)
    labels = np.asarray(arr, dtype=np.int64).reshape(-1)
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValueError(f"class index out of range [0, {n_classes})")
    hot = np.zeros((labels.size, n_classes))
    hot[np.arange(labels.size), labels] = 1.0
    return hot


def softmax_xent(logits: Variable, targets) -> Variable:
    """Mean cross-entropy with log-sum-exp stabilization.

    Targets may be class indices (B,) or one-hot rows (B, C).
    """
    z = logits.value.data
    if z.ndim != 2:
        raise ShapeError(f"logits must be (B, C), got {logits.value.shape}")
    b, c = z.shape
    hot = _one_hot(targets, c)
    if hot.shape[0] != b:
        raise ShapeError(f"{hot.shape[0]} targets for {b} logits rows")
    zmax = z.max(axis=1, keepdims=True)
    ez = np.exp(z - zmax)
    se = ez.sum(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(se[:, 0])
    value = (lse.sum() - float((z * hot).sum())) / b
    out = Tensor._wrap(np.array([value]))
    softmax = ez / se

    def vjp(g):
        return g.reshape(-1)[0] * (softmax - hot) / b

    return ad.record(logits.tape, "softmax_xent", (logits,), out, (vjp,))


def mse(pred: Variable, target) -> Variable:
    """Mean squared error against a constant target."""
    tgt = target if isinstance(target, Tensor) else Tensor(np.asarray(target, dtype=np.float64))
    diff = ad.sub(pred, pred.tape.variable(tgt))
    return ad.mean_all(ad.mul(diff, diff))


def loss_fn(kind: str, logits: Variable, targets) -> Variable:
    if kind == "softmax_xent":
        return softmax_xent(logits, targets)
    if kind == "mse":
        return mse(logits, _one_hot(targets, logits.value.shape[1]))
    raise ValueError(f"unknown loss {kind!r}; expected one of {LOSS_KINDS}")


def accuracy(logits: Tensor, labels: np.ndarray) -> float:
    pred = np.argmax(logits.data, axis=1)
    return float(np.mean(pred == np.asarray(labels).reshape(-1)))


# ---------------------------------------------------------------------------
# Optimizers.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimizerSpec:
    kind: str = "adam"
    lr: float = 1e-3
    momentum: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("sgd", "adam"):
            raise ValueError(f"optimizer kind must be sgd or adam, got {self.kind!r}")
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")


class SGD:
    """W <- W - lr * (g + momentum * v), with v the running update."""

    def __init__(self, lr: float = 1e-3, momentum: float = 0.0):
        self.lr = lr
        self.momentum = momentum
        self._v: dict[str, np.ndarray] = {}

    def step(self, values: dict[str, Tensor], grads: dict[str, np.ndarray]) -> dict[str, Tensor]:
        new = {}
        for name, w in values.items():
            v = grads[name] + self.momentum * self._v.get(name, 0.0)
            self._v[name] = v
            try:
                new[name] = Tensor._wrap(w.data - self.lr * v)
            except ValueError as exc:
                raise _NonFinite(name) from exc
        return new


class Adam:
    """Bias-corrected Adam with the standard defaults."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, values: dict[str, Tensor], grads: dict[str, np.ndarray]) -> dict[str, Tensor]:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        new = {}
        for name, w in values.items():
            g = grads[name]
            m = self.beta1 * self._m.get(name, 0.0) + (1.0 - self.beta1) * g
            v = self.beta2 * self._v.get(name, 0.0) + (1.0 - self.beta2) * g * g
            self._m[name] = m
            self._v[name] = v
            update = self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
            try:
                new[name] = Tensor._wrap(w.data - update)
            except ValueError as exc:
                raise _NonFinite(name) from exc
        return new


def make_optimizer(spec: OptimizerSpec):
    if spec.kind == "sgd":
        return SGD(lr=spec.lr, momentum=spec.momentum)
    return Adam(lr=spec.lr, beta1=spec.beta1, beta2=spec.beta2, eps=spec.eps)


# ---------------------------------------------------------------------------
# Training loop.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    batch_size: int = 32
    seed: int = 0
    loss: str = "softmax_xent"
    val_split: float = 0.0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 <= self.val_split < 1.0:
            raise ValueError(f"val_split must lie in [0, 1), got {self.val_split}")
        if self.loss not in LOSS_KINDS:
            raise ValueError(f"loss must be one of {LOSS_KINDS}, got {self.loss!r}")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_acc: float
    zk_snapshot: dict[str, list[float]]
    wall_ms: float


def evaluate(model: Model, x: Tensor, labels: np.ndarray, loss_kind: str = "softmax_xent",
             batch_size: int = 256) -> tuple[float, float]:
    """Forward-only loss and accuracy over a dataset."""
    n = x.shape[0]
    total, correct = 0.0, 0.0
    for start in range(0, n, batch_size):
        xb = Tensor._wrap(np.ascontiguousarray(x.data[start:start + batch_size]))
        yb = np.asarray(labels)[start:start + batch_size]
        logits, _ = model.forward(xb, trainable=False)
        total += loss_fn(loss_kind, logits, yb).value.item() * xb.shape[0]
        correct += accuracy(logits.value, yb) * xb.shape[0]
    return total / n, correct / n


def train(model: Model, config: TrainConfig, dataset: tuple[Tensor, np.ndarray],
          on_epoch=None) -> list[EpochRecord]:
    """Mini-batch training; returns one EpochRecord per epoch.

    Deterministic for a given config seed: the initial split shuffle and
    every epoch's batch order come from one counter-based stream. A
    non-finite loss, activation or update aborts with DivergenceError
    naming the epoch, batch and layer. With val_split = 0 the validation
    metrics are computed on the training split.
    """
    x, labels = dataset
    labels = np.asarray(labels).reshape(-1)
    n = x.shape[0]
    if n == 0 or labels.shape[0] != n:
        raise ValueError(f"dataset has {n} rows but {labels.shape[0]} labels")

    data_rng = RngState(config.seed, counter=_DATA_STREAM_OFFSET)
    order0 = data_rng.permutation(n)
    n_val = int(round(config.val_split * n))
    train_idx = order0[: n - n_val]
    val_idx = order0[n - n_val:]

    opt = make_optimizer(config.optimizer)
    records: list[EpochRecord] = []

    for epoch in range(config.epochs):
        t0 = time.perf_counter()
        order = train_idx[data_rng.permutation(train_idx.size)]
        loss_sum, seen = 0.0, 0
        for bi, start in enumerate(range(0, order.size, config.batch_size)):
            idx = order[start:start + config.batch_size]
            xb = Tensor._wrap(x.data[idx])
            yb = labels[idx]
            try:
                logits, pvars = model.forward(xb)
                batch_loss = loss_fn(config.loss, logits, yb)
                ad.backward(batch_loss)
                grads = {name: pvars[name].grad.data for name in model.params}
                model.params = opt.step(model.params, grads)
            except _NonFinite as exc:
                raise DivergenceError(epoch, bi, exc.where) from exc
            except ValueError as exc:
                raise DivergenceError(epoch, bi, "loss") from exc
            for pname, lo in model.param_bounds.items():
                if float(model.params[pname].data.min()) < lo:
                    model.params[pname] = Tensor._wrap(np.maximum(model.params[pname].data, lo))
            loss_sum += batch_loss.value.item() * idx.size
            seen += idx.size

        if val_idx.size:
            xv = Tensor._wrap(x.data[val_idx])
            yv = labels[val_idx]
        else:
            xv = Tensor._wrap(x.data[train_idx])
            yv = labels[train_idx]
        val_loss, val_acc = evaluate(model, xv, yv, config.loss, config.batch_size)

        record = EpochRecord(
            epoch=epoch,
            train_loss=loss_sum / seen,
            val_loss=val_loss,
            val_acc=val_acc,
            zk_snapshot=model.zk_snapshot(),
            wall_ms=(time.perf_counter() - t0) * 1e3,
        )
        records.append(record)
        if on_epoch is not None:
            on_epoch(record)
    return records

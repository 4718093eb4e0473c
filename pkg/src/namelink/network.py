"""Per-block feed-forward classifier.

Two input branches (name features and contextual text features) pass
through their own dense stacks, are concatenated, and finish in shared
layers with a softmax over the block's candidate authors.  Everything is
plain numpy: forward, backprop, Adam, the training loop with early
stopping, and a binary checkpoint format.  Float64 throughout so numeric
checks against finite differences are meaningful.
"""

from __future__ import annotations

import copy
import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .embeddings import CHAR_DIM
from .util import atomic_write_bytes

LOGGER = logging.getLogger(__name__)

#: Width of the name branch input: target first-name vector plus the
#: averaged co-author vector.
NAME_INPUT_DIM = 2 * CHAR_DIM

_EPS = 1e-12

_ACTIVATIONS = ("relu", "linear", "softmax")


class CheckpointError(Exception):
    """A checkpoint file failed validation."""


@dataclass
class DenseLayer:
    """One dense layer: weights (fan_in, fan_out), bias, activation tag,
    and an inverted-dropout rate applied after the activation."""

    w: np.ndarray
    b: np.ndarray
    activation: str = "relu"
    dropout: float = 0.0

    def __post_init__(self) -> None:
        self.w = np.ascontiguousarray(self.w, dtype=np.float64)
        self.b = np.ascontiguousarray(self.b, dtype=np.float64)
        if self.w.ndim != 2 or self.b.shape != (self.w.shape[1],):
            raise ValueError(
                f"layer shapes inconsistent: w {self.w.shape}, b {self.b.shape}"
            )
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {self.dropout}")

    @property
    def fan_in(self) -> int:
        return self.w.shape[0]

    @property
    def fan_out(self) -> int:
        return self.w.shape[1]


@dataclass
class AdamState:
    """First/second moment accumulators, aligned with ``param_arrays``."""

    step: int
    m: list[np.ndarray]
    v: list[np.ndarray]


@dataclass
class ModelParams:
    """Full model state: layer groups, class labels, optimizer state.

    ``classes`` maps softmax positions to author keys; ``anv`` labels which
    block the model belongs to.
    """

    branch1: list[DenseLayer]
    branch2: list[DenseLayer]
    merge: list[DenseLayer]
    output: DenseLayer
    classes: list[str]
    anv: str = ""
    adam: AdamState | None = None

    def __post_init__(self) -> None:
        if self.output.activation == "softmax" and self.output.fan_out != len(self.classes):
            raise ValueError(
                f"output width {self.output.fan_out} != {len(self.classes)} classes"
            )
        if self.output.dropout != 0.0:
            raise ValueError("output layer must not use dropout")
        if self.adam is None:
            self.adam = AdamState(
                step=0,
                m=[np.zeros_like(a) for a in self.param_arrays()],
                v=[np.zeros_like(a) for a in self.param_arrays()],
            )

    def layers(self) -> list[DenseLayer]:
        return [*self.branch1, *self.branch2, *self.merge, self.output]

    def param_arrays(self) -> list[np.ndarray]:
        arrays: list[np.ndarray] = []
        for layer in self.layers():
            arrays.append(layer.w)
            arrays.append(layer.b)
        return arrays

    def num_params(self) -> int:
        return sum(a.size for a in self.param_arrays())


@dataclass(frozen=True)
class HiddenSpec:
    """Hidden layer widths for the three dense groups."""

    branch1: tuple[int, ...] = (256, 128)
    branch2: tuple[int, ...] = (512, 256)
    merge: tuple[int, ...] = (256, 128)
    final_dropout: float = 0.5


def init_model(
    text_dim: int,
    n_classes: int,
    hidden: HiddenSpec | None = None,
    seed: int = 0,
    *,
    classes: Sequence[str] | None = None,
    anv: str = "",
) -> ModelParams:
    """Glorot-uniform initialized model for one block.

    ``text_dim`` is the contextual embedding width; the name branch width
    is fixed by the name embedder.  ``n_classes`` must be at least 2.
    """
    if n_classes < 2:
        raise ValueError(f"a block classifier needs >= 2 classes, got {n_classes}")
    if text_dim < 1:
        raise ValueError(f"text dimension must be positive, got {text_dim}")
    if classes is None:
        classes = [str(i) for i in range(n_classes)]
    if len(classes) != n_classes:
        raise ValueError(f"{len(classes)} class labels for {n_classes} classes")
    hidden = hidden or HiddenSpec()
    rng = np.random.default_rng(seed)

    def glorot(fan_in: int, fan_out: int) -> DenseLayer:
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        return DenseLayer(w=w, b=np.zeros(fan_out))

    def stack(width_in: int, widths: Sequence[int]) -> list[DenseLayer]:
        layers = []
        for width in widths:
            layers.append(glorot(width_in, width))
            width_in = width
        return layers

    branch1 = stack(NAME_INPUT_DIM, hidden.branch1)
    branch2 = stack(text_dim, hidden.branch2)
    b1_out = branch1[-1].fan_out if branch1 else NAME_INPUT_DIM
    b2_out = branch2[-1].fan_out if branch2 else text_dim
    merge = stack(b1_out + b2_out, hidden.merge)
    if merge:
        merge[-1].dropout = hidden.final_dropout
    merged_out = merge[-1].fan_out if merge else b1_out + b2_out
    output = glorot(merged_out, n_classes)
    output.activation = "softmax"
    return ModelParams(
        branch1=branch1,
        branch2=branch2,
        merge=merge,
        output=output,
        classes=list(classes),
        anv=anv,
    )


def clone_params(params: ModelParams) -> ModelParams:
    return copy.deepcopy(params)


# ---------------------------------------------------------------------------
# Forward / loss / backward
# ---------------------------------------------------------------------------

@dataclass
class _LayerCache:
    a_in: np.ndarray
    z: np.ndarray
    a_out: np.ndarray
    mask: np.ndarray | None


@dataclass
class _ForwardCache:
    branch1: list[_LayerCache]
    branch2: list[_LayerCache]
    merge: list[_LayerCache]
    output: _LayerCache
    h1_width: int


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "linear":
        return z
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _run_layer(
    layer: DenseLayer, a_in: np.ndarray, train: bool, rng: np.random.Generator | None
) -> _LayerCache:
    z = a_in @ layer.w + layer.b
    a = _activate(z, layer.activation)
    mask = None
    if train and layer.dropout > 0.0:
        assert rng is not None
        keep = 1.0 - layer.dropout
        mask = (rng.random(a.shape) < keep).astype(np.float64) / keep
        a = a * mask
    return _LayerCache(a_in=a_in, z=z, a_out=a, mask=mask)


def _forward_cached(
    params: ModelParams,
    x1: np.ndarray,
    x2: np.ndarray,
    train: bool,
    rng: np.random.Generator | None,
) -> _ForwardCache:
    h1, b1_caches = x1, []
    for layer in params.branch1:
        cache = _run_layer(layer, h1, train, rng)
        b1_caches.append(cache)
        h1 = cache.a_out
    h2, b2_caches = x2, []
    for layer in params.branch2:
        cache = _run_layer(layer, h2, train, rng)
        b2_caches.append(cache)
        h2 = cache.a_out
    h = np.concatenate([h1, h2], axis=1)
    merge_caches = []
    for layer in params.merge:
        cache = _run_layer(layer, h, train, rng)
        merge_caches.append(cache)
        h = cache.a_out
    out = _run_layer(params.output, h, train, rng)
    return _ForwardCache(
        branch1=b1_caches,
        branch2=b2_caches,
        merge=merge_caches,
        output=out,
        h1_width=h1.shape[1],
    )


def forward(
    params: ModelParams,
    x1: np.ndarray,
    x2: np.ndarray,
    mode: str = "eval",
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Network output for a sample or batch.

    ``mode`` is ``"eval"`` (deterministic, dropout off) or ``"train"``
    (inverted dropout, requires ``rng``).  1-D inputs give a 1-D output.
    """
    if mode not in ("eval", "train"):
        raise ValueError(f"mode must be 'eval' or 'train', got {mode!r}")
    if mode == "train" and rng is None:
        raise ValueError("train-mode forward requires an rng for dropout")
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    single = x1.ndim == 1
    if single != (x2.ndim == 1):
        raise ValueError("x1 and x2 must both be single samples or both batches")
    if single:
        x1 = x1[None, :]
        x2 = x2[None, :]
    if x1.shape[0] != x2.shape[0]:
        raise ValueError(f"batch size mismatch: {x1.shape[0]} vs {x2.shape[0]}")
    if params.branch1 and x1.shape[1] != params.branch1[0].fan_in:
        raise ValueError(
            f"x1 width {x1.shape[1]} != expected {params.branch1[0].fan_in}"
        )
    if params.branch2 and x2.shape[1] != params.branch2[0].fan_in:
        raise ValueError(
            f"x2 width {x2.shape[1]} != expected {params.branch2[0].fan_in}"
        )
    cache = _forward_cached(params, x1, x2, mode == "train", rng)
    out = cache.output.a_out
    return out[0] if single else out


def loss(
    probs: np.ndarray, true_class: int, class_weight: np.ndarray | None = None
) -> float:
    """Weighted cross-entropy of one probability vector against its label."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1:
        raise ValueError("loss expects a single probability vector")
    if not 0 <= true_class < probs.shape[0]:
        raise ValueError(f"label {true_class} out of range for {probs.shape[0]} classes")
    weight = 1.0 if class_weight is None else float(class_weight[true_class])
    return -weight * math.log(float(probs[true_class]) + _EPS)


@dataclass
class Batch:
    """Encoded samples: both input branches, labels, optional class weights."""

    x1: np.ndarray
    x2: np.ndarray
    y: np.ndarray
    class_weight: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.x1 = np.asarray(self.x1, dtype=np.float64)
        self.x2 = np.asarray(self.x2, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.x1.ndim != 2 or self.x2.ndim != 2 or self.y.ndim != 1:
            raise ValueError("batch arrays must be 2-D inputs and 1-D labels")
        if not (self.x1.shape[0] == self.x2.shape[0] == self.y.shape[0]):
            raise ValueError("batch arrays disagree on sample count")

    def __len__(self) -> int:
        return self.y.shape[0]

    def take(self, indices: np.ndarray) -> "Batch":
        return Batch(
            x1=self.x1[indices],
            x2=self.x2[indices],
            y=self.y[indices],
            class_weight=self.class_weight,
        )


def _sample_weights(batch: Batch) -> np.ndarray:
    if batch.class_weight is None:
        return np.ones(len(batch), dtype=np.float64)
    return np.asarray(batch.class_weight, dtype=np.float64)[batch.y]


def _weighted_mean_loss(probs: np.ndarray, batch: Batch) -> float:
    w = _sample_weights(batch)
    picked = probs[np.arange(len(batch)), batch.y]
    return float(np.mean(-w * np.log(picked + _EPS)))


def _layer_backward(
    layer: DenseLayer, cache: _LayerCache, d_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradient through activation+affine; returns (dW, db, d_input)."""
    if cache.mask is not None:
        d_out = d_out * cache.mask
    if layer.activation == "relu":
        dz = d_out * (cache.z > 0.0)
    elif layer.activation == "linear":
        dz = d_out
    else:
        raise ValueError("softmax layers are handled jointly with the loss")
    dw = cache.a_in.T @ dz
    db = dz.sum(axis=0)
    return dw, db, dz @ layer.w.T


def _backprop(
    params: ModelParams, cache: _ForwardCache, batch: Batch
) -> list[np.ndarray]:
    n = len(batch)
    w = _sample_weights(batch)
    probs = cache.output.a_out
    # softmax + cross-entropy collapse: dz = (p - onehot) * weight / n
    dz = probs.copy()
    dz[np.arange(n), batch.y] -= 1.0
    dz *= w[:, None] / n
    if cache.output.mask is not None:
        raise ValueError("output layer must not use dropout")
    grads: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    out_dw = cache.output.a_in.T @ dz
    out_db = dz.sum(axis=0)
    d_h = dz @ params.output.w.T

    for idx in range(len(params.merge) - 1, -1, -1):
        dw, db, d_h = _layer_backward(params.merge[idx], cache.merge[idx], d_h)
        grads[len(params.branch1) + len(params.branch2) + idx] = (dw, db)
    d_h1 = d_h[:, : cache.h1_width]
    d_h2 = d_h[:, cache.h1_width :]
    for idx in range(len(params.branch2) - 1, -1, -1):
        dw, db, d_h2 = _layer_backward(params.branch2[idx], cache.branch2[idx], d_h2)
        grads[len(params.branch1) + idx] = (dw, db)
    for idx in range(len(params.branch1) - 1, -1, -1):
        dw, db, d_h1 = _layer_backward(params.branch1[idx], cache.branch1[idx], d_h1)
        grads[idx] = (dw, db)

    ordered: list[np.ndarray] = []
    n_layers = len(params.branch1) + len(params.branch2) + len(params.merge)
    for idx in range(n_layers):
        dw, db = grads[idx]
        ordered.extend([dw, db])
    ordered.extend([out_dw, out_db])
    return ordered


def backward(
    params: ModelParams,
    batch: Batch,
    mode: str = "eval",
    rng: np.random.Generator | None = None,
) -> list[np.ndarray]:
    """Mean-reduced loss gradients for every parameter array.

    Runs its own forward pass (eval mode unless told otherwise), so the
    result is a pure function of params and batch when ``mode="eval"``.
    """
    if params.output.activation != "softmax":
        raise ValueError("backward requires a softmax output layer")
    cache = _forward_cached(
        params, batch.x1, batch.x2, mode == "train", rng
    )
    return _backprop(params, cache, batch)


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

def adam_step(
    params: ModelParams,
    grads: Sequence[np.ndarray],
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> ModelParams:
    """One in-place Adam update with bias correction; returns ``params``."""
    arrays = params.param_arrays()
    if len(grads) != len(arrays):
        raise ValueError(f"{len(grads)} gradients for {len(arrays)} parameter arrays")
    state = params.adam
    assert state is not None
    state.step += 1
    t = state.step
    for theta, g, m, v in zip(arrays, grads, state.m, state.v):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * np.square(g)
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        theta -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return params


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitConfig:
    max_epochs: int = 1000
    batch_size: int = 64
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    patience: int = 50
    seed: int = 0
    track_train_accuracy: bool = True


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float
    train_accuracy: float


@dataclass
class TrainState:
    """Early-stopping and checkpointing monitors.

    Stopping watches validation loss: after ``patience`` consecutive epochs
    without a strict improvement, training halts.  The snapshot watches
    validation accuracy independently, keeping the parameters of the best
    epoch seen so far.
    """

    patience: int = 50
    epoch: int = 0
    best_val_loss: float = math.inf
    best_val_accuracy: float = -math.inf
    epochs_since_improvement: int = 0
    best_snapshot: ModelParams | None = None

    def update(
        self,
        epoch: int,
        val_loss: float,
        val_accuracy: float,
        snapshot: Callable[[], ModelParams],
    ) -> bool:
        """Record one epoch; returns True when training should halt."""
        self.epoch = epoch
        if val_accuracy > self.best_val_accuracy:
            self.best_val_accuracy = val_accuracy
            self.best_snapshot = snapshot()
        if val_loss < self.best_val_loss:
            self.best_val_loss = val_loss
            self.epochs_since_improvement = 0
        else:
            self.epochs_since_improvement += 1
        return self.epochs_since_improvement >= self.patience


def _eval_batch(params: ModelParams, batch: Batch) -> tuple[float, float]:
    """(unweighted loss, accuracy) of a batch in eval mode."""
    probs = forward(params, batch.x1, batch.x2, "eval")
    picked = probs[np.arange(len(batch)), batch.y]
    loss_val = float(np.mean(-np.log(picked + _EPS)))
    acc = float(np.mean(probs.argmax(axis=1) == batch.y))
    return loss_val, acc


def fit(
    params: ModelParams,
    train: Batch,
    val: Batch | None,
    config: FitConfig | None = None,
    epoch_hook: Callable[[int], Batch | None] | None = None,
) -> tuple[ModelParams, list[EpochStats]]:
    """Mini-batch training with early stopping.

    ``epoch_hook`` runs before each epoch and may return a replacement
    training batch (used to redraw sampled co-authors on a schedule).
    Returns the snapshot with the best validation accuracy and the per-epoch
    history.  Without validation data the final parameters are returned and
    no early stopping happens.
    """
    config = config or FitConfig()
    if len(train) == 0:
        raise ValueError("training batch is empty")
    rng = np.random.default_rng(config.seed)
    state = TrainState(patience=config.patience)
    history: list[EpochStats] = []
    have_val = val is not None and len(val) > 0
    if not have_val:
        LOGGER.warning("no validation data: early stopping disabled")

    for epoch in range(1, config.max_epochs + 1):
        if epoch_hook is not None:
            replacement = epoch_hook(epoch)
            if replacement is not None:
                if len(replacement) != len(train):
                    raise ValueError("epoch hook changed the training set size")
                train = replacement
        order = rng.permutation(len(train))
        loss_sum = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = train.take(order[start : start + config.batch_size])
            cache = _forward_cached(params, batch.x1, batch.x2, True, rng)
            loss_sum += _weighted_mean_loss(cache.output.a_out, batch) * len(batch)
            grads = _backprop(params, cache, batch)
            adam_step(
                params,
                grads,
                lr=config.lr,
                beta1=config.beta1,
                beta2=config.beta2,
                eps=config.eps,
            )
        train_loss = loss_sum / len(train)
        train_acc = math.nan
        if config.track_train_accuracy:
            _, train_acc = _eval_batch(params, train)
        val_loss = val_acc = math.nan
        if have_val:
            assert val is not None
            val_loss, val_acc = _eval_batch(params, val)
        history.append(
            EpochStats(
                epoch=epoch,
                train_loss=train_loss,
                val_loss=val_loss,
                val_accuracy=val_acc,
                train_accuracy=train_acc,
            )
        )
        if have_val and state.update(epoch, val_loss, val_acc, lambda: clone_params(params)):
            LOGGER.info(
                "early stop at epoch %d (no val-loss improvement in %d epochs)",
                epoch,
                state.patience,
            )
            break

    best = state.best_snapshot if state.best_snapshot is not None else params
    return best, history


def history_as_text(history: Sequence[EpochStats]) -> str:
    lines = ["epoch\ttrain_loss\tval_loss\tval_accuracy\ttrain_accuracy"]
    for row in history:
        lines.append(
            f"{row.epoch}\t{row.train_loss:.6f}\t{row.val_loss:.6f}"
            f"\t{row.val_accuracy:.6f}\t{row.train_accuracy:.6f}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

_CKPT_MAGIC = b"WMDL"
_CKPT_VERSION = 1
_ACT_CODES = {"relu": 0, "linear": 1, "softmax": 2}
_ACT_NAMES = {code: name for name, code in _ACT_CODES.items()}


def _pack_string(text: str) -> bytes:
    encoded = text.encode("utf-8")
    return struct.pack("<I", len(encoded)) + encoded


def checkpoint_save(path: str | Path, params: ModelParams) -> None:
    """Serialize a model; loading and re-saving is byte-identical."""
    text_dim = params.branch2[0].fan_in if params.branch2 else 0
    parts = [
        _CKPT_MAGIC,
        struct.pack("<HII", _CKPT_VERSION, text_dim, len(params.classes)),
        _pack_string(params.anv),
    ]
    for label in params.classes:
        parts.append(_pack_string(label))
    for group in (params.branch1, params.branch2, params.merge):
        parts.append(struct.pack("<I", len(group)))
        for layer in group:
            parts.append(_pack_layer_header(layer))
    parts.append(_pack_layer_header(params.output))
    for layer in params.layers():
        parts.append(layer.w.astype("<f8", copy=False).tobytes())
        parts.append(layer.b.astype("<f8", copy=False).tobytes())
    state = params.adam
    assert state is not None
    parts.append(struct.pack("<Q", state.step))
    for arrays in (state.m, state.v):
        for a in arrays:
            parts.append(a.astype("<f8", copy=False).tobytes())
    atomic_write_bytes(path, b"".join(parts))


def _pack_layer_header(layer: DenseLayer) -> bytes:
    return struct.pack(
        "<IIBd",
        layer.fan_in,
        layer.fan_out,
        _ACT_CODES[layer.activation],
        layer.dropout,
    )


class _CkptCursor:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, count: int) -> bytes:
        if self.offset + count > len(self.data):
            raise CheckpointError(f"{self.path}: truncated checkpoint")
        piece = self.data[self.offset : self.offset + count]
        self.offset += count
        return piece

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (length,) = self.unpack("<I")
        if length > 1 << 20:
            raise CheckpointError(f"{self.path}: unreasonable string length")
        return self.take(length).decode("utf-8")

    def array(self, shape: tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape)) if shape else 1
        raw = self.take(8 * count)
        return np.frombuffer(raw, dtype="<f8").reshape(shape).copy()


def checkpoint_load(path: str | Path) -> ModelParams:
    data = Path(path).read_bytes()
    cursor = _CkptCursor(data, str(path))
    if cursor.take(4) != _CKPT_MAGIC:
        raise CheckpointError(f"{path}: not a model checkpoint")
    version, text_dim, n_classes = cursor.unpack("<HII")
    if version != _CKPT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    anv = cursor.string()
    classes = [cursor.string() for _ in range(n_classes)]

    def read_headers(count: int) -> list[tuple[int, int, str, float]]:
        headers = []
        for _ in range(count):
            fan_in, fan_out, act, dropout = cursor.unpack("<IIBd")
            if act not in _ACT_NAMES:
                raise CheckpointError(f"{path}: unknown activation code {act}")
            headers.append((fan_in, fan_out, _ACT_NAMES[act], dropout))
        return headers

    group_headers = []
    for _ in range(3):
        (count,) = cursor.unpack("<I")
        if count > 64:
            raise CheckpointError(f"{path}: unreasonable layer count {count}")
        group_headers.append(read_headers(count))
    out_header = read_headers(1)[0]

    def build_group(headers: list[tuple[int, int, str, float]]) -> list[DenseLayer]:
        layers = []
        for fan_in, fan_out, act, dropout in headers:
            w = cursor.array((fan_in, fan_out))
            b = cursor.array((fan_out,))
            layers.append(DenseLayer(w=w, b=b, activation=act, dropout=dropout))
        return layers

    branch1 = build_group(group_headers[0])
    branch2 = build_group(group_headers[1])
    merge = build_group(group_headers[2])
    output = build_group([out_header])[0]

    for group in (branch1, branch2, merge):
        for prev, nxt in zip(group, group[1:]):
            if prev.fan_out != nxt.fan_in:
                raise CheckpointError(f"{path}: layer widths do not compose")
    if branch2 and branch2[0].fan_in != text_dim:
        raise CheckpointError(
            f"{path}: header text dim {text_dim} != branch input {branch2[0].fan_in}"
        )
    if output.fan_out != n_classes:
        raise CheckpointError(
            f"{path}: output width {output.fan_out} != {n_classes} classes"
        )

    params = ModelParams(
        branch1=branch1,
        branch2=branch2,
        merge=merge,
        output=output,
        classes=classes,
        anv=anv,
    )
    (step,) = cursor.unpack("<Q")
    state = params.adam
    assert state is not None
    state.step = step
    shapes = [a.shape for a in params.param_arrays()]
    state.m = [cursor.array(shape) for shape in shapes]
    state.v = [cursor.array(shape) for shape in shapes]
    if cursor.offset != len(data):
        raise CheckpointError(f"{path}: trailing bytes after checkpoint payload")
    return params

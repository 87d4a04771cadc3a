"""Channel-independent DLinear forecaster with a hand-rolled training loop.

The model decomposes each lookback window into a moving-average trend and a
seasonal remainder, then applies one linear layer per component. One weight
pair (H x S) is shared across channels, so a single model serves every
sensor of a building. Training is minibatch Adam on MSE with early stopping
on validation loss; everything runs in float64 and is deterministic for a
fixed seed.
"""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .domain import BricklineError, ShapeMismatch, _freeze
from .preprocess import PreprocessedDataset

LOOKBACK_STEPS = 144            # 1 day of 10-minute steps
HORIZONS = (12, 48, 96, 144, 432, 1008)
DEFAULT_KERNEL = 25

MODEL_MAGIC = b"BITSA-DL"
MODEL_VERSION = 1


class SeriesTooShort(BricklineError):
    pass


class BadKernel(BricklineError):
    pass


class EmptyBatch(BricklineError):
    pass


class NonFiniteLoss(BricklineError):
    pass


class PeriodTooLong(BricklineError):
    pass


class CorruptFile(BricklineError):
    pass


class VersionMismatch(BricklineError):
    pass


@dataclass(frozen=True)
class WindowPair:
    x: np.ndarray  # S x C lookback
    y: np.ndarray  # H x C target, starting the step after x ends

    def __post_init__(self):
        object.__setattr__(self, "x", _freeze(np.asarray(self.x, dtype=np.float64)))
        object.__setattr__(self, "y", _freeze(np.asarray(self.y, dtype=np.float64)))
        if self.x.ndim != 2 or self.y.ndim != 2 or self.x.shape[1] != self.y.shape[1]:
            raise ShapeMismatch("x and y must be 2-d with matching channel count")


@dataclass(frozen=True)
class DLinearModel:
    lookback: int
    horizon: int
    kernel: int
    w_trend: np.ndarray     # H x S
    w_seasonal: np.ndarray  # H x S
    b_trend: np.ndarray     # H
    b_seasonal: np.ndarray  # H

    def __post_init__(self):
        if self.kernel < 1 or self.kernel % 2 == 0 or self.kernel > self.lookback:
            raise BadKernel(f"kernel must be odd and in [1, {self.lookback}], got {self.kernel}")
        shape = (self.horizon, self.lookback)
        for name, want in (("w_trend", shape), ("w_seasonal", shape),
                           ("b_trend", (self.horizon,)), ("b_seasonal", (self.horizon,))):
            arr = _freeze(np.asarray(getattr(self, name), dtype=np.float64))
            object.__setattr__(self, name, arr)
            if arr.shape != want:
                raise ShapeMismatch(f"{name}: expected {want}, got {arr.shape}")
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite values")

    def params(self) -> tuple[np.ndarray, ...]:
        return (self.w_trend, self.w_seasonal, self.b_trend, self.b_seasonal)


def new_model(horizon: int, lookback: int = LOOKBACK_STEPS, kernel: int = DEFAULT_KERNEL) -> DLinearModel:
    """Zero-initialized model (the training problem is convex, so zeros suffice)."""
    return DLinearModel(
        lookback=lookback, horizon=horizon, kernel=kernel,
        w_trend=np.zeros((horizon, lookback)),
        w_seasonal=np.zeros((horizon, lookback)),
        b_trend=np.zeros(horizon),
        b_seasonal=np.zeros(horizon),
    )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs_max: int = 100
    patience: int = 10
    batch_size: int = 64
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    lookback: int = LOOKBACK_STEPS
    kernel: int = DEFAULT_KERNEL

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not self.patience < self.epochs_max:
            raise ValueError("patience must be < epochs_max")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    @classmethod
    def from_mapping(cls, section: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in section.items() if k in known})


@dataclass
class TrainingLog:
    seed: int
    train_losses: list = field(default_factory=list)
    val_losses: list = field(default_factory=list)
    best_epoch: int = 0
    stop_epoch: int = 0
    wall_time_s: float = 0.0
    val_fallback: bool = False  # true when the val split held no full window

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "train_losses": list(self.train_losses),
            "val_losses": list(self.val_losses),
            "best_epoch": self.best_epoch,
            "stop_epoch": self.stop_epoch,
            "wall_time_s": self.wall_time_s,
            "val_fallback": self.val_fallback,
        }


# --------------------------------------------------------------------------
# model math


def decompose(x: np.ndarray, kernel: int) -> tuple[np.ndarray, np.ndarray]:
    """Split into (trend, seasonal): centered replicate-padded moving average
    of width `kernel`, and the remainder x - trend."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :, None]
    elif x.ndim == 2:
        x = x[None]
    if kernel < 1 or kernel % 2 == 0 or kernel > x.shape[1]:
        raise BadKernel(f"kernel must be odd and in [1, {x.shape[1]}], got {kernel}")
    trend = kernels.moving_average(x, kernel)
    seasonal = x - trend
    if squeeze:
        return trend[0, :, 0], seasonal[0, :, 0]
    return trend[0], seasonal[0]


def _decompose_batch(x: np.ndarray, kernel: int) -> tuple[np.ndarray, np.ndarray]:
    trend = kernels.moving_average(x, kernel)
    return trend, x - trend


def forward(model: DLinearModel, x: np.ndarray) -> np.ndarray:
    """Predict H x C from a lookback window S x C (or B x H x C from B x S x C)."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3 or x.shape[1] != model.lookback:
        raise ShapeMismatch(f"expected lookback {model.lookback}, got input shape {x.shape}")
    trend, seasonal = _decompose_batch(x, model.kernel)
    yhat = (
        np.einsum("hs,bsc->bhc", model.w_trend, trend)
        + np.einsum("hs,bsc->bhc", model.w_seasonal, seasonal)
        + (model.b_trend + model.b_seasonal)[None, :, None]
    )
    return yhat[0] if single else yhat


def loss_and_gradients(
    model_params: tuple[np.ndarray, ...],
    kernel: int,
    x: np.ndarray,
    y: np.ndarray,
) -> tuple[float, tuple[np.ndarray, ...]]:
    """MSE over all batch elements, steps, channels; exact analytic gradients.

    `x` is B x S x C, `y` is B x H x C. Parameters are passed as the tuple
    (w_trend, w_seasonal, b_trend, b_seasonal) so the optimizer can treat
    them uniformly.
    """
    if x.shape[0] == 0:
        raise EmptyBatch("batch is empty")
    if x.ndim != 3 or y.ndim != 3 or x.shape[0] != y.shape[0] or x.shape[2] != y.shape[2]:
        raise ShapeMismatch(f"incompatible batch shapes {x.shape} / {y.shape}")
    w_trend, w_seasonal, b_trend, b_seasonal = model_params
    trend, seasonal = _decompose_batch(x, kernel)
    yhat = (
        np.einsum("hs,bsc->bhc", w_trend, trend)
        + np.einsum("hs,bsc->bhc", w_seasonal, seasonal)
        + (b_trend + b_seasonal)[None, :, None]
    )
    diff = yhat - y
    loss = float(np.mean(diff * diff))
    g = diff * (2.0 / diff.size)  # dL/dyhat
    grads = (
        np.einsum("bhc,bsc->hs", g, trend),
        np.einsum("bhc,bsc->hs", g, seasonal),
        g.sum(axis=(0, 2)),
        g.sum(axis=(0, 2)),
    )
    return loss, grads


def seasonal_naive(x: np.ndarray, horizon: int, period: int = 144) -> np.ndarray:
    """Repeat the last observed period: yhat_t = x[S - period + (t mod period)]."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.shape[1] < period:
        raise PeriodTooLong(f"lookback {x.shape[1]} shorter than period {period}")
    idx = x.shape[1] - period + (np.arange(horizon) % period)
    out = x[:, idx, :]
    return out[0] if single else out


# --------------------------------------------------------------------------
# optimizer


@dataclass
class AdamState:
    m: list  # one array per parameter
    v: list
    t: int = 0

    @classmethod
    def for_params(cls, params: tuple[np.ndarray, ...]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params])


def adam_step(
    params: tuple[np.ndarray, ...],
    grads: tuple[np.ndarray, ...],
    state: AdamState,
    config: TrainConfig,
) -> tuple[np.ndarray, ...]:
    """One bias-corrected Adam update, in place on state, returning new params."""
    state.t += 1
    b1, b2 = config.beta1, config.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        m = state.m[i] = b1 * state.m[i] + (1.0 - b1) * g
        v = state.v[i] = b2 * state.v[i] + (1.0 - b2) * (g * g)
        out.append(p - config.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + config.epsilon))
    return tuple(out)


# --------------------------------------------------------------------------
# windowing and training


def make_windows(matrix: np.ndarray, lookback: int, horizon: int, stride: int = 1) -> list[WindowPair]:
    """All contiguous (lookback, horizon) pairs; pair i starts at row i*stride."""
    matrix = np.asarray(matrix, dtype=np.float64)
    n = matrix.shape[0] - lookback - horizon + 1
    if n < 1:
        raise SeriesTooShort(
            f"need >= {lookback + horizon} rows for S={lookback}, H={horizon}; got {matrix.shape[0]}"
        )
    return [
        WindowPair(x=matrix[i:i + lookback], y=matrix[i + lookback:i + lookback + horizon])
        for i in range(0, n, stride)
    ]


def _gather(matrix: np.ndarray, starts: np.ndarray, lookback: int, horizon: int):
    x = matrix[starts[:, None] + np.arange(lookback)[None, :]]
    y = matrix[starts[:, None] + lookback + np.arange(horizon)[None, :]]
    return x, y


def evaluate_mse(params, kernel: int, matrix: np.ndarray, starts: np.ndarray,
                 lookback: int, horizon: int, chunk: int = 512) -> float:
    """Mean squared error over the given window starts, in fixed chunk order."""
    total = 0.0
    count = 0
    for lo in range(0, starts.size, chunk):
        x, y = _gather(matrix, starts[lo:lo + chunk], lookback, horizon)
        loss, _ = _forward_loss_only(params, kernel, x, y)
        total += loss * x.shape[0]
        count += x.shape[0]
    return total / count


def _forward_loss_only(params, kernel, x, y):
    w_trend, w_seasonal, b_trend, b_seasonal = params
    trend, seasonal = _decompose_batch(x, kernel)
    yhat = (
        np.einsum("hs,bsc->bhc", w_trend, trend)
        + np.einsum("hs,bsc->bhc", w_seasonal, seasonal)
        + (b_trend + b_seasonal)[None, :, None]
    )
    diff = yhat - y
    return float(np.mean(diff * diff)), yhat


def split_window_starts(n_steps: int, train_end: int, val_end: int,
                        lookback: int, horizon: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Chronological window start indices for the three splits.

    Train windows lie entirely inside the training rows. Validation and test
    windows are anchored on their target rows: the lookback may reach back
    across the boundary (targets never leak forward), so a split of length L
    contributes L - H + 1 windows.
    """
    train_n = train_end - lookback - horizon + 1
    train = np.arange(max(train_n, 0))
    val = np.arange(train_end - lookback, val_end - lookback - horizon + 1)
    val = val[val >= 0]
    test = np.arange(val_end - lookback, n_steps - lookback - horizon + 1)
    test = test[test >= 0]
    return train, val, test


_REL_MIN_DELTA = 1e-4  # train-loss fallback improvement threshold


def train(dataset: PreprocessedDataset, horizon: int, config: TrainConfig = TrainConfig()) -> tuple[DLinearModel, TrainingLog]:
    """Minibatch Adam with early stopping; restores the best-validation epoch.

    Stops once validation MSE has not improved for `patience` consecutive
    epochs (or after epochs_max). When the validation split is too short to
    hold a single window for this horizon, early stopping falls back to the
    train loss with a relative min-delta, and the log says so.
    """
    lookback = config.lookback
    matrix = dataset.matrix
    train_starts, val_starts, _ = split_window_starts(
        dataset.n_steps, dataset.train_end, dataset.val_end, lookback, horizon)
    if train_starts.size == 0:
        raise SeriesTooShort(
            f"training split has no room for S={lookback}, H={horizon} windows")
    use_val = val_starts.size > 0

    model = new_model(horizon, lookback, config.kernel)
    params = model.params()
    state = AdamState.for_params(params)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    log = TrainingLog(seed=config.seed, val_fallback=not use_val)
    began = time.monotonic()

    best_metric = np.inf
    best_params = params
    bad_epochs = 0
    for epoch in range(1, config.epochs_max + 1):
        order = rng.permutation(train_starts.size)
        epoch_loss = 0.0
        seen = 0
        for lo in range(0, order.size, config.batch_size):
            batch = train_starts[order[lo:lo + config.batch_size]]
            x, y = _gather(matrix, batch, lookback, horizon)
            loss, grads = loss_and_gradients(params, config.kernel, x, y)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"epoch {epoch}: train loss became {loss}")
            params = adam_step(params, grads, state, config)
            epoch_loss += loss * x.shape[0]
            seen += x.shape[0]
        train_loss = epoch_loss / seen
        log.train_losses.append(train_loss)

        if use_val:
            metric = evaluate_mse(params, config.kernel, matrix, val_starts, lookback, horizon)
            log.val_losses.append(metric)
            improved = metric < best_metric
        else:
            metric = train_loss
            improved = metric < best_metric * (1.0 - _REL_MIN_DELTA)
        if not np.isfinite(metric):
            raise NonFiniteLoss(f"epoch {epoch}: monitored loss became {metric}")

        if improved:
            best_metric = metric
            best_params = tuple(p.copy() for p in params)
            log.best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
        log.stop_epoch = epoch
        if bad_epochs >= config.patience:
            break

    log.wall_time_s = time.monotonic() - began
    trained = replace(model, w_trend=best_params[0], w_seasonal=best_params[1],
                      b_trend=best_params[2], b_seasonal=best_params[3])
    return trained, log


# --------------------------------------------------------------------------
# persistence

_HEADER = struct.Struct("<8sHIIIB")  # magic, version, S, H, kernel, channel-independent flag


def model_to_bytes(model: DLinearModel) -> bytes:
    """The little-endian binary model format: header + row-major f64 blocks."""
    parts = [_HEADER.pack(MODEL_MAGIC, MODEL_VERSION,
                          model.lookback, model.horizon, model.kernel, 1)]
    for arr in model.params():
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return b"".join(parts)


def save_model(model: DLinearModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(model_to_bytes(model))


def load_model(path, expect_horizon: int | None = None) -> DLinearModel:
    """Read a saved model; bitwise round-trip with save_model."""
    with open(path, "rb") as fh:
        blob = fh.read()
    return model_from_bytes(blob, source=str(path), expect_horizon=expect_horizon)


def model_from_bytes(blob: bytes, source: str = "<bytes>",
                     expect_horizon: int | None = None) -> DLinearModel:
    path = source
    if len(blob) < _HEADER.size:
        raise CorruptFile(f"{path}: truncated header")
    magic, version, lookback, horizon, kernel, flag = _HEADER.unpack_from(blob)
    if magic != MODEL_MAGIC:
        raise CorruptFile(f"{path}: bad magic {magic!r}")
    if version != MODEL_VERSION:
        raise VersionMismatch(f"{path}: format version {version}, expected {MODEL_VERSION}")
    if expect_horizon is not None and horizon != expect_horizon:
        raise VersionMismatch(f"{path}: holds horizon {horizon}, expected {expect_horizon}")
    if flag != 1:
        raise CorruptFile(f"{path}: unknown layout flag {flag}")
    sizes = [horizon * lookback, horizon * lookback, horizon, horizon]
    want = _HEADER.size + 8 * sum(sizes)
    if len(blob) != want:
        raise CorruptFile(f"{path}: expected {want} bytes, found {len(blob)}")
    offset = _HEADER.size
    arrays = []
    for n in sizes:
        arrays.append(np.frombuffer(blob, dtype="<f8", count=n, offset=offset).astype(np.float64))
        offset += 8 * n
    return DLinearModel(
        lookback=lookback, horizon=horizon, kernel=kernel,
        w_trend=arrays[0].reshape(horizon, lookback),
        w_seasonal=arrays[1].reshape(horizon, lookback),
        b_trend=arrays[2], b_seasonal=arrays[3],
    )

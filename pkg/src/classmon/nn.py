"""Forward and backward passes for the small affect-classification CNN.

Architecture: two blocks of [3x3 conv (stride 1, zero-padded), ReLU,
2x2 max-pool] with 16 and 32 filters, global average pooling, a dense
ReLU layer of 64 units and a dense softmax layer over the four classes.
Global average pooling makes the network input-size agnostic, which the
gradient-check tests exploit by running on small images.

Everything here is plain numpy. Convolutions are evaluated as matrix
products over sliding-window patches; backward passes are hand-derived
and verified against central finite differences in the test suite.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import LengthMismatch, ShapeMismatch
from .labels import N_CLASSES

KERNEL = 3
CONV_FILTERS = (16, 32)
HIDDEN_UNITS = 64
PROB_FLOOR = 1e-12

PARAM_ORDER = (
    "conv1_w",
    "conv1_b",
    "conv2_w",
    "conv2_b",
    "dense1_w",
    "dense1_b",
    "dense2_w",
    "dense2_b",
)


def glorot_uniform(shape, fan_in, fan_out, rng, dtype):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def init_params(channels: int = 1, rng=None, dtype=np.float64) -> dict:
    """Seeded Glorot-uniform weights, zero biases, in a name -> array dict."""
    if rng is None:
        rng = np.random.default_rng()
    k = KERNEL
    f1, f2 = CONV_FILTERS
    params = {
        "conv1_w": glorot_uniform((k, k, channels, f1), k * k * channels, k * k * f1, rng, dtype),
        "conv1_b": np.zeros(f1, dtype=dtype),
        "conv2_w": glorot_uniform((k, k, f1, f2), k * k * f1, k * k * f2, rng, dtype),
        "conv2_b": np.zeros(f2, dtype=dtype),
        "dense1_w": glorot_uniform((f2, HIDDEN_UNITS), f2, HIDDEN_UNITS, rng, dtype),
        "dense1_b": np.zeros(HIDDEN_UNITS, dtype=dtype),
        "dense2_w": glorot_uniform((HIDDEN_UNITS, N_CLASSES), HIDDEN_UNITS, N_CLASSES, rng, dtype),
        "dense2_b": np.zeros(N_CLASSES, dtype=dtype),
    }
    return params


def _im2col(x, k):
    # x: (N, H, W, C), zero-padded so output keeps the spatial size.
    pad = k // 2
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
    win = sliding_window_view(xp, (k, k), axis=(1, 2))  # (N, H, W, C, k, k)
    win = win.transpose(0, 1, 2, 4, 5, 3)  # (N, H, W, k, k, C)
    n, h, w = win.shape[:3]
    return np.ascontiguousarray(win).reshape(n, h, w, k * k * x.shape[3])


def _conv_forward(x, w, b):
    k = w.shape[0]
    cols = _im2col(x, k)
    out = cols @ w.reshape(-1, w.shape[3]) + b
    return out, cols


def _conv_backward(dout, cols, x_shape, w):
    k = w.shape[0]
    pad = k // 2
    n, h, width, c = x_shape
    f = w.shape[3]
    dw = cols.reshape(-1, cols.shape[3]).T @ dout.reshape(-1, f)
    dw = dw.reshape(w.shape)
    db = dout.sum(axis=(0, 1, 2))
    dcols = dout @ w.reshape(-1, f).T  # (N, H, W, k*k*C)
    dcols = dcols.reshape(n, h, width, k, k, c)
    dxp = np.zeros((n, h + 2 * pad, width + 2 * pad, c), dtype=dout.dtype)
    for i in range(k):
        for j in range(k):
            dxp[:, i : i + h, j : j + width, :] += dcols[:, :, :, i, j, :]
    return dxp[:, pad : pad + h, pad : pad + width, :], dw, db


def _maxpool_forward(x):
    # 2x2 windows, stride 2; odd trailing rows/columns are dropped.
    n, h, w, c = x.shape
    ho, wo = h // 2, w // 2
    x = x[:, : ho * 2, : wo * 2, :]
    win = x.reshape(n, ho, 2, wo, 2, c).transpose(0, 1, 3, 2, 4, 5).reshape(n, ho, wo, 4, c)
    idx = win.argmax(axis=3)
    out = np.take_along_axis(win, idx[:, :, :, None, :], axis=3)[:, :, :, 0, :]
    return out, (idx, (n, h, w, c))


def _maxpool_backward(dout, cache):
    idx, (n, h, w, c) = cache
    ho, wo = dout.shape[1], dout.shape[2]
    dwin = np.zeros((n, ho, wo, 4, c), dtype=dout.dtype)
    np.put_along_axis(dwin, idx[:, :, :, None, :], dout[:, :, :, None, :], axis=3)
    dx = np.zeros((n, h, w, c), dtype=dout.dtype)
    dcrop = dwin.reshape(n, ho, wo, 2, 2, c).transpose(0, 1, 3, 2, 4, 5).reshape(n, ho * 2, wo * 2, c)
    dx[:, : ho * 2, : wo * 2, :] = dcrop
    return dx


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted for numerical stability."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(probs, codes) -> float:
    """Mean negative log-probability of the true class over a batch.

    Probabilities are floored at 1e-12 before the log so a confidently
    wrong prediction yields a large finite loss instead of infinity.
    """
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(codes, dtype=np.int64)
    if p.ndim == 1:
        p = p[None, :]
    if y.ndim == 0:
        y = y[None]
    if p.shape[0] != y.shape[0]:
        raise LengthMismatch(
            f"{p.shape[0]} probability rows but {y.shape[0]} labels"
        )
    if y.size and (y.min() < 0 or y.max() >= p.shape[1]):
        raise LengthMismatch("class code out of range")
    true_p = np.clip(p[np.arange(p.shape[0]), y], PROB_FLOOR, None)
    return float(-np.log(true_p).mean())


def forward(params: dict, x: np.ndarray, want_cache: bool = False):
    """Full forward pass. x is (N, H, W, C) with C matching conv1_w."""
    if x.ndim != 4:
        raise ShapeMismatch(f"expected 4-D input, got shape {x.shape}")
    if x.shape[3] != params["conv1_w"].shape[2]:
        raise ShapeMismatch(
            f"input has {x.shape[3]} channel(s), model expects {params['conv1_w'].shape[2]}"
        )
    z1, cols1 = _conv_forward(x, params["conv1_w"], params["conv1_b"])
    a1 = np.maximum(z1, 0.0)
    p1, pool1 = _maxpool_forward(a1)

    z2, cols2 = _conv_forward(p1, params["conv2_w"], params["conv2_b"])
    a2 = np.maximum(z2, 0.0)
    p2, pool2 = _maxpool_forward(a2)

    gap = p2.mean(axis=(1, 2))  # (N, F2)

    h1 = gap @ params["dense1_w"] + params["dense1_b"]
    a3 = np.maximum(h1, 0.0)
    logits = a3 @ params["dense2_w"] + params["dense2_b"]
    probs = softmax(logits)
    if not want_cache:
        return probs
    cache = {
        "x_shape": x.shape,
        "cols1": cols1,
        "z1": z1,
        "pool1": pool1,
        "p1_shape": p1.shape,
        "cols2": cols2,
        "z2": z2,
        "pool2": pool2,
        "p2_shape": p2.shape,
        "gap": gap,
        "h1": h1,
        "a3": a3,
        "probs": probs,
    }
    return probs, cache


def loss_and_grads(params: dict, x: np.ndarray, codes):
    """Cross-entropy loss plus analytic gradients for every parameter."""
    y = np.asarray(codes, dtype=np.int64)
    probs, cache = forward(params, x, want_cache=True)
    n = x.shape[0]
    loss = cross_entropy(probs, y)

    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n

    grads = {}
    grads["dense2_w"] = cache["a3"].T @ dlogits
    grads["dense2_b"] = dlogits.sum(axis=0)
    da3 = dlogits @ params["dense2_w"].T
    dh1 = da3 * (cache["h1"] > 0)
    grads["dense1_w"] = cache["gap"].T @ dh1
    grads["dense1_b"] = dh1.sum(axis=0)
    dgap = dh1 @ params["dense1_w"].T

    _, hp2, wp2, _ = cache["p2_shape"]
    dp2 = np.broadcast_to(
        dgap[:, None, None, :] / (hp2 * wp2), cache["p2_shape"]
    ).astype(dgap.dtype)
    da2 = _maxpool_backward(dp2, cache["pool2"])
    dz2 = da2 * (cache["z2"] > 0)
    dp1, dw2, db2 = _conv_backward(dz2, cache["cols2"], cache["p1_shape"], params["conv2_w"])
    grads["conv2_w"] = dw2
    grads["conv2_b"] = db2

    da1 = _maxpool_backward(dp1, cache["pool1"])
    dz1 = da1 * (cache["z1"] > 0)
    _, dw1, db1 = _conv_backward(dz1, cache["cols1"], cache["x_shape"], params["conv1_w"])
    grads["conv1_w"] = dw1
    grads["conv1_b"] = db1
    return loss, grads, probs

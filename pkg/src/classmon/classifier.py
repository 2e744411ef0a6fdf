"""Facial-affect classifier with an sklearn-style estimator interface.

EmotionCNN wraps the numpy network in `nn` behind fit / predict /
predict_proba / get_params so it slots into standard tooling, and any
object exposing predict_proba over preprocessed image batches can stand in
for it wherever the session engine expects a classifier.
"""

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from . import nn
from .errors import EmptyDataset, EmptyImage, InvalidCheckpoint, MissingClass
from .labels import EMOTION_LABELS, N_CLASSES
from .optim import AdamConfig, AdamOptimizer
from .validation import FACE_SIZE, check_crop, check_image_batch

CHECKPOINT_VERSION = 1


def bilinear_resize(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Classic bilinear interpolation with pixel-center alignment.

    image is (H, W, C) float; constant images resize to the same constant.
    """
    h, w = image.shape[:2]
    if h == out_h and w == out_w:
        return image.copy()
    rows = (np.arange(out_h) + 0.5) * h / out_h - 0.5
    cols = (np.arange(out_w) + 0.5) * w / out_w - 0.5
    rows = np.clip(rows, 0, h - 1)
    cols = np.clip(cols, 0, w - 1)
    r0 = np.floor(rows).astype(int)
    c0 = np.floor(cols).astype(int)
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    fr = (rows - r0)[:, None, None]
    fc = (cols - c0)[None, :, None]
    top = image[r0][:, c0] * (1 - fc) + image[r0][:, c1] * fc
    bottom = image[r1][:, c0] * (1 - fc) + image[r1][:, c1] * fc
    return top * (1 - fr) + bottom * fr


def preprocess_face(raw_crop) -> np.ndarray:
    """Resize a raw [0, 255] crop to 64x64 and scale values into [0, 1]."""
    arr = check_crop(raw_crop)
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyImage("cannot preprocess an empty crop")
    resized = bilinear_resize(arr, FACE_SIZE, FACE_SIZE)
    return np.clip(resized / 255.0, 0.0, 1.0)


def argmax_emotion(probs) -> int:
    """Class code of the maximal probability; ties break to the lowest code."""
    p = np.asarray(probs, dtype=np.float64).reshape(-1)
    return int(np.argmax(p))


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float | None


class EmotionCNN(BaseEstimator, ClassifierMixin):
    """Four-class affect classifier trained from scratch with Adam.

    Parameters mirror the training recipe: learning_rate 0.001, beta1 0.9,
    beta2 0.999, 10 epochs, batch size 32. `random_state` seeds both weight
    initialization and epoch shuffling, so equal seeds give bit-identical
    training histories.
    """

    def __init__(
        self,
        learning_rate: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
        epochs: int = 10,
        batch_size: int = 32,
        channels: int = 1,
        random_state: int | None = None,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.epochs = epochs
        self.batch_size = batch_size
        self.channels = channels
        self.random_state = random_state

    def _config(self) -> AdamConfig:
        return AdamConfig(
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
            epochs=self.epochs,
            batch_size=self.batch_size,
        ).validate()

    def fit(self, X, y, X_val=None, y_val=None):
        """Train on preprocessed images X (N, 64, 64[, C]) with codes y.

        Every one of the four classes must be present in y. When a
        validation set is given, per-epoch validation accuracy is recorded
        in `history_`.
        """
        cfg = self._config()
        X = check_image_batch(X, self.channels)
        y = np.asarray(y, dtype=np.int64)
        if X.shape[0] == 0:
            raise EmptyDataset("training set is empty")
        if y.shape != (X.shape[0],):
            raise EmptyDataset(f"label shape {y.shape} does not match {X.shape[0]} images")
        present = set(int(c) for c in np.unique(y))
        missing = [EMOTION_LABELS[c] for c in range(N_CLASSES) if c not in present]
        if missing:
            raise MissingClass(f"classes absent from training set: {', '.join(missing)}")
        if X_val is not None:
            X_val = check_image_batch(X_val, self.channels)
            y_val = np.asarray(y_val, dtype=np.int64)

        rng = np.random.default_rng(self.random_state)
        params = nn.init_params(channels=self.channels, rng=rng)
        opt = AdamOptimizer(cfg)
        n = X.shape[0]
        history: list[EpochStats] = []
        for epoch in range(cfg.epochs):
            perm = rng.permutation(n)
            loss_sum = 0.0
            correct = 0
            for start in range(0, n, cfg.batch_size):
                idx = perm[start : start + cfg.batch_size]
                loss, grads, probs = nn.loss_and_grads(params, X[idx], y[idx])
                opt.step(params, grads)
                loss_sum += loss * len(idx)
                correct += int((probs.argmax(axis=1) == y[idx]).sum())
            val_acc = None
            if X_val is not None:
                val_acc = float(
                    (nn.forward(params, X_val).argmax(axis=1) == y_val).mean()
                )
            history.append(
                EpochStats(
                    epoch=epoch,
                    train_loss=loss_sum / n,
                    train_acc=correct / n,
                    val_acc=val_acc,
                )
            )
        self.params_ = params
        self.history_ = history
        self.classes_ = np.arange(N_CLASSES)
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = check_image_batch(X, self.channels)
        return nn.forward(self.params_, X)

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X).argmax(axis=1)

    def save(self, path) -> None:
        """Write a versioned checkpoint: header plus parameter tensors."""
        header = {
            "format_version": CHECKPOINT_VERSION,
            "architecture": {
                "kernel": nn.KERNEL,
                "conv_filters": list(nn.CONV_FILTERS),
                "hidden_units": nn.HIDDEN_UNITS,
                "channels": self.channels,
            },
            "classes": {label: code for code, label in enumerate(EMOTION_LABELS)},
            "hyperparameters": self.get_params(),
        }
        arrays = {f"param_{name}": self.params_[name] for name in nn.PARAM_ORDER}
        with open(path, "wb") as fh:
            np.savez(fh, header=np.frombuffer(json.dumps(header).encode(), dtype=np.uint8), **arrays)

    @classmethod
    def load(cls, path) -> "EmotionCNN":
        with np.load(path) as data:
            if "header" not in data:
                raise InvalidCheckpoint(f"{path} is not a model checkpoint")
            header = json.loads(bytes(data["header"]).decode())
            version = header.get("format_version")
            if version != CHECKPOINT_VERSION:
                raise InvalidCheckpoint(
                    f"unsupported checkpoint version {version!r}, expected {CHECKPOINT_VERSION}"
                )
            model = cls(**header["hyperparameters"])
            model.params_ = {
                name: np.array(data[f"param_{name}"]) for name in nn.PARAM_ORDER
            }
        model.classes_ = np.arange(N_CLASSES)
        model.history_ = []
        return model

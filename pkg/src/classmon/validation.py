"""Input validation helpers.

Small check_* functions in the spirit of sklearn's validation utilities:
they coerce to numpy, verify shape and value constraints, and raise typed
errors so callers can map failures onto wire-level rejections.
"""

import numpy as np

from .errors import EmptyImage, InvalidEmbedding, ShapeMismatch

EMBEDDING_DIM = 128
FACE_SIZE = 64


def check_embedding(values, name: str = "embedding") -> np.ndarray:
    """Validate a facial identity embedding.

    Accepts any sequence of numbers; returns a float64 1-D array of length
    128 with all elements finite.
    """
    try:
        arr = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidEmbedding(f"{name} is not numeric: {exc}") from None
    if arr.ndim != 1 or arr.shape[0] != EMBEDDING_DIM:
        raise InvalidEmbedding(
            f"{name} must have exactly {EMBEDDING_DIM} elements, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidEmbedding(f"{name} contains non-finite values")
    return arr


def check_crop(crop, name: str = "face_crop") -> np.ndarray:
    """Validate a raw face crop of integer pixel values in [0, 255].

    Accepts HxW (grayscale) or HxWxC arrays with H, W >= 1.
    """
    arr = np.asarray(crop)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ShapeMismatch(f"{name} must be HxW or HxWxC, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyImage(f"{name} has a zero-sized spatial dimension")
    if arr.dtype.kind not in "uif":
        raise ShapeMismatch(f"{name} has non-numeric dtype {arr.dtype}")
    if arr.min() < 0 or arr.max() > 255:
        raise ShapeMismatch(f"{name} values must lie in [0, 255]")
    return arr.astype(np.float64)


def check_image_batch(X, channels: int = 1) -> np.ndarray:
    """Validate a batch of preprocessed 64x64 images with values in [0, 1].

    Accepts (N, 64, 64) for single-channel input or (N, 64, 64, C); returns
    a float64 (N, 64, 64, C) array.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 3:
        arr = arr[:, :, :, None]
    if arr.ndim != 4:
        raise ShapeMismatch(f"image batch must be 3-D or 4-D, got shape {arr.shape}")
    if arr.shape[1] != FACE_SIZE or arr.shape[2] != FACE_SIZE:
        raise ShapeMismatch(
            f"images must be {FACE_SIZE}x{FACE_SIZE}, got {arr.shape[1]}x{arr.shape[2]}"
        )
    if arr.shape[3] != channels:
        raise ShapeMismatch(
            f"expected {channels} channel(s), got {arr.shape[3]}"
        )
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ShapeMismatch("image values must lie in [0, 1]")
    return arr


def check_probabilities(probs, n_classes: int = 4, tol: float = 1e-6) -> np.ndarray:
    """Validate a probability vector: correct length, in [0, 1], sums to 1."""
    arr = np.asarray(probs, dtype=np.float64)
    if arr.shape != (n_classes,):
        raise ShapeMismatch(f"expected {n_classes} probabilities, got shape {arr.shape}")
    if arr.min() < -tol or arr.max() > 1.0 + tol:
        raise ShapeMismatch("probabilities must lie in [0, 1]")
    if abs(arr.sum() - 1.0) > tol:
        raise ShapeMismatch(f"probabilities sum to {arr.sum():.8f}, expected 1")
    return arr

import numpy as np
import pytest

from classmon.labels import N_CLASSES
from classmon.matching import EnrollmentRegistry
from classmon.sessions import SessionEngine
from classmon.store import MonitoringStore
from classmon.validation import EMBEDDING_DIM


class StubClassifier:
    """Fast deterministic stand-in for the CNN.

    Maps each image's mean intensity onto one of the four classes so
    outputs are valid probability vectors without any convolution cost.
    """

    def predict_proba(self, X):
        X = np.asarray(X, dtype=np.float64)
        means = X.reshape(X.shape[0], -1).mean(axis=1)
        codes = (means * 1000).astype(int) % N_CLASSES
        probs = np.full((X.shape[0], N_CLASSES), 0.1 / (N_CLASSES - 1))
        probs[np.arange(X.shape[0]), codes] = 0.9
        return probs

    def predict(self, X):
        return self.predict_proba(X).argmax(axis=1)


def random_embedding(rng):
    return rng.normal(0.0, 0.12, size=EMBEDDING_DIM)


def random_crop(rng):
    return rng.integers(0, 256, size=(64, 64), dtype=np.int64)


def enroll(registry, n, store=None):
    """Enroll n students on orthogonal far-apart reference embeddings.

    Passing the store mirrors the enrollment there too, which the
    attendance tables require before any rows can reference a student.
    """
    refs = {}
    for i in range(n):
        emb = np.zeros(EMBEDDING_DIM)
        emb[i] = 2.0  # pairwise distance 2*sqrt(2), far above threshold
        sid = f"s{i:02d}"
        registry.enroll_student(sid, f"Student {i}", emb)
        if store is not None:
            store.add_student(sid, f"Student {i}", emb, 0)
        refs[sid] = emb
    return refs


@pytest.fixture
def store():
    s = MonitoringStore()
    yield s
    s.close()


@pytest.fixture
def registry():
    return EnrollmentRegistry()


@pytest.fixture
def engine(store, registry):
    return SessionEngine(store, registry, StubClassifier())

"""Deterministic classroom simulator: replaces cameras for desk-scale runs.

Generates an enrolled cohort with well-separated reference embeddings,
walks each student through a Markov chain over the four affect states, and
emits wire detections whose crops are rendered from a class-conditional
pattern. Identical scenarios and seeds produce bit-identical streams.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gateway import PROTOCOL_VERSION, encode_crop
from .labels import EMOTION_LABELS, N_CLASSES, label_for_code
from .matching import DEFAULT_THRESHOLD
from .validation import EMBEDDING_DIM, FACE_SIZE

# Blob placement for the synthetic crops. Centers sit inside the class
# quadrant but close to the corner: the wide blob then meets two image
# borders, which is what makes the classes easy for a small conv net to
# tell apart.
QUADRANT_CENTERS = {
    0: (8, 8),    # boredom: north-west
    1: (8, 56),   # confusion: north-east
    2: (56, 8),   # engagement: south-west
    3: (56, 56),  # frustration: south-east
}
BLOB_SIGMA = 16.0
BLOB_AMPLITUDE = 190.0
BASE_LEVEL = 30.0
PIXEL_NOISE_SIGMA = 10.0

DEFAULT_SELF_TRANSITION = 0.85


def default_transition_matrix() -> np.ndarray:
    """Self-transition 0.85, remaining mass uniform over the other classes."""
    off = (1.0 - DEFAULT_SELF_TRANSITION) / (N_CLASSES - 1)
    mat = np.full((N_CLASSES, N_CLASSES), off)
    np.fill_diagonal(mat, DEFAULT_SELF_TRANSITION)
    return mat


@dataclass
class SimScenario:
    seed: int = 0
    student_count: int = 10
    session_minutes: float = 5.0
    tick_ms: int = 2000
    embedding_noise_sigma: float = 0.05
    emotion_transition: np.ndarray = field(default_factory=default_transition_matrix)
    absent_students: tuple[str, ...] = ()
    intruder_count: int = 0
    match_threshold: float = DEFAULT_THRESHOLD
    course_label: str = "SIM-101"

    def __post_init__(self):
        self.emotion_transition = np.asarray(self.emotion_transition, dtype=np.float64)
        if self.emotion_transition.shape != (N_CLASSES, N_CLASSES):
            raise ValueError("emotion_transition must be 4x4")
        rows = self.emotion_transition.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > 1e-9) or np.any(self.emotion_transition < 0):
            raise ValueError("emotion_transition rows must be stochastic")
        if self.embedding_noise_sigma < 0:
            raise ValueError("embedding_noise_sigma must be nonnegative")
        if self.student_count < 1:
            raise ValueError("student_count must be at least 1")
        if self.tick_ms <= 0:
            raise ValueError("tick_ms must be positive")
        self.absent_students = tuple(self.absent_students)

    @property
    def tick_count(self) -> int:
        return int(round(self.session_minutes * 60_000 / self.tick_ms))

    @classmethod
    def from_file(cls, path) -> "SimScenario":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if "emotion_transition" in raw:
            raw["emotion_transition"] = np.asarray(raw["emotion_transition"])
        if "absent_students" in raw:
            raw["absent_students"] = tuple(raw["absent_students"])
        return cls(**raw)

    def to_file(self, path) -> None:
        data = {
            "seed": self.seed,
            "student_count": self.student_count,
            "session_minutes": self.session_minutes,
            "tick_ms": self.tick_ms,
            "embedding_noise_sigma": self.embedding_noise_sigma,
            "emotion_transition": self.emotion_transition.tolist(),
            "absent_students": list(self.absent_students),
            "intruder_count": self.intruder_count,
            "match_threshold": self.match_threshold,
            "course_label": self.course_label,
        }
        Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


@dataclass
class SimStudent:
    student_id: str
    display_name: str
    embedding: np.ndarray


@dataclass
class TickRecord:
    tick: int
    captured_at: int
    subject_id: str
    true_emotion: str | None
    emitted: bool


@dataclass
class GroundTruthLog:
    records: list[TickRecord] = field(default_factory=list)

    def emitted_count(self) -> int:
        return sum(1 for r in self.records if r.emitted)

    def emitted_for(self, subject_id: str) -> list[TickRecord]:
        return [r for r in self.records if r.subject_id == subject_id and r.emitted]


def student_id_for_index(i: int) -> str:
    return f"s{i + 1:03d}"


def generate_students(scenario: SimScenario, rng=None) -> list[SimStudent]:
    """Reference embeddings with all pairwise distances above twice the
    match threshold, found by rejection sampling. Deterministic by seed."""
    if rng is None:
        rng = np.random.default_rng((scenario.seed, 0))
    min_dist = 2.0 * scenario.match_threshold
    students: list[SimStudent] = []
    chosen: list[np.ndarray] = []
    for i in range(scenario.student_count):
        while True:
            candidate = rng.normal(0.0, 0.12, size=EMBEDDING_DIM)
            if all(np.linalg.norm(candidate - e) > min_dist for e in chosen):
                break
        chosen.append(candidate)
        sid = student_id_for_index(i)
        students.append(SimStudent(sid, f"Student {i + 1}", candidate))
    return students


def render_emotion_crop(emotion, seed=None, rng=None) -> np.ndarray:
    """64x64 grayscale crop for one affect class.

    A bright Gaussian blob sits in the class quadrant (NW/NE/SW/SE for
    boredom/confusion/engagement/frustration) over a dark background, plus
    seeded pixel noise of 10 grey levels.
    """
    if isinstance(emotion, str):
        code = EMOTION_LABELS.index(emotion)
    else:
        code = int(emotion)
        label_for_code(code)
    if rng is None:
        rng = np.random.default_rng(seed)
    r0, c0 = QUADRANT_CENTERS[code]
    rr, cc = np.mgrid[0:FACE_SIZE, 0:FACE_SIZE]
    blob = BLOB_AMPLITUDE * np.exp(
        -(((rr - r0) ** 2 + (cc - c0) ** 2) / (2.0 * BLOB_SIGMA**2))
    )
    img = BASE_LEVEL + blob + rng.normal(0.0, PIXEL_NOISE_SIGMA, size=(FACE_SIZE, FACE_SIZE))
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def _bounded_noise(rng, sigma: float, threshold: float) -> np.ndarray:
    """Per-component Gaussian noise, redrawn until its norm stays inside the
    match acceptance radius so a noisy probe still resolves to its owner.

    With sigma well below threshold/sqrt(128) most draws pass immediately;
    at larger sigmas the redraw cap keeps this terminating, at the cost of
    occasionally emitting a probe that will not match.
    """
    if sigma == 0.0:
        return np.zeros(EMBEDDING_DIM)
    limit = 0.95 * threshold
    noise = rng.normal(0.0, sigma, size=EMBEDDING_DIM)
    for _ in range(100):
        if np.linalg.norm(noise) < limit:
            break
        noise = rng.normal(0.0, sigma, size=EMBEDDING_DIM)
    return noise


def run_scenario(
    scenario: SimScenario,
    submit,
    session_id: str,
    start_time_ms: int = 0,
    students: list[SimStudent] | None = None,
    max_batch: int = 32,
) -> GroundTruthLog:
    """Drive a full scenario through a gateway submit callable.

    `submit` receives lists of wire-detection dicts (chunked to max_batch)
    and is expected to behave like IngestionGateway.submit_detections. The
    returned log records, per tick, every student's true emotion and
    whether a detection was emitted, plus one record per intruder emission.
    """
    # Separate streams for cohort generation and the tick loop, so the
    # emitted stream is identical whether or not callers generated the
    # cohort themselves.
    rng = np.random.default_rng((scenario.seed, 1))
    if students is None:
        students = generate_students(scenario)

    intruders = []
    for k in range(scenario.intruder_count):
        while True:
            candidate = rng.normal(0.0, 0.12, size=EMBEDDING_DIM)
            if all(
                np.linalg.norm(candidate - s.embedding) > 2.0 * scenario.match_threshold
                for s in students
            ):
                break
        intruders.append((f"intruder-{k + 1}", candidate))

    emotion_state = {
        s.student_id: int(rng.integers(0, N_CLASSES)) for s in students
    }
    absent = set(scenario.absent_students)
    log = GroundTruthLog()
    cumulative = np.cumsum(scenario.emotion_transition, axis=1)

    for tick in range(scenario.tick_count):
        captured_at = start_time_ms + tick * scenario.tick_ms
        batch = []
        for s in students:
            state = emotion_state[s.student_id]
            if tick > 0:
                draw = rng.random()
                state = int(np.searchsorted(cumulative[state], draw, side="right"))
                state = min(state, N_CLASSES - 1)
                emotion_state[s.student_id] = state
            present = s.student_id not in absent
            log.records.append(
                TickRecord(
                    tick=tick,
                    captured_at=captured_at,
                    subject_id=s.student_id,
                    true_emotion=EMOTION_LABELS[state],
                    emitted=present,
                )
            )
            if not present:
                continue
            noise = _bounded_noise(rng, scenario.embedding_noise_sigma, scenario.match_threshold)
            crop = render_emotion_crop(state, rng=rng)
            batch.append(
                {
                    "protocol_version": PROTOCOL_VERSION,
                    "session_id": session_id,
                    "source_id": "simulator",
                    "captured_at": captured_at,
                    "embedding": (s.embedding + noise).tolist(),
                    "face_crop": encode_crop(crop),
                }
            )
        for intruder_id, embedding in intruders:
            noise = _bounded_noise(rng, scenario.embedding_noise_sigma, scenario.match_threshold)
            crop = render_emotion_crop(int(rng.integers(0, N_CLASSES)), rng=rng)
            log.records.append(
                TickRecord(
                    tick=tick,
                    captured_at=captured_at,
                    subject_id=intruder_id,
                    true_emotion=None,
                    emitted=True,
                )
            )
            batch.append(
                {
                    "protocol_version": PROTOCOL_VERSION,
                    "session_id": session_id,
                    "source_id": "simulator",
                    "captured_at": captured_at,
                    "embedding": (embedding + noise).tolist(),
                    "face_crop": encode_crop(crop),
                }
            )
        for start in range(0, len(batch), max_batch):
            submit(batch[start : start + max_batch])
    return log


def make_training_set(n_per_class: int, seed: int = 0):
    """Labeled synthetic crops, n per class, preprocessed to [0, 1]."""
    rng = np.random.default_rng(seed)
    images, codes = [], []
    for code in range(N_CLASSES):
        for _ in range(n_per_class):
            images.append(render_emotion_crop(code, rng=rng) / 255.0)
            codes.append(code)
    X = np.asarray(images, dtype=np.float64)[:, :, :, None]
    y = np.asarray(codes, dtype=np.int64)
    perm = rng.permutation(len(y))
    return X[perm], y[perm]

"""Identity matching: enroll reference embeddings, resolve probes by distance.

A probe embedding matches the enrolled student whose reference embedding is
nearest in Euclidean distance, provided that distance is strictly below the
configured threshold. Exact-distance ties resolve to the lexicographically
smallest student id so results are reproducible.
"""

import threading
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from .errors import DuplicateStudentId, InvalidEmbedding, UnknownStudent
from .utils import now_ms
from .validation import EMBEDDING_DIM, check_embedding

DEFAULT_THRESHOLD = 0.6


@dataclass
class MatcherConfig:
    """Acceptance threshold for identity matches; must be positive."""

    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if not 0 < self.threshold:
            raise ValueError("threshold must be positive")


@dataclass
class StudentProfile:
    student_id: str
    display_name: str
    reference_embedding: np.ndarray
    enrolled_at: int


@dataclass
class MatchResult:
    matched: bool
    student_id: str | None
    distance: float
    confidence: float
    extra: dict = field(default_factory=dict, repr=False)


def euclidean_distance(a, b) -> float:
    """L2 distance between two validated 128-d embeddings."""
    va = check_embedding(a, "first embedding")
    vb = check_embedding(b, "second embedding")
    return float(np.linalg.norm(va - vb))


def match_confidence(distance: float) -> float:
    """Map a match distance onto a [0, 1] display confidence.

    clamp(1 - distance, 0, 1) rounded half-up to two decimals, so a probe
    at distance 0.09 reads as 0.91.
    """
    raw = min(max(1.0 - distance, 0.0), 1.0)
    return float(Decimal(repr(raw)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


class EnrollmentRegistry:
    """In-memory registry of enrolled students and their reference embeddings.

    Reads (matching, lookups) may run concurrently; enrollment is serialized
    through an internal lock. Matching against the registry is a pure read.
    """

    def __init__(self, config: MatcherConfig | None = None):
        self.config = config or MatcherConfig()
        self._lock = threading.Lock()
        self._profiles: dict[str, StudentProfile] = {}
        # Dense matrix mirror of the reference embeddings, rebuilt on
        # enrollment, so matching is a single vectorized distance computation.
        self._ids: tuple[str, ...] = ()
        self._matrix = np.empty((0, EMBEDDING_DIM))

    def __len__(self) -> int:
        return len(self._profiles)

    def enroll_student(
        self,
        student_id: str,
        display_name: str,
        reference_embedding,
        enrolled_at: int | None = None,
    ) -> StudentProfile:
        if not student_id:
            raise InvalidEmbedding("student_id must be non-empty")
        embedding = check_embedding(reference_embedding, "reference_embedding")
        with self._lock:
            if student_id in self._profiles:
                raise DuplicateStudentId(f"student {student_id!r} already enrolled")
            profile = StudentProfile(
                student_id=student_id,
                display_name=display_name,
                reference_embedding=embedding,
                enrolled_at=now_ms() if enrolled_at is None else int(enrolled_at),
            )
            self._profiles[student_id] = profile
            ordered = sorted(self._profiles)
            self._ids = tuple(ordered)
            self._matrix = np.stack(
                [self._profiles[sid].reference_embedding for sid in ordered]
            )
        return profile

    def get(self, student_id: str) -> StudentProfile:
        try:
            return self._profiles[student_id]
        except KeyError:
            raise UnknownStudent(f"student {student_id!r} is not enrolled") from None

    def __contains__(self, student_id: str) -> bool:
        return student_id in self._profiles

    def profiles(self) -> list[StudentProfile]:
        return [self._profiles[sid] for sid in self._ids]

    def match_embedding(self, probe, config: MatcherConfig | None = None) -> MatchResult:
        """Resolve a probe embedding to the nearest enrolled student.

        Matches only when the minimum distance is strictly below the
        threshold; an empty registry never matches.
        """
        cfg = config or self.config
        vec = check_embedding(probe, "probe")
        ids, matrix = self._ids, self._matrix
        if not ids:
            return MatchResult(matched=False, student_id=None, distance=float("inf"), confidence=0.0)
        dists = np.linalg.norm(matrix - vec, axis=1)
        min_dist = float(dists.min())
        # Lexicographically smallest id among exact-minimum ties; ids are
        # already sorted, so the first index at the minimum wins.
        best = ids[int(np.flatnonzero(dists == min_dist)[0])]
        if min_dist < cfg.threshold:
            return MatchResult(
                matched=True,
                student_id=best,
                distance=min_dist,
                confidence=match_confidence(min_dist),
            )
        return MatchResult(matched=False, student_id=None, distance=min_dist, confidence=0.0)


def save_enrollment_file(registry: EnrollmentRegistry, path) -> None:
    """Write one comma-separated line per student: id, name, 128 numbers."""
    lines = []
    for profile in registry.profiles():
        values = ",".join(repr(float(v)) for v in profile.reference_embedding)
        lines.append(f"{profile.student_id},{profile.display_name},{values}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_enrollment_file(registry: EnrollmentRegistry, path) -> int:
    """Enroll every record from an enrollment file; returns the count added."""
    count = 0
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2 + EMBEDDING_DIM:
            raise InvalidEmbedding(
                f"{path}:{lineno}: expected {2 + EMBEDDING_DIM} fields, got {len(parts)}"
            )
        student_id, display_name = parts[0], parts[1]
        registry.enroll_student(student_id, display_name, [float(v) for v in parts[2:]])
        count += 1
    return count

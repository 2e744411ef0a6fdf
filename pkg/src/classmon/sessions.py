"""Session lifecycle and the one-time-per-session attendance state machine.

Each active session tracks a per-student presence flag. The first matched
detection of a student marks attendance and logs an emotion; later matched
detections skip attendance and log emotions only; unmatched detections
increment a diagnostics counter and write nothing.
"""

import threading
from dataclasses import dataclass, field

import numpy as np

from .classifier import argmax_emotion, preprocess_face
from .errors import SessionNotActive, UnknownSession
from .labels import label_for_code
from .matching import EnrollmentRegistry, MatchResult
from .store import AttendanceRecord, EmotionObservation, MonitoringStore, Session
from .utils import new_id, now_ms
from .validation import check_crop, check_embedding

ATTENDANCE_MARKED = "attendance_marked"
ATTENDANCE_SKIPPED = "attendance_skipped_emotion_logged"
UNMATCHED_IGNORED = "unmatched_ignored"
REJECTED = "rejected"


@dataclass
class DetectionEvent:
    session_id: str
    captured_at: int
    embedding: np.ndarray
    face_crop: np.ndarray
    source_id: str = "unknown"


@dataclass
class ProcessOutcome:
    kind: str
    match: MatchResult | None = None
    emotion: tuple[str, float] | None = None
    reason: str | None = None


@dataclass
class SessionState:
    attendance_flags: dict[str, int] = field(default_factory=dict)
    unmatched_count: int = 0


@dataclass
class PresenceEntry:
    student_id: str
    display_name: str
    timestamp: int
    confidence: float


@dataclass
class SessionSnapshot:
    session: Session
    present: list[PresenceEntry]
    unmatched_count: int


class SessionEngine:
    """Routes detections through match -> attendance -> emotion logging.

    One engine instance owns one classroom. All state mutation is serialized
    through a single lock, so events are applied in arrival order and
    snapshots observe a consistent point-in-time state.
    """

    def __init__(
        self,
        store: MonitoringStore,
        registry: EnrollmentRegistry,
        classifier,
    ):
        self.store = store
        self.registry = registry
        self.classifier = classifier
        self._lock = threading.RLock()
        self._states: dict[str, SessionState] = {}

    # -- lifecycle --------------------------------------------------------

    def start_session(self, course_label: str, start_time: int | None = None) -> Session:
        started_at = now_ms() if start_time is None else int(start_time)
        with self._lock:
            session = self.store.create_session(new_id("session"), course_label, started_at)
            self._states[session.session_id] = SessionState(
                attendance_flags={p.student_id: 0 for p in self.registry.profiles()}
            )
        return session

    def end_session(self, session_id: str, end_time: int | None = None) -> Session:
        ended_at = now_ms() if end_time is None else int(end_time)
        with self._lock:
            return self.store.end_session(session_id, ended_at)

    def session_state(self, session_id: str) -> SessionState:
        with self._lock:
            state = self._states.get(session_id)
            if state is None:
                # Session may predate this engine instance (e.g. imported).
                self.store.get_session(session_id)
                state = SessionState()
                self._states[session_id] = state
            return state

    # -- event processing -------------------------------------------------

    def process_detection(self, event: DetectionEvent) -> ProcessOutcome:
        embedding = check_embedding(event.embedding)
        with self._lock:
            session = self.store.get_session(event.session_id)
            if session.status != "active":
                return ProcessOutcome(kind=REJECTED, reason="SessionNotActive")
            state = self.session_state(event.session_id)

            match = self.registry.match_embedding(embedding)
            if not match.matched:
                state.unmatched_count += 1
                self.store.increment_unmatched(event.session_id)
                return ProcessOutcome(kind=UNMATCHED_IGNORED, match=match)

            student_id = match.student_id
            first_sighting = not state.attendance_flags.get(student_id, 0)
            if first_sighting:
                state.attendance_flags[student_id] = 1
                self.store.insert_attendance(
                    AttendanceRecord(
                        student_id=student_id,
                        session_id=event.session_id,
                        timestamp=int(event.captured_at),
                        confidence=match.confidence,
                    )
                )
            emotion = self._classify_and_log(event, student_id)
            kind = ATTENDANCE_MARKED if first_sighting else ATTENDANCE_SKIPPED
            return ProcessOutcome(kind=kind, match=match, emotion=emotion)

    def _classify_and_log(self, event: DetectionEvent, student_id: str) -> tuple[str, float]:
        crop = check_crop(event.face_crop)
        image = preprocess_face(crop)
        probs = np.asarray(self.classifier.predict_proba(image[None, :, :, :]))[0]
        code = argmax_emotion(probs)
        label = label_for_code(code)
        confidence = float(probs[code])
        self.store.insert_emotion(
            EmotionObservation(
                student_id=student_id,
                session_id=event.session_id,
                emotion=label,
                confidence=confidence,
                timestamp=int(event.captured_at),
            )
        )
        return label, confidence

    # -- reads ------------------------------------------------------------

    def session_snapshot(self, session_id: str) -> SessionSnapshot:
        """Present students ordered by attendance time, plus diagnostics."""
        with self._lock:
            session = self.store.get_session(session_id)
            state = self._states.get(session_id)
            unmatched = state.unmatched_count if state else session.unmatched_count
            present = []
            for rec in self.store.query_attendance(session_id):
                name = rec.student_id
                if rec.student_id in self.registry:
                    name = self.registry.get(rec.student_id).display_name
                present.append(
                    PresenceEntry(
                        student_id=rec.student_id,
                        display_name=name,
                        timestamp=rec.timestamp,
                        confidence=rec.confidence,
                    )
                )
            return SessionSnapshot(session=session, present=present, unmatched_count=unmatched)

    def require_active(self, session_id: str) -> Session:
        session = self.store.get_session(session_id)
        if session.status != "active":
            raise SessionNotActive(f"session {session_id!r} is not active")
        return session

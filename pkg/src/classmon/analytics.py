"""Read-side aggregation feeding the dashboard views.

All operations are pure reads over committed rows: distribution of emotion
counts, bucketed time series, per-student drill-down, and a session
summary. Repeated identical queries over frozen data return identical
results.
"""

from dataclasses import dataclass, field

from .errors import InvalidBucketWidth
from .labels import EMOTION_LABELS
from .store import AttendanceRecord, EmotionObservation, MonitoringStore, Session

DEFAULT_BUCKET_MS = 60_000


@dataclass
class EmotionDistribution:
    session_id: str
    counts: dict[str, int]
    fractions: dict[str, float]
    total: int
    as_of: int


@dataclass
class TimeBucket:
    bucket_start: int
    counts: dict[str, int]


@dataclass
class EngagementTimeSeries:
    session_id: str
    bucket_width_ms: int
    buckets: list[TimeBucket] = field(default_factory=list)


@dataclass
class StudentProfileView:
    session_id: str
    student_id: str
    display_name: str
    attendance: AttendanceRecord | None
    history: list[EmotionObservation]


@dataclass
class SessionSummary:
    session: Session
    present_count: int
    absent_count: int
    dominant_emotion: str | None
    unmatched_count: int


def _zero_counts() -> dict[str, int]:
    return {label: 0 for label in EMOTION_LABELS}


class Analytics:
    """Aggregations over a monitoring store."""

    def __init__(self, store: MonitoringStore):
        self.store = store

    def emotion_distribution(self, session_id, t0=None, t1=None, as_of=None) -> EmotionDistribution:
        self.store.get_session(session_id)
        counts = _zero_counts()
        rows = self.store.query_emotions(session_id, t0=t0, t1=t1)
        for row in rows:
            counts[row.emotion] += 1
        total = len(rows)
        if total:
            fractions = {label: counts[label] / total for label in EMOTION_LABELS}
        else:
            fractions = {label: 0.0 for label in EMOTION_LABELS}
        return EmotionDistribution(
            session_id=session_id,
            counts=counts,
            fractions=fractions,
            total=total,
            as_of=as_of if as_of is not None else (rows[-1].timestamp if rows else 0),
        )

    def engagement_timeseries(self, session_id, bucket_width_ms=DEFAULT_BUCKET_MS) -> EngagementTimeSeries:
        """Counts per class in contiguous half-open buckets aligned to
        multiples of the bucket width; empty interior buckets are kept."""
        if bucket_width_ms <= 0:
            raise InvalidBucketWidth(f"bucket width must be positive, got {bucket_width_ms}")
        self.store.get_session(session_id)
        rows = self.store.query_emotions(session_id)
        series = EngagementTimeSeries(session_id=session_id, bucket_width_ms=int(bucket_width_ms))
        if not rows:
            return series
        width = int(bucket_width_ms)
        first = (rows[0].timestamp // width) * width
        last = (rows[-1].timestamp // width) * width
        by_start: dict[int, dict[str, int]] = {}
        for row in rows:
            start = (row.timestamp // width) * width
            by_start.setdefault(start, _zero_counts())[row.emotion] += 1
        for start in range(first, last + width, width):
            series.buckets.append(
                TimeBucket(bucket_start=start, counts=by_start.get(start, _zero_counts()))
            )
        return series

    def student_profile(self, session_id, student_id) -> StudentProfileView:
        self.store.get_session(session_id)
        student = self.store.get_student(student_id)
        attendance = self.store.query_attendance(session_id, student_id=student_id)
        history = self.store.query_emotions(session_id, student_id=student_id)
        return StudentProfileView(
            session_id=session_id,
            student_id=student_id,
            display_name=student.display_name,
            attendance=attendance[0] if attendance else None,
            history=history,
        )

    def session_summary(self, session_id) -> SessionSummary:
        session = self.store.get_session(session_id)
        present = len(self.store.query_attendance(session_id))
        enrolled = len(self.store.list_students())
        dist = self.emotion_distribution(session_id)
        dominant = None
        if dist.total:
            # Highest count wins; ties resolve to the lowest class code.
            dominant = max(EMOTION_LABELS, key=lambda lb: (dist.counts[lb], -EMOTION_LABELS.index(lb)))
        return SessionSummary(
            session=session,
            present_count=present,
            absent_count=max(enrolled - present, 0),
            dominant_emotion=dominant,
            unmatched_count=session.unmatched_count,
        )

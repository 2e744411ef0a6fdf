import numpy as np
import pytest

from classmon.errors import (
    AlreadyEnded,
    DuplicateStudentId,
    ForeignKeyViolation,
    InvalidLabel,
    UnknownSession,
    UnknownStudent,
)
from classmon.store import AttendanceRecord, EmotionObservation, MonitoringStore
from classmon.validation import EMBEDDING_DIM


def seed_store(store, n_students=3):
    for i in range(n_students):
        emb = np.zeros(EMBEDDING_DIM)
        emb[i] = 1.0
        store.add_student(f"s{i}", f"Student {i}", emb, enrolled_at=1000 + i)
    return store.create_session("ses1", "algebra", started_at=5000)


def test_student_roundtrip(store):
    emb = np.linspace(0, 1, EMBEDDING_DIM)
    store.add_student("s1", "Ada", emb, enrolled_at=42)
    row = store.get_student("s1")
    assert row.display_name == "Ada"
    assert row.enrolled_at == 42
    np.testing.assert_allclose(row.embedding, emb)
    with pytest.raises(DuplicateStudentId):
        store.add_student("s1", "Ada", emb, enrolled_at=43)
    with pytest.raises(UnknownStudent):
        store.get_student("ghost")


def test_session_lifecycle(store):
    session = store.create_session("ses1", "algebra", started_at=100)
    assert session.status == "active"
    assert session.ended_at is None
    ended = store.end_session("ses1", ended_at=900)
    assert ended.status == "ended"
    assert ended.ended_at == 900
    with pytest.raises(AlreadyEnded):
        store.end_session("ses1", ended_at=901)
    with pytest.raises(UnknownSession):
        store.end_session("nope", ended_at=1)
    with pytest.raises(UnknownSession):
        store.get_session("nope")


def test_end_never_precedes_start(store):
    store.create_session("ses1", "x", started_at=500)
    ended = store.end_session("ses1", ended_at=100)
    assert ended.ended_at >= ended.started_at


def test_attendance_unique_constraint(store):
    seed_store(store)
    first = store.insert_attendance(AttendanceRecord("s0", "ses1", 6000, 0.91))
    assert first == "inserted"
    again = store.insert_attendance(AttendanceRecord("s0", "ses1", 7000, 0.5))
    assert again == "duplicate_rejected"
    rows = store.query_attendance("ses1")
    assert len(rows) == 1
    # The original row survives untouched.
    assert rows[0].timestamp == 6000
    assert rows[0].confidence == 0.91


def test_attendance_foreign_keys(store):
    seed_store(store)
    with pytest.raises(ForeignKeyViolation):
        store.insert_attendance(AttendanceRecord("ghost", "ses1", 6000, 0.9))
    with pytest.raises(ForeignKeyViolation):
        store.insert_attendance(AttendanceRecord("s0", "no-session", 6000, 0.9))


def test_emotions_allow_multiple_rows(store):
    seed_store(store)
    for k in range(5):
        store.insert_emotion(
            EmotionObservation("s0", "ses1", "engagement", 0.8, 6000 + k)
        )
    assert len(store.query_emotions("ses1")) == 5


def test_emotion_label_validation(store):
    seed_store(store)
    with pytest.raises(InvalidLabel):
        store.insert_emotion(EmotionObservation("s0", "ses1", "joy", 0.9, 6000))
    with pytest.raises(ForeignKeyViolation):
        store.insert_emotion(EmotionObservation("ghost", "ses1", "boredom", 0.9, 6000))


def test_query_ordering_and_half_open_range(store):
    seed_store(store)
    times = [6400, 6100, 6100, 6900]
    students = ["s2", "s1", "s0", "s0"]
    for sid, t in zip(students, times):
        store.insert_emotion(EmotionObservation(sid, "ses1", "boredom", 0.5, t))
    rows = store.query_emotions("ses1")
    assert [(r.timestamp, r.student_id) for r in rows] == [
        (6100, "s0"),
        (6100, "s1"),
        (6400, "s2"),
        (6900, "s0"),
    ]
    # Half-open [t0, t1): the upper bound is excluded.
    window = store.query_emotions("ses1", t0=6100, t1=6400)
    assert [(r.timestamp, r.student_id) for r in window] == [(6100, "s0"), (6100, "s1")]
    assert store.query_emotions("ses1", t0=6100, t1=6100) == []


def test_query_student_filter_matches_linear_scan(store):
    seed_store(store)
    rng = np.random.default_rng(31)
    inserted = []
    for k in range(100):
        sid = f"s{rng.integers(0, 3)}"
        t = int(rng.integers(6000, 7000))
        store.insert_emotion(EmotionObservation(sid, "ses1", "confusion", 0.5, t))
        inserted.append((sid, t))
    for target in ("s0", "s1", "s2"):
        got = store.query_emotions("ses1", student_id=target)
        assert len(got) == sum(1 for sid, _ in inserted if sid == target)
        assert all(r.student_id == target for r in got)


def test_unmatched_counter(store):
    seed_store(store)
    for _ in range(3):
        store.increment_unmatched("ses1")
    assert store.get_session("ses1").unmatched_count == 3
    with pytest.raises(UnknownSession):
        store.increment_unmatched("nope")


def test_counts(store):
    seed_store(store)
    store.insert_attendance(AttendanceRecord("s0", "ses1", 6000, 0.9))
    store.insert_emotion(EmotionObservation("s0", "ses1", "boredom", 0.9, 6000))
    assert store.counts() == {
        "students": 3,
        "sessions": 1,
        "attendance": 1,
        "emotions": 1,
    }


def test_durability_roundtrip(tmp_path):
    path = str(tmp_path / "monitor.db")
    store = MonitoringStore(path)
    seed_store(store)
    store.insert_attendance(AttendanceRecord("s1", "ses1", 6000, 0.75))
    store.insert_emotion(EmotionObservation("s1", "ses1", "frustration", 0.6, 6001))
    before = store.export_text()
    store.close()

    reopened = MonitoringStore(path)
    assert reopened.export_text() == before
    assert reopened.get_session("ses1").course_label == "algebra"
    reopened.close()


def test_export_import_roundtrip(store):
    seed_store(store)
    store.insert_attendance(AttendanceRecord("s0", "ses1", 6000, 0.91))
    store.insert_emotion(EmotionObservation("s0", "ses1", "engagement", 0.88, 6000))
    store.increment_unmatched("ses1")
    store.increment_unmatched("ses1")
    store.end_session("ses1", ended_at=9000)
    text = store.export_text()

    other = MonitoringStore()
    counts = other.import_text(text)
    assert counts["student"] == 3
    assert counts["session"] == 1
    assert counts["attendance"] == 1
    assert counts["emotion"] == 1
    # Re-export is byte-identical, the golden-file property.
    assert other.export_text() == text
    other.close()


def test_import_rejects_unknown_kind(store):
    with pytest.raises(ValueError):
        store.import_text("mystery\tx\ty\n")

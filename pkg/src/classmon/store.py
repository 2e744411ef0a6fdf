"""Durable storage for students, sessions, attendance and emotion rows.

Backed by embedded SQLite behind a small storage contract. The attendance
table carries a (student_id, session_id) primary key, so marking the same
student twice in one session is a soft `duplicate_rejected` outcome rather
than an error. All statements run under one lock on a single connection,
which makes row inserts linearizable.
"""

import sqlite3
import threading
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlreadyEnded,
    DuplicateStudentId,
    ForeignKeyViolation,
    InvalidLabel,
    UnknownSession,
    UnknownStudent,
)
from .labels import EMOTION_LABELS
from .validation import check_embedding

_SCHEMA = """
CREATE TABLE IF NOT EXISTS students (
    student_id   TEXT PRIMARY KEY,
    display_name TEXT NOT NULL,
    embedding    TEXT NOT NULL,
    enrolled_at  INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
    session_id      TEXT PRIMARY KEY,
    course_label    TEXT NOT NULL,
    started_at      INTEGER NOT NULL,
    ended_at        INTEGER,
    status          TEXT NOT NULL CHECK (status IN ('active', 'ended')),
    unmatched_count INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS attendance (
    student_id TEXT NOT NULL REFERENCES students(student_id),
    session_id TEXT NOT NULL REFERENCES sessions(session_id),
    timestamp  INTEGER NOT NULL,
    confidence REAL NOT NULL,
    PRIMARY KEY (student_id, session_id)
);
CREATE TABLE IF NOT EXISTS emotions (
    id         INTEGER PRIMARY KEY AUTOINCREMENT,
    student_id TEXT NOT NULL REFERENCES students(student_id),
    session_id TEXT NOT NULL REFERENCES sessions(session_id),
    emotion    TEXT NOT NULL,
    confidence REAL NOT NULL,
    timestamp  INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_attendance_session ON attendance(session_id, timestamp);
CREATE INDEX IF NOT EXISTS idx_emotions_session ON emotions(session_id, timestamp);
"""


@dataclass
class Session:
    session_id: str
    course_label: str
    started_at: int
    ended_at: int | None
    status: str
    unmatched_count: int = 0


@dataclass
class AttendanceRecord:
    student_id: str
    session_id: str
    timestamp: int
    confidence: float


@dataclass
class EmotionObservation:
    student_id: str
    session_id: str
    emotion: str
    confidence: float
    timestamp: int


@dataclass
class StudentRow:
    student_id: str
    display_name: str
    embedding: np.ndarray
    enrolled_at: int


def _time_clause(t0, t1):
    clauses, args = [], []
    if t0 is not None:
        clauses.append("timestamp >= ?")
        args.append(int(t0))
    if t1 is not None:
        clauses.append("timestamp < ?")
        args.append(int(t1))
    return clauses, args


class MonitoringStore:
    """SQLite-backed store implementing the monitoring schema."""

    def __init__(self, path: str = ":memory:"):
        self.path = str(path)
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.execute("PRAGMA foreign_keys = ON")
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- students ---------------------------------------------------------

    def add_student(self, student_id, display_name, embedding, enrolled_at) -> None:
        vec = check_embedding(embedding)
        text = ",".join(repr(float(v)) for v in vec)
        with self._lock:
            try:
                with self._conn:
                    self._conn.execute(
                        "INSERT INTO students VALUES (?, ?, ?, ?)",
                        (student_id, display_name, text, int(enrolled_at)),
                    )
            except sqlite3.IntegrityError:
                raise DuplicateStudentId(f"student {student_id!r} already stored") from None

    def get_student(self, student_id) -> StudentRow:
        with self._lock:
            row = self._conn.execute(
                "SELECT student_id, display_name, embedding, enrolled_at "
                "FROM students WHERE student_id = ?",
                (student_id,),
            ).fetchone()
        if row is None:
            raise UnknownStudent(f"student {student_id!r} is not stored")
        return StudentRow(row[0], row[1], np.array([float(v) for v in row[2].split(",")]), row[3])

    def list_students(self) -> list[StudentRow]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT student_id, display_name, embedding, enrolled_at "
                "FROM students ORDER BY student_id"
            ).fetchall()
        return [
            StudentRow(r[0], r[1], np.array([float(v) for v in r[2].split(",")]), r[3])
            for r in rows
        ]

    # -- sessions ---------------------------------------------------------

    def create_session(self, session_id, course_label, started_at) -> Session:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO sessions (session_id, course_label, started_at, status) "
                "VALUES (?, ?, ?, 'active')",
                (session_id, course_label, int(started_at)),
            )
        return Session(session_id, course_label, int(started_at), None, "active")

    def get_session(self, session_id) -> Session:
        with self._lock:
            row = self._conn.execute(
                "SELECT session_id, course_label, started_at, ended_at, status, "
                "unmatched_count FROM sessions WHERE session_id = ?",
                (session_id,),
            ).fetchone()
        if row is None:
            raise UnknownSession(f"session {session_id!r} does not exist")
        return Session(*row)

    def list_sessions(self) -> list[Session]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT session_id, course_label, started_at, ended_at, status, "
                "unmatched_count FROM sessions ORDER BY started_at, session_id"
            ).fetchall()
        return [Session(*row) for row in rows]

    def end_session(self, session_id, ended_at) -> Session:
        with self._lock:
            current = self.get_session(session_id)
            if current.status == "ended":
                raise AlreadyEnded(f"session {session_id!r} already ended")
            with self._conn:
                self._conn.execute(
                    "UPDATE sessions SET status = 'ended', ended_at = ? WHERE session_id = ?",
                    (max(int(ended_at), current.started_at), session_id),
                )
        return self.get_session(session_id)

    def increment_unmatched(self, session_id) -> None:
        with self._lock, self._conn:
            cur = self._conn.execute(
                "UPDATE sessions SET unmatched_count = unmatched_count + 1 "
                "WHERE session_id = ?",
                (session_id,),
            )
            if cur.rowcount == 0:
                raise UnknownSession(f"session {session_id!r} does not exist")

    # -- attendance and emotions -----------------------------------------

    def insert_attendance(self, record: AttendanceRecord) -> str:
        """Insert one attendance row; returns 'inserted' or 'duplicate_rejected'.

        A duplicate (student_id, session_id) pair leaves the original row,
        including its timestamp, untouched.
        """
        with self._lock:
            try:
                with self._conn:
                    cur = self._conn.execute(
                        "INSERT INTO attendance VALUES (?, ?, ?, ?) "
                        "ON CONFLICT(student_id, session_id) DO NOTHING",
                        (
                            record.student_id,
                            record.session_id,
                            int(record.timestamp),
                            float(record.confidence),
                        ),
                    )
            except sqlite3.IntegrityError as exc:
                raise ForeignKeyViolation(str(exc)) from None
        return "inserted" if cur.rowcount else "duplicate_rejected"

    def insert_emotion(self, obs: EmotionObservation) -> str:
        if obs.emotion not in EMOTION_LABELS:
            raise InvalidLabel(f"unknown emotion label: {obs.emotion!r}")
        with self._lock:
            try:
                with self._conn:
                    self._conn.execute(
                        "INSERT INTO emotions (student_id, session_id, emotion, confidence, "
                        "timestamp) VALUES (?, ?, ?, ?, ?)",
                        (
                            obs.student_id,
                            obs.session_id,
                            obs.emotion,
                            float(obs.confidence),
                            int(obs.timestamp),
                        ),
                    )
            except sqlite3.IntegrityError as exc:
                raise ForeignKeyViolation(str(exc)) from None
        return "inserted"

    def query_attendance(self, session_id, student_id=None, t0=None, t1=None):
        """Attendance rows ordered by (timestamp, student_id); [t0, t1) range."""
        clauses, args = ["session_id = ?"], [session_id]
        if student_id is not None:
            clauses.append("student_id = ?")
            args.append(student_id)
        tc, ta = _time_clause(t0, t1)
        with self._lock:
            rows = self._conn.execute(
                "SELECT student_id, session_id, timestamp, confidence FROM attendance "
                f"WHERE {' AND '.join(clauses + tc)} ORDER BY timestamp, student_id",
                args + ta,
            ).fetchall()
        return [AttendanceRecord(*row) for row in rows]

    def query_emotions(self, session_id, student_id=None, t0=None, t1=None):
        """Emotion rows ordered by (timestamp, student_id); [t0, t1) range."""
        clauses, args = ["session_id = ?"], [session_id]
        if student_id is not None:
            clauses.append("student_id = ?")
            args.append(student_id)
        tc, ta = _time_clause(t0, t1)
        with self._lock:
            rows = self._conn.execute(
                "SELECT student_id, session_id, emotion, confidence, timestamp FROM emotions "
                f"WHERE {' AND '.join(clauses + tc)} ORDER BY timestamp, student_id, id",
                args + ta,
            ).fetchall()
        return [EmotionObservation(*row) for row in rows]

    def counts(self) -> dict:
        with self._lock:
            out = {}
            for table in ("students", "sessions", "attendance", "emotions"):
                out[table] = self._conn.execute(f"SELECT COUNT(*) FROM {table}").fetchone()[0]
        return out

    # -- export / import --------------------------------------------------
    # One entity per line, tab-separated. Field order:
    #   student    id, display_name, enrolled_at, embedding (comma-joined)
    #   session    id, course_label, started_at, ended_at ('' if open), status, unmatched_count
    #   attendance student_id, session_id, timestamp, confidence
    #   emotion    student_id, session_id, emotion, confidence, timestamp

    def export_text(self) -> str:
        lines = []
        for s in self.list_students():
            emb = ",".join(repr(float(v)) for v in s.embedding)
            lines.append(f"student\t{s.student_id}\t{s.display_name}\t{s.enrolled_at}\t{emb}")
        for ses in self.list_sessions():
            ended = "" if ses.ended_at is None else str(ses.ended_at)
            lines.append(
                f"session\t{ses.session_id}\t{ses.course_label}\t{ses.started_at}"
                f"\t{ended}\t{ses.status}\t{ses.unmatched_count}"
            )
        with self._lock:
            att = self._conn.execute(
                "SELECT student_id, session_id, timestamp, confidence FROM attendance "
                "ORDER BY session_id, timestamp, student_id"
            ).fetchall()
            emo = self._conn.execute(
                "SELECT student_id, session_id, emotion, confidence, timestamp FROM emotions "
                "ORDER BY session_id, timestamp, student_id, id"
            ).fetchall()
        for r in att:
            lines.append(f"attendance\t{r[0]}\t{r[1]}\t{r[2]}\t{r[3]!r}")
        for r in emo:
            lines.append(f"emotion\t{r[0]}\t{r[1]}\t{r[2]}\t{r[3]!r}\t{r[4]}")
        return "\n".join(lines) + ("\n" if lines else "")

    def import_text(self, text: str) -> dict:
        """Load an export back in; returns per-entity insert counts."""
        grouped: dict[str, list[list[str]]] = {
            "student": [],
            "session": [],
            "attendance": [],
            "emotion": [],
        }
        for line in text.splitlines():
            if not line.strip():
                continue
            kind, *fields = line.split("\t")
            if kind not in grouped:
                raise ValueError(f"unknown record kind {kind!r}")
            grouped[kind].append(fields)
        counts = {k: 0 for k in grouped}
        for f in grouped["student"]:
            self.add_student(f[0], f[1], [float(v) for v in f[3].split(",")], int(f[2]))
            counts["student"] += 1
        for f in grouped["session"]:
            self.create_session(f[0], f[1], int(f[2]))
            if f[4] == "ended":
                self.end_session(f[0], int(f[3]))
            if int(f[5]):
                with self._lock, self._conn:
                    self._conn.execute(
                        "UPDATE sessions SET unmatched_count = ? WHERE session_id = ?",
                        (int(f[5]), f[0]),
                    )
            counts["session"] += 1
        for f in grouped["attendance"]:
            self.insert_attendance(AttendanceRecord(f[0], f[1], int(f[2]), float(f[3])))
            counts["attendance"] += 1
        for f in grouped["emotion"]:
            self.insert_emotion(EmotionObservation(f[0], f[1], f[2], float(f[3]), int(f[4])))
            counts["emotion"] += 1
        return counts

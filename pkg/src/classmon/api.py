"""HTTP service tying the monitoring components together.

Exposes enrollment, session control, batch detection ingestion, and the
read API the dashboard polls. All state lives in an AppState bundle so
tests can build isolated instances; `create_app` wires it into FastAPI.
"""

import logging
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import nn
from .analytics import DEFAULT_BUCKET_MS, Analytics
from .classifier import EmotionCNN
from .errors import (
    AlreadyEnded,
    BatchTooLarge,
    ClassmonError,
    DuplicateStudentId,
    InvalidBucketWidth,
    InvalidEmbedding,
    InvalidLabel,
    MalformedPayload,
    SessionNotActive,
    ShapeMismatch,
    UnknownSession,
    UnknownStudent,
)
from .gateway import GatewayConfig, IngestionGateway
from .labels import N_CLASSES
from .matching import EnrollmentRegistry
from .sessions import SessionEngine
from .store import MonitoringStore
from .utils import now_ms

log = logging.getLogger(__name__)

_STATUS_BY_ERROR = {
    UnknownSession: 404,
    UnknownStudent: 404,
    DuplicateStudentId: 409,
    AlreadyEnded: 409,
    SessionNotActive: 409,
    InvalidEmbedding: 400,
    InvalidBucketWidth: 400,
    InvalidLabel: 400,
    MalformedPayload: 400,
    ShapeMismatch: 400,
    BatchTooLarge: 413,
}


def _error_status(exc: ClassmonError) -> int:
    for klass, status in _STATUS_BY_ERROR.items():
        if isinstance(exc, klass):
            return status
    return 400


def untrained_classifier(channels: int = 1, seed: int = 0) -> EmotionCNN:
    """Classifier with freshly initialized weights, usable before training.

    Predictions are near-uniform; serving without a trained checkpoint is
    allowed so attendance works on day one, but a warning is logged.
    """
    model = EmotionCNN(channels=channels, random_state=seed)
    model.params_ = nn.init_params(channels=channels, rng=np.random.default_rng(seed))
    model.classes_ = np.arange(N_CLASSES)
    model.history_ = []
    return model


class AppState:
    """Long-lived service components wired over one shared store."""

    def __init__(
        self,
        db_path: str = ":memory:",
        model_path: str | None = None,
        capture_interval_ms: int = 2000,
        max_batch: int = 32,
    ):
        self.store = MonitoringStore(db_path)
        self.registry = EnrollmentRegistry()
        for row in self.store.list_students():
            self.registry.enroll_student(
                row.student_id, row.display_name, row.embedding, enrolled_at=row.enrolled_at
            )
        if model_path is not None and Path(model_path).exists():
            self.classifier = EmotionCNN.load(model_path)
            log.info("loaded classifier checkpoint from %s", model_path)
        else:
            if model_path is not None:
                log.warning("checkpoint %s not found, serving untrained weights", model_path)
            self.classifier = untrained_classifier()
        self.engine = SessionEngine(self.store, self.registry, self.classifier)
        self.gateway = IngestionGateway(
            self.engine,
            GatewayConfig(capture_interval_ms=capture_interval_ms, max_batch=max_batch),
        )
        self.analytics = Analytics(self.store)

    def close(self) -> None:
        self.store.close()


class EnrollRequest(BaseModel):
    student_id: str
    display_name: str
    embedding: list[float]


class StartSessionRequest(BaseModel):
    course_label: str = ""
    started_at: int | None = None


class EndSessionRequest(BaseModel):
    ended_at: int | None = None


class RegisterSourceRequest(BaseModel):
    source_id: str
    room_label: str = ""


class DetectionBatchRequest(BaseModel):
    detections: list[dict]


def _session_dict(session) -> dict:
    return {
        "session_id": session.session_id,
        "course_label": session.course_label,
        "started_at": session.started_at,
        "ended_at": session.ended_at,
        "status": session.status,
        "unmatched_count": session.unmatched_count,
    }


def create_app(state: AppState, static_dir: str | None = None) -> FastAPI:
    """Build the FastAPI application over an existing AppState."""
    app = FastAPI(title="classroom monitoring api", version="1.0")
    app.state.components = state

    @app.exception_handler(ClassmonError)
    async def domain_error_handler(request: Request, exc: ClassmonError):
        return JSONResponse(
            status_code=_error_status(exc),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "time": now_ms()}

    @app.post("/v1/students", status_code=201)
    def enroll_student(body: EnrollRequest):
        profile = state.registry.enroll_student(
            body.student_id, body.display_name, body.embedding
        )
        try:
            state.store.add_student(
                profile.student_id,
                profile.display_name,
                profile.reference_embedding,
                profile.enrolled_at,
            )
        except DuplicateStudentId:
            # Store already had the row (e.g. imported); registry is now
            # consistent with it, so treat the enrollment as applied.
            pass
        return {
            "student_id": profile.student_id,
            "display_name": profile.display_name,
            "enrolled_at": profile.enrolled_at,
        }

    @app.get("/v1/students")
    def list_students():
        return {
            "students": [
                {
                    "student_id": p.student_id,
                    "display_name": p.display_name,
                    "enrolled_at": p.enrolled_at,
                }
                for p in state.registry.profiles()
            ]
        }

    @app.get("/v1/sessions")
    def list_sessions():
        return {"sessions": [_session_dict(s) for s in state.store.list_sessions()]}

    @app.post("/v1/sessions", status_code=201)
    def start_session(body: StartSessionRequest):
        session = state.engine.start_session(body.course_label, body.started_at)
        return _session_dict(session)

    @app.post("/v1/sessions/{session_id}/end")
    def end_session(session_id: str, body: EndSessionRequest | None = None):
        ended_at = body.ended_at if body is not None else None
        session = state.engine.end_session(session_id, ended_at)
        return _session_dict(session)

    @app.get("/v1/sessions/{session_id}/attendance")
    def session_attendance(session_id: str):
        snapshot = state.engine.session_snapshot(session_id)
        return {
            "session_id": session_id,
            "records": [
                {
                    "student_id": e.student_id,
                    "display_name": e.display_name,
                    "timestamp": e.timestamp,
                    "confidence": e.confidence,
                }
                for e in snapshot.present
            ],
            "unmatched_count": snapshot.unmatched_count,
        }

    @app.get("/v1/sessions/{session_id}/emotions/distribution")
    def emotion_distribution(session_id: str, t0: int | None = None, t1: int | None = None):
        dist = state.analytics.emotion_distribution(session_id, t0=t0, t1=t1)
        return {
            "session_id": dist.session_id,
            "counts": dist.counts,
            "fractions": dist.fractions,
            "total": dist.total,
            "as_of": dist.as_of,
        }

    @app.get("/v1/sessions/{session_id}/emotions/timeseries")
    def emotion_timeseries(session_id: str, bucket_ms: int = DEFAULT_BUCKET_MS):
        series = state.analytics.engagement_timeseries(session_id, bucket_ms)
        return {
            "session_id": series.session_id,
            "bucket_width_ms": series.bucket_width_ms,
            "buckets": [
                {"bucket_start": b.bucket_start, "counts": b.counts}
                for b in series.buckets
            ],
        }

    @app.get("/v1/sessions/{session_id}/students/{student_id}")
    def student_profile(session_id: str, student_id: str):
        view = state.analytics.student_profile(session_id, student_id)
        attendance = None
        if view.attendance is not None:
            attendance = {
                "timestamp": view.attendance.timestamp,
                "confidence": view.attendance.confidence,
            }
        return {
            "session_id": view.session_id,
            "student_id": view.student_id,
            "display_name": view.display_name,
            "attendance": attendance,
            "history": [
                {
                    "timestamp": obs.timestamp,
                    "emotion": obs.emotion,
                    "confidence": obs.confidence,
                }
                for obs in view.history
            ],
        }

    @app.get("/v1/sessions/{session_id}/summary")
    def session_summary(session_id: str):
        summary = state.analytics.session_summary(session_id)
        return {
            "session": _session_dict(summary.session),
            "present_count": summary.present_count,
            "absent_count": summary.absent_count,
            "dominant_emotion": summary.dominant_emotion,
            "unmatched_count": summary.unmatched_count,
        }

    @app.post("/v1/sources", status_code=201)
    def register_source(body: RegisterSourceRequest):
        info = state.gateway.register_source(body.source_id, body.room_label)
        return {
            "source_id": info.source_id,
            "room_label": info.room_label,
            "registered": info.registered,
        }

    @app.get("/v1/sources")
    def list_sources():
        return {
            "sources": [
                {
                    "source_id": s.source_id,
                    "room_label": s.room_label,
                    "registered": s.registered,
                    "event_count": s.event_count,
                    "last_seen": s.last_seen,
                }
                for s in state.gateway.sources()
            ]
        }

    @app.post("/v1/detections")
    def submit_detections(body: DetectionBatchRequest):
        acks = state.gateway.submit_detections(body.detections)
        return {
            "acks": [
                {"accepted": a.accepted, "reason": a.reason, "outcome": a.outcome}
                for a in acks
            ],
            "accepted_count": sum(1 for a in acks if a.accepted),
        }

    if static_dir is not None and Path(static_dir).is_dir():
        # Dashboard assets; API routes above take precedence over the mount.
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="dashboard")

    return app


def default_static_dir() -> str | None:
    """Locate the built dashboard when the repo layout is intact."""
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return str(candidate) if candidate.is_dir() else None

"""Ingestion gateway: validates wire detections and feeds the session engine.

Wire events arrive as JSON objects carrying a base64 face crop and a 128-d
embedding. Each event in a batch is validated independently, so one bad
event cannot poison the rest; acknowledgments are returned per event in
submission order.
"""

import base64
import binascii
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BatchTooLarge,
    InvalidEmbedding,
    MalformedPayload,
    SessionNotActive,
    UnknownSession,
)
from .sessions import REJECTED, DetectionEvent, SessionEngine
from .utils import now_ms
from .validation import EMBEDDING_DIM, FACE_SIZE

PROTOCOL_VERSION = 1
CROP_BYTES = FACE_SIZE * FACE_SIZE


@dataclass
class GatewayConfig:
    capture_interval_ms: int = 2000
    max_batch: int = 32

    def __post_init__(self):
        if self.capture_interval_ms <= 0:
            raise ValueError("capture_interval_ms must be positive")
        if self.max_batch < 1:
            raise ValueError("max_batch must be at least 1")


@dataclass
class SourceInfo:
    source_id: str
    room_label: str = ""
    registered: bool = False
    event_count: int = 0
    last_seen: int | None = None


@dataclass
class Ack:
    accepted: bool
    reason: str | None = None
    outcome: str | None = None


def encode_crop(crop: np.ndarray) -> str:
    """Base64 of the 64x64 grayscale crop, row-major uint8."""
    arr = np.asarray(crop, dtype=np.uint8)
    if arr.shape != (FACE_SIZE, FACE_SIZE):
        raise MalformedPayload(f"crop must be {FACE_SIZE}x{FACE_SIZE}, got {arr.shape}")
    return base64.b64encode(arr.tobytes()).decode("ascii")


def decode_crop(data: str) -> np.ndarray:
    try:
        raw = base64.b64decode(data, validate=True)
    except (binascii.Error, ValueError, TypeError) as exc:
        raise MalformedPayload(f"face_crop is not valid base64: {exc}") from None
    if len(raw) != CROP_BYTES:
        raise MalformedPayload(
            f"face_crop decodes to {len(raw)} bytes, expected {CROP_BYTES}"
        )
    return np.frombuffer(raw, dtype=np.uint8).reshape(FACE_SIZE, FACE_SIZE)


def parse_wire_detection(obj: dict) -> DetectionEvent:
    """Validate one wire event and convert it to a DetectionEvent.

    Raises MalformedPayload or InvalidEmbedding describing the first
    problem found.
    """
    if not isinstance(obj, dict):
        raise MalformedPayload("event must be an object")
    version = obj.get("protocol_version", PROTOCOL_VERSION)
    if version != PROTOCOL_VERSION:
        raise MalformedPayload(f"unsupported protocol_version {version!r}")
    for key in ("session_id", "captured_at", "embedding", "face_crop"):
        if key not in obj:
            raise MalformedPayload(f"missing required field {key!r}")
    embedding = obj["embedding"]
    if not isinstance(embedding, (list, tuple)) or len(embedding) != EMBEDDING_DIM:
        raise InvalidEmbedding(
            f"embedding must be a list of {EMBEDDING_DIM} numbers"
        )
    vec = np.asarray(embedding, dtype=np.float64)
    if not np.all(np.isfinite(vec)):
        raise InvalidEmbedding("embedding contains non-finite values")
    crop = decode_crop(obj["face_crop"])
    return DetectionEvent(
        session_id=str(obj["session_id"]),
        captured_at=int(obj["captured_at"]),
        embedding=vec,
        face_crop=crop,
        source_id=str(obj.get("source_id", "unknown")),
    )


class IngestionGateway:
    """Accepts detection batches and forwards them to the engine in order."""

    def __init__(self, engine: SessionEngine, config: GatewayConfig | None = None):
        self.engine = engine
        self.config = config or GatewayConfig()
        self._lock = threading.Lock()
        self._sources: dict[str, SourceInfo] = {}

    def register_source(self, source_id: str, room_label: str = "") -> SourceInfo:
        """Idempotent source registration for diagnostics."""
        if not source_id:
            raise MalformedPayload("source_id must be non-empty")
        with self._lock:
            info = self._sources.get(source_id)
            if info is None:
                info = SourceInfo(source_id=source_id, room_label=room_label, registered=True)
                self._sources[source_id] = info
            else:
                info.registered = True
                if room_label:
                    info.room_label = room_label
            return info

    def sources(self) -> list[SourceInfo]:
        with self._lock:
            return sorted(self._sources.values(), key=lambda s: s.source_id)

    def _track_source(self, source_id: str) -> None:
        with self._lock:
            info = self._sources.get(source_id)
            if info is None:
                # Unregistered sources are accepted but flagged.
                info = SourceInfo(source_id=source_id, registered=False)
                self._sources[source_id] = info
            info.event_count += 1
            info.last_seen = now_ms()

    def submit_detections(self, batch) -> list[Ack]:
        """Process a batch; one acknowledgment per event, in order."""
        if not isinstance(batch, (list, tuple)):
            raise MalformedPayload("batch must be a list of events")
        if len(batch) > self.config.max_batch:
            raise BatchTooLarge(
                f"batch of {len(batch)} exceeds max_batch {self.config.max_batch}"
            )
        acks = []
        for obj in batch:
            try:
                event = parse_wire_detection(obj)
            except (MalformedPayload, InvalidEmbedding) as exc:
                acks.append(Ack(accepted=False, reason=f"{type(exc).__name__}: {exc}"))
                continue
            self._track_source(event.source_id)
            try:
                outcome = self.engine.process_detection(event)
            except UnknownSession:
                acks.append(Ack(accepted=False, reason="UnknownSession"))
                continue
            except SessionNotActive:
                acks.append(Ack(accepted=False, reason="SessionNotActive"))
                continue
            if outcome.kind == REJECTED:
                acks.append(Ack(accepted=False, reason=outcome.reason or "rejected"))
            else:
                acks.append(Ack(accepted=True, outcome=outcome.kind))
        return acks

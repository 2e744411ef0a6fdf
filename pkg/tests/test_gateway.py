import base64

import numpy as np
import pytest

from classmon.errors import BatchTooLarge, MalformedPayload
from classmon.gateway import (
    CROP_BYTES,
    PROTOCOL_VERSION,
    GatewayConfig,
    IngestionGateway,
    decode_crop,
    encode_crop,
    parse_wire_detection,
)
from classmon.sessions import ATTENDANCE_MARKED, ATTENDANCE_SKIPPED
from classmon.validation import EMBEDDING_DIM

from conftest import enroll


def wire_event(session_id, embedding, t=1000, crop=None, **extra):
    if crop is None:
        crop = np.arange(CROP_BYTES, dtype=np.uint8).reshape(64, 64) % 251
    obj = {
        "protocol_version": PROTOCOL_VERSION,
        "session_id": session_id,
        "source_id": "cam-1",
        "captured_at": t,
        "embedding": list(np.asarray(embedding, dtype=float)),
        "face_crop": encode_crop(crop),
    }
    obj.update(extra)
    return obj


@pytest.fixture
def gateway(engine):
    return IngestionGateway(engine, GatewayConfig(max_batch=32))


def test_crop_codec_roundtrip_bit_exact():
    rng = np.random.default_rng(0)
    crop = rng.integers(0, 256, size=(64, 64), dtype=np.uint8)
    encoded = encode_crop(crop)
    np.testing.assert_array_equal(decode_crop(encoded), crop)
    # Row-major byte order: the encoded payload is exactly crop.tobytes().
    assert base64.b64decode(encoded) == crop.tobytes()


def test_decode_rejects_bad_payloads():
    with pytest.raises(MalformedPayload):
        decode_crop("@@not-base64@@")
    with pytest.raises(MalformedPayload):
        decode_crop(base64.b64encode(b"\x00" * 100).decode())
    with pytest.raises(MalformedPayload):
        encode_crop(np.zeros((32, 32), dtype=np.uint8))


def test_parse_rejects_wrong_version():
    obj = wire_event("s", np.zeros(EMBEDDING_DIM), protocol_version=2)
    with pytest.raises(MalformedPayload, match="protocol_version"):
        parse_wire_detection(obj)


def test_parse_rejects_missing_fields():
    obj = wire_event("s", np.zeros(EMBEDDING_DIM))
    del obj["captured_at"]
    with pytest.raises(MalformedPayload, match="captured_at"):
        parse_wire_detection(obj)


def test_parse_roundtrips_fields():
    emb = np.linspace(-1, 1, EMBEDDING_DIM)
    obj = wire_event("ses9", emb, t=12345)
    event = parse_wire_detection(obj)
    assert event.session_id == "ses9"
    assert event.captured_at == 12345
    assert event.source_id == "cam-1"
    np.testing.assert_allclose(event.embedding, emb)


def test_batch_too_large(gateway, registry, engine, store):
    enroll(registry, 1, store)
    session = engine.start_session("x")
    batch = [wire_event(session.session_id, np.zeros(EMBEDDING_DIM))] * 33
    with pytest.raises(BatchTooLarge):
        gateway.submit_detections(batch)


def test_non_list_batch_rejected(gateway):
    with pytest.raises(MalformedPayload):
        gateway.submit_detections({"detections": []})


def test_valid_batch_processed_in_order(gateway, registry, engine, store):
    refs = enroll(registry, 3, store)
    session = engine.start_session("x")
    batch = [
        wire_event(session.session_id, refs["s00"], t=100),
        wire_event(session.session_id, refs["s01"], t=101),
        wire_event(session.session_id, refs["s00"], t=102),
    ]
    acks = gateway.submit_detections(batch)
    assert [a.accepted for a in acks] == [True, True, True]
    assert acks[0].outcome == ATTENDANCE_MARKED
    assert acks[1].outcome == ATTENDANCE_MARKED
    assert acks[2].outcome == ATTENDANCE_SKIPPED
    rows = store.query_attendance(session.session_id)
    assert [(r.student_id, r.timestamp) for r in rows] == [("s00", 100), ("s01", 101)]


def test_bad_event_does_not_poison_batch(gateway, registry, engine, store):
    refs = enroll(registry, 2, store)
    session = engine.start_session("x")
    bad = wire_event(session.session_id, np.zeros(127))
    good = wire_event(session.session_id, refs["s01"], t=200)
    acks = gateway.submit_detections([good, bad])
    assert acks[0].accepted
    assert not acks[1].accepted
    assert "InvalidEmbedding" in acks[1].reason
    assert store.counts()["attendance"] == 1


def test_malformed_event_writes_nothing(gateway, registry, engine, store):
    enroll(registry, 1, store)
    session = engine.start_session("x")
    before = store.counts()
    acks = gateway.submit_detections(
        [
            {"protocol_version": 1},
            "not an object",
            wire_event(session.session_id, np.full(EMBEDDING_DIM, np.nan)),
        ]
    )
    assert all(not a.accepted for a in acks)
    assert store.counts() == before


def test_event_for_ended_session_rejected(gateway, registry, engine, store):
    refs = enroll(registry, 1, store)
    session = engine.start_session("x")
    engine.end_session(session.session_id)
    acks = gateway.submit_detections([wire_event(session.session_id, refs["s00"])])
    assert not acks[0].accepted
    assert acks[0].reason == "SessionNotActive"


def test_event_for_unknown_session_rejected(gateway, registry, store):
    enroll(registry, 1, store)
    acks = gateway.submit_detections([wire_event("ghost", np.zeros(EMBEDDING_DIM))])
    assert not acks[0].accepted
    assert acks[0].reason == "UnknownSession"


def test_source_registration_idempotent(gateway):
    gateway.register_source("cam-1", "room 12")
    gateway.register_source("cam-1")
    sources = gateway.sources()
    assert len(sources) == 1
    assert sources[0].room_label == "room 12"
    assert sources[0].registered
    with pytest.raises(MalformedPayload):
        gateway.register_source("")


def test_unregistered_source_flagged(gateway, registry, engine, store):
    refs = enroll(registry, 1, store)
    session = engine.start_session("x")
    gateway.submit_detections([wire_event(session.session_id, refs["s00"])])
    sources = {s.source_id: s for s in gateway.sources()}
    assert "cam-1" in sources
    assert not sources["cam-1"].registered
    assert sources["cam-1"].event_count == 1


def test_config_validation():
    with pytest.raises(ValueError):
        GatewayConfig(capture_interval_ms=0)
    with pytest.raises(ValueError):
        GatewayConfig(max_batch=0)

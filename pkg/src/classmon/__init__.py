"""Classroom attendance and affect monitoring toolkit.

Matches face embeddings against an enrollment registry to mark attendance
once per student per session, classifies facial affect into four classes
with a small convolutional network trained from scratch, stores both
streams durably, and serves analytics over HTTP for a polling dashboard.
"""

from .analytics import Analytics, EmotionDistribution, EngagementTimeSeries
from .api import AppState, create_app
from .classifier import EmotionCNN, argmax_emotion, preprocess_face
from .gateway import GatewayConfig, IngestionGateway
from .labels import EMOTION_LABELS, N_CLASSES, code_for_label, label_for_code
from .matching import (
    DEFAULT_THRESHOLD,
    EnrollmentRegistry,
    MatcherConfig,
    MatchResult,
    euclidean_distance,
    match_confidence,
)
from .metrics import classification_report, evaluate_classifier, format_report
from .sessions import DetectionEvent, SessionEngine
from .simulator import SimScenario, generate_students, make_training_set, run_scenario
from .store import MonitoringStore

__version__ = "1.0.0"

__all__ = [
    "Analytics",
    "AppState",
    "DEFAULT_THRESHOLD",
    "DetectionEvent",
    "EMOTION_LABELS",
    "EmotionCNN",
    "EmotionDistribution",
    "EngagementTimeSeries",
    "EnrollmentRegistry",
    "GatewayConfig",
    "IngestionGateway",
    "MatcherConfig",
    "MatchResult",
    "MonitoringStore",
    "N_CLASSES",
    "SessionEngine",
    "SimScenario",
    "argmax_emotion",
    "classification_report",
    "code_for_label",
    "create_app",
    "euclidean_distance",
    "evaluate_classifier",
    "format_report",
    "generate_students",
    "label_for_code",
    "make_training_set",
    "match_confidence",
    "preprocess_face",
    "run_scenario",
]

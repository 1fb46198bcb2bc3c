from .store import (
    PROVENANCES,
    AnnotationEvent,
    ProjectStore,
    SenseAnnotation,
    SenseDef,
    UnassignResult,
    replay,
)
from .service import create_app

__all__ = [
    "PROVENANCES",
    "AnnotationEvent",
    "ProjectStore",
    "SenseAnnotation",
    "SenseDef",
    "UnassignResult",
    "replay",
    "create_app",
]

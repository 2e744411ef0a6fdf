"""Exception types shared across the monitoring engine."""


class ClassmonError(Exception):
    """Base class for all errors raised by this package."""


class InvalidEmbedding(ClassmonError):
    pass


class DuplicateStudentId(ClassmonError):
    pass


class UnknownStudent(ClassmonError):
    pass


class UnknownSession(ClassmonError):
    pass


class AlreadyEnded(ClassmonError):
    pass


class SessionNotActive(ClassmonError):
    pass


class ForeignKeyViolation(ClassmonError):
    pass


class InvalidLabel(ClassmonError):
    pass


class EmptyImage(ClassmonError):
    pass


class ShapeMismatch(ClassmonError):
    pass


class LengthMismatch(ClassmonError):
    pass


class MissingClass(ClassmonError):
    pass


class EmptyDataset(ClassmonError):
    pass


class InvalidCheckpoint(ClassmonError):
    pass


class InvalidBucketWidth(ClassmonError):
    pass


class BatchTooLarge(ClassmonError):
    pass


class MalformedPayload(ClassmonError):
    pass


class AllZeroScores(ClassmonError):
    pass


class InsufficientClips(ClassmonError):
    pass


class EmptyClip(ClassmonError):
    pass


class IOFailure(ClassmonError):
    pass


class GatewayUnavailable(ClassmonError):
    pass

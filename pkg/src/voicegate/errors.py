"""Exception types raised across the package.

Every error carries enough context (line numbers, label names, statuses) for
callers to report the failure without re-parsing inputs.
"""

from __future__ import annotations


class VoicegateError(Exception):
    """Base class for all package-specific errors."""


# --- corpus / taxonomy ------------------------------------------------------


class MissingFileError(VoicegateError):
    def __init__(self, path):
        super().__init__(f"file not found: {path}")
        self.path = path


class MalformedRecordError(VoicegateError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnknownLabelError(VoicegateError):
    def __init__(self, name: str, axis=None, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        on = f" on axis {axis}" if axis is not None else ""
        super().__init__(f"{where}unknown label {name!r}{on}")
        self.name = name
        self.axis = axis
        self.line = line


class EmptyTemplateSetError(VoicegateError):
    def __init__(self, label: str):
        super().__init__(f"generator entry {label!r} has no templates")
        self.label = label


class EmptyCorpusError(VoicegateError):
    pass


# --- classifier -------------------------------------------------------------


class EmptyTrainingSetError(VoicegateError):
    pass


class EmptyTestSetError(VoicegateError):
    pass


class AlreadyQuantizedError(VoicegateError):
    pass


class ClassWithZeroSamplesWarning(UserWarning):
    """A class from the inventory has no training samples; it is kept."""


# --- model files ------------------------------------------------------------


class BadMagicError(VoicegateError):
    pass


class UnsupportedVersionError(VoicegateError):
    def __init__(self, version: int):
        super().__init__(f"unsupported model format version {version}")
        self.version = version


class ChecksumMismatchError(VoicegateError):
    pass


# --- noise ------------------------------------------------------------------


class EmptyReferenceError(VoicegateError):
    pass


# --- policy -----------------------------------------------------------------


class MalformedDocumentError(VoicegateError):
    pass


class DuplicateRuleError(VoicegateError):
    def __init__(self, name: str):
        super().__init__(f"duplicate rule for label {name!r}")
        self.name = name


class MissingAxisPredictionError(VoicegateError):
    def __init__(self, axis):
        super().__init__(f"no prediction supplied for axis {axis}")
        self.axis = axis


# --- gateway ----------------------------------------------------------------


class CorruptRecordError(VoicegateError):
    def __init__(self, line: int):
        super().__init__(f"audit line {line} failed its checksum")
        self.line = line


class ModelNotLoadedError(VoicegateError):
    def __init__(self, axis):
        super().__init__(f"no classifier loaded for axis {axis}")
        self.axis = axis


class PolicyNotLoadedError(VoicegateError):
    def __init__(self, platform):
        super().__init__(f"no policy loaded for platform {platform}")
        self.platform = platform


class UnknownChallengeError(VoicegateError):
    def __init__(self, challenge_id: str):
        super().__init__(f"unknown challenge {challenge_id!r}")
        self.challenge_id = challenge_id


class ChallengeNotPendingError(VoicegateError):
    def __init__(self, challenge_id: str, status):
        super().__init__(f"challenge {challenge_id!r} is {status}, not pending")
        self.challenge_id = challenge_id
        self.status = status


class GatewayUnreachableError(VoicegateError):
    pass

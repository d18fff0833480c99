"""Exception hierarchy shared by every adrsignal module."""


class AdrSignalError(Exception):
    """Base class for all adrsignal errors."""


class ValidationFailure(AdrSignalError):
    """Input or configuration rejected before any work was done. CLI exit code 1."""


class ConfigError(ValidationFailure):
    pass


class MalformedInputError(ValidationFailure):
    pass


class UnreadableFileError(MalformedInputError):
    pass


class UnparsableDateError(MalformedInputError):
    def __init__(self, value: str, line: int):
        super().__init__(f"unparsable date {value!r} at line {line}")
        self.value = value
        self.line = line


class EmptyInputError(MalformedInputError):
    pass


class MalformedCodeError(ValidationFailure):
    def __init__(self, code: str, kind: str):
        super().__init__(f"malformed {kind} code: {code!r}")
        self.code = code
        self.kind = kind


class VocabularyError(AdrSignalError):
    pass


class LabelError(ValidationFailure):
    pass


class SplitError(AdrSignalError):
    pass


class MissingArtifactError(AdrSignalError):
    def __init__(self, artifact: str, stage: str):
        super().__init__(f"stage {stage!r} requires missing artifact {artifact!r}")
        self.artifact = artifact
        self.stage = stage


class StaleArtifactError(AdrSignalError):
    def __init__(self, artifact: str, stage: str):
        super().__init__(f"artifact {artifact!r} changed since stage {stage!r} wrote it")
        self.artifact = artifact
        self.stage = stage


class ShapeError(AdrSignalError):
    pass


class DivergenceError(AdrSignalError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"non-finite loss {loss} at epoch {epoch}")
        self.epoch = epoch
        self.loss = loss


__all__ = [
    "AdrSignalError",
    "ValidationFailure",
    "ConfigError",
    "MalformedInputError",
    "UnreadableFileError",
    "UnparsableDateError",
    "EmptyInputError",
    "MalformedCodeError",
    "VocabularyError",
    "LabelError",
    "SplitError",
    "MissingArtifactError",
    "StaleArtifactError",
    "ShapeError",
    "DivergenceError",
]

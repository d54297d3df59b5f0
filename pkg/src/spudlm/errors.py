"""Exception hierarchy shared by all spudlm modules."""


class SpudError(Exception):
    """Base class for library errors."""


class ConfigError(SpudError, ValueError):
    """Invalid model, pipeline or parameter configuration."""


class DataError(SpudError):
    """Malformed input data (corpus, run, qrels, topics)."""


class DuplicateDocumentError(DataError):
    def __init__(self, doc_id):
        super().__init__(f"duplicate document id: {doc_id!r}")
        self.doc_id = doc_id


class CorpusReadError(DataError):
    def __init__(self, path, line, offset, reason):
        super().__init__(f"{path}: line {line} (byte offset {offset}): {reason}")
        self.path = path
        self.line = line
        self.offset = offset


class IndexFormatError(DataError):
    """The on-disk index is not readable."""


class FormatVersionError(IndexFormatError):
    pass


class ChecksumError(IndexFormatError):
    pass


class TruncatedIndexError(IndexFormatError):
    pass


class DomainError(SpudError, ValueError):
    """Argument outside the mathematical domain of a function."""


class DivergenceError(SpudError, ArithmeticError):
    """An iterative estimator left the admissible region."""

    def __init__(self, message, last_value=None, iterations=None):
        super().__init__(message)
        self.last_value = last_value
        self.iterations = iterations

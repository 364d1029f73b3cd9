"""Exception types raised across the toolkit."""


class KgError(Exception):
    """Base class for all toolkit errors."""


class ParseError(KgError):
    """A triple or text-map file line could not be parsed."""

    def __init__(self, path, line_no, message):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class EmptyGraphError(KgError):
    """The triple source contained no triples."""


class UnknownEntityError(KgError):
    """An entity id is not in the graph vocabulary."""


class InvalidQueryError(KgError):
    """A path query is malformed (e.g. head equals tail)."""


class ContractViolationError(KgError):
    """A caller violated an operation precondition."""


class ScoringError(KgError):
    """A scorer failed to produce scores (e.g. remote transport failure)."""


class ProtocolError(KgError):
    """A remote scorer response violated the wire protocol."""


class EvaluationError(KgError):
    """The evaluation request is unusable (e.g. empty test set)."""

"""Exception hierarchy shared by all workbench modules."""


class ConceptBenchError(Exception):
    """Base class for every error raised by this package."""


class XmlSyntaxError(ConceptBenchError):
    """Malformed XML input; carries the 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class IngestionError(ConceptBenchError):
    """A document violates a corpus invariant (duplicate id, bad timestamp...)."""


class ConfigurationError(ConceptBenchError):
    """Unsupported language, unknown section or format, bad grid dims..."""


class QueryError(ConceptBenchError):
    """A phrase query that is empty after analysis."""


class OntologyError(ConceptBenchError):
    """Dangling reference, cycle, or duplicate name in an ontology."""


class RuleError(ConceptBenchError):
    """Bad segmentation or object-cluster rule (overlapping intervals, missing key)."""


class EvaluationError(ConceptBenchError):
    """Attribute not evaluable on a document (e.g. temporal attr on undated doc)."""


class UnknownNameError(ConceptBenchError):
    """Lookup of an object, attribute, or rule by an unknown name."""


class ResourceLimitError(ConceptBenchError):
    """A configured size bound was exceeded; partial results are discarded."""


class ArtifactNotFoundError(ConceptBenchError):
    """Requested session artifact or document does not exist."""


class PhaseOrderingError(ConceptBenchError):
    """A phase was run before the phase producing its required input."""

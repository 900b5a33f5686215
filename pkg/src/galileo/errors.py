"""Exception hierarchy shared by every galileo module."""


class GalileoError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(GalileoError):
    """Schema or dataset violates its structural invariants."""


class CodeRangeError(GalileoError, IndexError):
    """A category code lies outside its attribute's value list."""


class NormalizationError(GalileoError, ValueError):
    """A probability vector is negative or does not sum to one."""


class EmptyComponentError(GalileoError, ValueError):
    """Density was requested for a component with no effective size."""


class ParseError(GalileoError):
    """Input file could not be parsed into a dataset."""


class ModelFormatError(GalileoError):
    """A serialized model document is malformed or has the wrong version."""


class DegenerateEvidenceWarning(UserWarning):
    """Every component assigns zero probability to a record."""

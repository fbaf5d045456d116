"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: input problems -> 2, resource caps -> 3,
certificate failures -> 4.
"""


class RadoError(Exception):
    """Base class for all package errors."""


class InputError(RadoError, ValueError):
    """Malformed input: bad schema, wrong kind, dimension mismatch, domain violation."""


class DimensionMismatch(InputError):
    pass


class KindError(InputError):
    """A body kind (or congruence) precondition of an operation is violated."""


class ResourceLimitError(RadoError):
    """A declared resource cap (grid cells, oracle vertices) would be exceeded."""


class CertificateError(RadoError):
    """A returned selection failed its disjointness or density re-check."""

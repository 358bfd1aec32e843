"""Exception types shared across the package.

The CLI maps these onto exit codes: ``InputError`` and ``PreconditionError``
exit with 2, ``NumericalDegeneracyError`` with 3.
"""


class LiegenError(Exception):
    """Base class for all library errors."""


class InputError(LiegenError, ValueError):
    """Malformed input: wrong shapes, bad parameters, unparsable specs."""


class PreconditionError(LiegenError):
    """An operation was called on data violating its documented precondition."""


class NumericalDegeneracyError(LiegenError):
    """A numerical procedure could not separate quantities it needed to separate."""

"""Exception hierarchy shared by all senseloom modules.

Two top-level classes matter for exit codes and HTTP status mapping:
ValidationError covers semantic problems in otherwise readable data
(CLI exit 1, HTTP 400/404/409), DataError covers unreadable or
corrupt inputs (CLI exit 2).
"""


class SenseloomError(Exception):
    """Base class for all errors raised by senseloom."""


class ValidationError(SenseloomError):
    """Input is readable but violates a contract (bad parameter, bad reference)."""


class NotFoundError(ValidationError):
    """A referenced entity (project, lemma, sense, sentence) does not exist."""


class ConflictError(ValidationError):
    """State required for the operation is missing (e.g. projection not computed)."""


class DataError(SenseloomError):
    """A file could not be read or decoded: bad encoding, bad magic, truncation."""

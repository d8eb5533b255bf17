"""Exception hierarchy shared by every subsystem.

Each error carries a stable machine-readable ``code`` so the HTTP facade
can map exceptions to status codes without string matching.
"""

from __future__ import annotations


class ParleyError(Exception):
    """Base class for all domain errors."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# -- validation (HTTP 400) --------------------------------------------------

class InvalidSlug(ParleyError):
    code = "InvalidSlug"


class BadToken(ParleyError):
    code = "BadToken"


class InvalidContent(ParleyError):
    code = "InvalidContent"


class OffsetOutOfRange(ParleyError):
    code = "OffsetOutOfRange"


class BadAddress(ParleyError):
    code = "BadAddress"


class EmptyBody(ParleyError):
    code = "EmptyBody"


class ValidationError(ParleyError):
    code = "ValidationError"


# -- authentication / authorization ----------------------------------------

class BadCredentials(ParleyError):
    code = "BadCredentials"


class AccessDenied(ParleyError):
    code = "AccessDenied"


class NotMember(ParleyError):
    code = "NotMember"


# -- missing referents (HTTP 404) -------------------------------------------

class NotFound(ParleyError):
    code = "NotFound"


class DanglingTarget(ParleyError):
    code = "DanglingTarget"


class UnknownRevision(ParleyError):
    code = "UnknownRevision"


class UnknownSender(ParleyError):
    code = "UnknownSender"


class UnknownArea(ParleyError):
    code = "UnknownArea"


# -- state conflicts (HTTP 409) ----------------------------------------------

class DuplicateSlug(ParleyError):
    code = "DuplicateSlug"


class DeadlinePassed(ParleyError):
    code = "DeadlinePassed"


class InvalidConfig(ParleyError):
    code = "InvalidConfig"


class AlreadyClosed(ParleyError):
    code = "AlreadyClosed"


class InvariantViolation(ParleyError):
    code = "InvariantViolation"


# -- persistence -------------------------------------------------------------

class StorageFailure(ParleyError):
    code = "StorageFailure"


class ChecksumMismatch(ParleyError):
    code = "ChecksumMismatch"


class UnknownPayloadVersion(ParleyError):
    code = "UnknownPayloadVersion"


class SeqMismatch(ParleyError):
    code = "SeqMismatch"

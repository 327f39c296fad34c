"""Error types shared across the node.

Every error carries a stable ``code`` string; the HTTP layer serializes it
verbatim into the error envelope, so codes are part of the wire contract.
"""

from __future__ import annotations


class NodeError(Exception):
    """Base class for all domain errors."""

    code = "Internal"
    http_status = 400

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


def _error(name: str, status: int = 400) -> type[NodeError]:
    return type(name, (NodeError,), {"code": name, "http_status": status})


# taxonomy / profiles
EmptyProfile = _error("EmptyProfile")
EmptyKeywords = _error("EmptyKeywords")
UnknownKeyword = _error("UnknownKeyword")

# rating scale and aggregation
OutOfScale = _error("OutOfScale", 422)
ZeroNotAllowedForKind = _error("ZeroNotAllowedForKind", 422)
EmptyInput = _error("EmptyInput")
InsufficientVotes = _error("InsufficientVotes")
TooFewReports = _error("TooFewReports")
DuplicateRater = _error("DuplicateRater", 409)
VoidComment = _error("VoidComment", 422)

# referee assignment
OutOfRange = _error("OutOfRange", 422)
EmptyPool = _error("EmptyPool")
PoolTooSmall = _error("PoolTooSmall")
QuorumFailure = _error("QuorumFailure")

# workflow
QuotaExceeded = _error("QuotaExceeded", 403)
CooldownActive = _error("CooldownActive", 403)
IarCapViolated = _error("IarCapViolated", 422)
UnverifiedIdentity = _error("UnverifiedIdentity", 403)
NotEligible = _error("NotEligible", 403)
WindowClosed = _error("WindowClosed", 409)
DuplicateVote = _error("DuplicateVote", 409)
AuthorSelfVote = _error("AuthorSelfVote", 403)
NotAssigned = _error("NotAssigned", 403)
AlreadyReported = _error("AlreadyReported", 409)
AlreadyResponded = _error("AlreadyResponded", 409)
InvalidDeadline = _error("InvalidDeadline", 422)
InvalidState = _error("InvalidState", 409)

# incentives
InsufficientPoints = _error("InsufficientPoints", 403)
NoActiveCooldown = _error("NoActiveCooldown", 409)

# federation
DuplicatePaper = _error("DuplicatePaper", 409)
DigestMismatch = _error("DigestMismatch")
MalformedEntry = _error("MalformedEntry", 422)

# event store
SchemaViolation = _error("SchemaViolation", 422)
StorageFailure = _error("StorageFailure", 500)
CorruptLog = _error("CorruptLog", 500)
SnapshotVersionMismatch = _error("SnapshotVersionMismatch", 500)

# api
InvalidIdentity = _error("InvalidIdentity", 422)
DuplicateAccount = _error("DuplicateAccount", 409)
UnknownSection = _error("UnknownSection", 404)
UnknownPaper = _error("UnknownPaper", 404)
UnknownUser = _error("UnknownUser", 404)
Unauthorized = _error("Unauthorized", 401)
Forbidden = _error("Forbidden", 403)
ConfigInvalid = _error("ConfigInvalid")

"""Exception hierarchy shared across the toolkit.

``DomainError`` marks violations of device/experiment contracts (as opposed
to programming errors, which raise the usual builtins).  The HTTP service
maps ``ConflictError`` subclasses to 409 and every other ``DomainError``
to 422, reporting the exception class name.
"""


class DomainError(Exception):
    """Base class for contract violations raised by toolkit operations."""


class ConflictError(DomainError):
    """Base class for single-writer conflicts (mapped to HTTP 409)."""


# --- kinematics ---------------------------------------------------------

class NoAssembly(DomainError):
    """The commanded joint angles leave the output links unable to close."""


class Unreachable(DomainError):
    """A target point lies outside a dyad's annulus (or joint range)."""

    def __init__(self, side: str, message: str):
        super().__init__(f"{side}: {message}")
        self.side = side


class NearSingular(DomainError):
    """A target or configuration is inside the configured singularity margin."""


class Singular(DomainError):
    """Jacobian determinant below the configured threshold."""


class NoContactPose(DomainError):
    """No symmetric contact pose exists at the requested depth."""


# --- device / patterns ---------------------------------------------------

class OutOfRange(DomainError):
    """A commanded target violates the calibrated motion ranges."""


class ParseError(DomainError):
    """Malformed structured-text input (catalog, config, log, wire frame)."""


class ValidationError(DomainError):
    """Well-formed input violating a documented invariant."""


# --- servo / wire --------------------------------------------------------

class AngleOutOfRange(DomainError):
    """Joint angle maps outside the servo's configured angular range."""


class InvalidChannel(DomainError):
    """Servo channel outside 0..3."""


class PulseOutOfRange(DomainError):
    """Pulse width outside the wire protocol's representable range."""


class TransportError(DomainError):
    """Byte transport failed mid-playback; carries the partial report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


# --- experiment / statistics ---------------------------------------------

class EmptyCatalog(DomainError):
    """A trial schedule was requested from a catalog with no patterns."""


class UnknownTrial(DomainError):
    """Response targeted a trial id absent from the schedule."""


class AlreadyAnswered(ConflictError):
    """A trial already holds a response (single-answer invariant)."""


class InvalidAnswer(DomainError):
    """Response pattern id is not in the session's catalog."""


class IncompleteSession(DomainError):
    """Aggregation requires fully answered sessions."""


class CatalogMismatch(DomainError):
    """Aggregated sessions do not share one catalog."""


class EmptyRow(DomainError):
    """Recognition rate requested for a pattern never presented."""


class DegenerateData(DomainError):
    """All observations identical; the variance ratio is undefined."""


class InsufficientData(DomainError):
    """Too few groups or observations for the requested analysis."""


class InvalidDf(DomainError):
    """Degrees of freedom must be at least 1."""


# --- service --------------------------------------------------------------

class PlaybackActive(ConflictError):
    """A playback is already running (single-playback invariant)."""


class SessionActive(ConflictError):
    """An experiment session is already in progress."""

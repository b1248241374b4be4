"""Exception hierarchy for the histories engine.

Every error raised by the package derives from :class:`QHistError`, so
callers (CLI, service) can distinguish engine failures from bugs.
"""


class QHistError(Exception):
    """Base class for all engine errors."""


# ---------------------------------------------------------------------------
# spaces, states, projectors

class DuplicateLabel(QHistError):
    """Two equal basis labels (or rule sources) where distinctness is required."""


class EmptySpace(QHistError):
    """A Hilbert space needs at least one basis label."""


class UnknownLabel(QHistError):
    """A label was referenced that the space does not contain."""


class SpaceMismatch(QHistError):
    """Operands live on different Hilbert spaces."""


class ZeroSpan(QHistError):
    """All vectors handed to a projector builder are numerically zero."""


# ---------------------------------------------------------------------------
# unitary step compilation

class TokenCollision(QHistError):
    """Mode/detector tokens that must be distinct collide."""


class UnknownToken(QHistError):
    """A mode or detector token is not registered in the space scheme."""


class NonIsometricRules(QHistError):
    """Partial unitary rules whose target vectors are not orthonormal."""


class ExtensionConflict(QHistError):
    """Identity extension of a partial unitary cannot be completed."""


class NotUnitary(QHistError):
    """A compiled step failed final unitarity verification."""


# ---------------------------------------------------------------------------
# history families

class NotOrthogonal(QHistError):
    """Sample-space projectors overlap; alternatives must be exclusive."""


class IncompleteSampleSpace(QHistError):
    """Sample-space projectors do not sum to the identity."""


class BadBranch(QHistError):
    """A branch names an alternative its family does not define."""


class InconsistentFamily(QHistError):
    """Probabilities were requested for a family that fails consistency."""


class ZeroConditioningEvent(QHistError):
    """Conditional probability with a (numerically) impossible condition."""


# ---------------------------------------------------------------------------
# family comparison

class GridMismatch(QHistError):
    """Families sample different time grids and cannot be compared."""


class DynamicsMismatch(QHistError):
    """Families disagree on initial state or step unitaries."""


class NonCommuting(QHistError):
    """A common refinement was requested for non-commuting sample spaces."""


# ---------------------------------------------------------------------------
# documents / front doors

class ParseError(QHistError):
    """A scenario document failed validation.

    Carries the full list of diagnostics, not just the first violation.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class UnknownScenario(QHistError):
    """A built-in scenario name that the registry does not know."""

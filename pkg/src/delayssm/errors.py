"""Exception types raised across the package."""


class DelaySSMError(Exception):
    """Base class for all package errors."""


class InvalidSystem(DelaySSMError, ValueError):
    """A system description is malformed or violates an invariant."""


class BoundaryRoot(DelaySSMError):
    """A characteristic root lies on (or extremely close to) a contour."""


class ContourNotConverged(DelaySSMError):
    """The argument-principle integral did not settle on an integer."""


class StripBoundUnavailable(DelaySSMError):
    """No a-priori bound on root moduli could be derived for the kernel."""


class InsufficientDepth(DelaySSMError):
    """A spectrum slice is too shallow for the requested check."""


class MultipleRoot(DelaySSMError):
    """An operation needing a simple root received a multiple one."""


class SeriesModeUnjustified(DelaySSMError):
    """Series-mode dichotomy constants requested with a multiple root."""


class ResolventPole(DelaySSMError):
    """A sum of reduced eigenvalues hits (or nearly hits) the spectrum."""


class NotComputed(DelaySSMError):
    """A required jet order or coefficient is unavailable."""


class WrongSigmaShape(DelaySSMError):
    """The reduced spectral set does not have the required structure."""


class HomologicalResonance(DelaySSMError):
    """A homological-equation divisor vanishes."""


class DegenerateHopf(DelaySSMError):
    """The first Lyapunov-type coefficient vanishes."""


class NoGlobalLipschitz(DelaySSMError):
    """A global Lipschitz constant of the nonlinearity is required."""


class MissingBallLipschitz(DelaySSMError):
    """A local (ball) Lipschitz bound of the nonlinearity is required."""


class BadBeta2(DelaySSMError, ValueError):
    """The F-form splitting exponent must be below -1."""


class Blowup(DelaySSMError):
    """A simulated trajectory left the configured bound."""


class OutOfChart(DelaySSMError):
    """Reduced coordinates exceed the validity radius of the jet."""


class NoCycle(DelaySSMError):
    """A trajectory did not settle onto a periodic orbit."""


class SystemFileError(DelaySSMError, ValueError):
    """A system file could not be parsed; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column

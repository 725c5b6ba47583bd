"""Exception hierarchy for geometric and numerical failure modes."""


class LightconeError(Exception):
    """Base class for all package-specific errors."""


class DegenerateFrame(LightconeError):
    """Gram matrix of a frame is singular or too ill-conditioned to invert."""


class SingularMatrix(LightconeError):
    """A matrix that must be inverted is singular."""


class BranchPoint(LightconeError):
    """The immersion degenerates: (sigma_z, sigma_zbar) vanishes on the grid."""


class NotImmersed(LightconeError):
    """The span of {sigma, sigma_z, sigma_zbar} drops rank somewhere."""


class DegenerateCongruence(LightconeError):
    """The rank-4 frame of the central sphere congruence degenerates."""


class HitsInfinity(LightconeError):
    """(sigma, v_inf) vanishes: the surface crosses the point at infinity
    of the chosen space form."""


class UnknownSurface(LightconeError):
    """Requested surface name is not in the catalog."""


class ZeroLambda(LightconeError):
    """The connection family is undefined at lambda = 0."""


class NotFlat(LightconeError):
    """Path-independence residual of a trivialization exceeds its threshold."""


class SeedInvalid(LightconeError):
    """A transport seed violates its nullity/non-orthogonality requirements."""


class PoleEvaluation(LightconeError):
    """A dressing factor was evaluated too close to one of its poles."""


class DegenerateLine(LightconeError):
    """rho(L) intersects L-perp: the three-block splitting of a dressing
    factor breaks down."""


class DetMismatch(LightconeError):
    """det r(0)|_V != det r(infinity)|_V: the factor cannot produce a
    surface transform."""


class IllPosed(LightconeError):
    """A least-squares system is rank-deficient beyond its expected kernel."""


class ConfigError(LightconeError):
    """Run configuration is malformed."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field

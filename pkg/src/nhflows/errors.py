"""Exception types raised across the package."""


class NHFlowsError(Exception):
    """Base class for all errors raised by nhflows."""


class WedgeIndexError(NHFlowsError, IndexError):
    """A basis index is outside the admissible range."""


class DimensionError(NHFlowsError, ValueError):
    """Operands live in algebras or spaces of different dimension."""


class DegenerateBasisError(NHFlowsError, ValueError):
    """A spanning set is linearly dependent."""


class ProjectionError(NHFlowsError, ValueError):
    """A matrix is too far from the rotation group to be projected back."""


class ParameterError(NHFlowsError, ValueError):
    """Physical or structural parameters violate a precondition."""


class ChainError(NHFlowsError, ValueError):
    """A list of bases is not a chain of nested subalgebras."""


class DegenerateConstraintError(NHFlowsError, ValueError):
    """The multiplier system is singular or badly conditioned."""


class ApplicabilityError(NHFlowsError, ValueError):
    """The requested specialization does not apply to the given system."""


class MeasureError(NHFlowsError, ValueError):
    """A density is undefined at the given state."""


class StateError(NHFlowsError, ValueError):
    """A state lies outside the domain of a map."""


class BoundaryError(NHFlowsError, ValueError):
    """A point lies on the boundary of a coordinate chart."""


class BranchError(NHFlowsError, ValueError):
    """A quadrature is evaluated too close to a branch point."""


class FitError(NHFlowsError, ValueError):
    """Fitted constants are inconsistent or ill determined."""


class SingularityError(NHFlowsError, ValueError):
    """A potential or vector field is singular at the given state."""


class ConditioningError(NHFlowsError, ValueError):
    """A linear solve is too badly conditioned to be trusted."""


class DegenerateMetricError(NHFlowsError, ValueError):
    """The metric operator I + Gamma is singular."""


class NumericError(NHFlowsError, FloatingPointError):
    """A non-finite value appeared during integration."""


class IntegrityError(NHFlowsError):
    """A monitored invariant drifted far beyond its tolerance."""


class RateError(NHFlowsError, ValueError):
    """A time-reparameterization rate is not strictly positive."""


class DegenerateOrbitError(NHFlowsError, ValueError):
    """A planar orbit passes too close to the origin to define a phase."""


class NonGenericDataError(NHFlowsError, ValueError):
    """Eigenvalues that should be simple have collided."""


class ConfigError(NHFlowsError, ValueError):
    """A scenario configuration is malformed."""

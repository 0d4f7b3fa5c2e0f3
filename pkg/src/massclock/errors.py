"""Exception hierarchy.

Two families matter to callers: ``ConfigError`` (bad run description,
CLI exit code 2) and ``PreconditionError`` (a numerical precondition of an
operation is violated, CLI exit code 3).  Tolerance failures are not
exceptions; experiments report them through their result records.
"""


class MassclockError(Exception):
    """Base class for all package errors."""


class ConfigError(MassclockError):
    """Malformed or inconsistent run configuration."""


class PreconditionError(MassclockError):
    """A numerical precondition of an operation is violated."""


class BoundaryViolationError(PreconditionError):
    """Wavepacket support too close to the periodic seam."""


class GridResolutionError(PreconditionError):
    """Feature not resolvable on the grid (e.g. sigma < 4 dx)."""


class AliasingError(PreconditionError):
    """Kinetic phase advance per step exceeds pi somewhere on the p grid."""


class IncompatibleSpacesError(PreconditionError):
    """Two states do not share grid and internal space."""


class BranchDeformedError(PreconditionError):
    """Branch states differ by more than a phase; phase is meaningless."""


class SuperluminalError(PreconditionError):
    """A velocity at or above c where only subluminal motion is defined."""


class TrajectoryError(PreconditionError):
    """Bad trajectory data (open where closed required, too few samples...)."""


class SpreadDominatedError(PreconditionError):
    """Wavepacket momentum spread would swamp the effect being measured."""

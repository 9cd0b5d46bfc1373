"""Exception types raised by the simulation library."""


class CavityError(Exception):
    """Base class for all library errors."""


class CutoffTooSmall(CavityError):
    """The Fock truncation cannot represent the requested state or operator."""


class NotAState(CavityError):
    """A matrix fails the density-matrix invariants."""


class PositivityLost(CavityError):
    """Numerical integration produced a markedly non-positive density matrix."""


class SeriesNotConverged(CavityError):
    """The Kraus series left a trace deficit above tolerance."""


class DegenerateCat(CavityError):
    """The cat-state normalization diverges (the superposition has no support)."""


class DegenerateBranch(CavityError):
    """The two coherent branches of a mode coincide; the mode is one-dimensional."""


class QutritRegime(CavityError):
    """The evolved state leaves the two-qubit subspace; no two-qubit measure applies."""


class OutOfRange(CavityError, ValueError):
    """A scalar argument lies outside its admissible interval."""


class ConfigError(CavityError):
    """Invalid sweep configuration."""

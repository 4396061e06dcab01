"""Exception taxonomy shared across the package.

The CLI maps these onto its exit codes: ConfigError -> 2,
IntegrityError -> 3; everything else is a plain failure.
"""


class EmqsimError(Exception):
    """Base class for package errors."""


class ConfigError(EmqsimError):
    """Invalid configuration file or flag values."""


class IntegrityError(EmqsimError):
    """Numerical-integrity violation: trace drift, Hermiticity loss, leakage."""


class CalibrationError(IntegrityError):
    """A calibration fit failed (no oscillation, unresolved sign, ...).

    Subclasses IntegrityError because a failed fit signals the same class of
    problem -- the simulated physics left its validity regime -- and should
    abort with the same exit code.
    """


class UnsupportedLocalityError(EmqsimError):
    """A Pauli term acts on more than two qubits and cannot be lowered."""


class CompileError(EmqsimError):
    """A circuit contains a gate the target (native set / format) cannot express."""

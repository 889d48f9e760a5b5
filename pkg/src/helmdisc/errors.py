"""Exception hierarchy. CLI exit codes: validation 2, accuracy 3, falsification 4."""


class HelmdiscError(Exception):
    pass


class ValidationError(HelmdiscError):
    """Bad input: violated precondition, malformed parameters. Exit code 2."""


class DomainError(ValidationError):
    """Mathematically inadmissible argument (non-finite, out of declared range)."""


class SingularityError(DomainError):
    """Evaluation exactly at a singular point (e.g. Hankel at z = 0)."""


class AccuracyLossError(HelmdiscError):
    """Requested accuracy unattainable; carries a rough relative-error estimate. Exit code 3."""

    def __init__(self, msg, estimate=None):
        super().__init__(msg if estimate is None else f"{msg} (est. rel. error ~{estimate:.1e})")
        self.estimate = estimate


class RangeError(AccuracyLossError):
    """Value not representable in double precision (use the scaled API)."""


class QuadratureError(AccuracyLossError):
    """Node-doubling certificate failed to converge."""


class NearResonanceError(HelmdiscError):
    """2x2 interface system numerically singular; carries |F_nu(k)|."""

    def __init__(self, msg, f_abs=None):
        super().__init__(msg)
        self.f_abs = f_abs


class ConvergenceError(HelmdiscError):
    """Iteration failed to converge; carries the iterate trace."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace or []


class IsolationError(HelmdiscError):
    """Argument-principle winding around a candidate zero is not 1."""


class InvariantViolationError(HelmdiscError):
    """A sign/margin guaranteed by the theory was violated beyond slack. Exit code 4."""


class FalsificationError(InvariantViolationError):
    """Certified bound violated while its hypothesis holds: build-failing. Exit code 4."""


class TruncationWarning(UserWarning):
    """Mode truncation tail estimate above tolerance."""

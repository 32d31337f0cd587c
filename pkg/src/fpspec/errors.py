"""Exception types shared across the package."""


class FPSpecError(Exception):
    """Base class for errors raised by fpspec."""


class InputError(FPSpecError, ValueError):
    """Malformed or out-of-contract input."""


class InvalidModelError(FPSpecError, ValueError):
    """The (C, D) pair violates one or more of the model conditions."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(f"({v.condition}) {v.detail}" for v in self.violations))


class NumericalError(FPSpecError, ArithmeticError):
    """A numerical routine failed or produced an inconsistent result."""


class ConsistencyError(FPSpecError, RuntimeError):
    """An internal identity that must hold exactly was violated."""


class BlockSizeError(FPSpecError, ValueError):
    """A generator block would exceed the configured size cap."""


class ConfigurationError(FPSpecError, RuntimeError):
    """A solver state lacks data it needs (e.g. a generator block)."""


class DegenerateTimeError(FPSpecError, ValueError):
    """The Green's function covariance is too ill-conditioned at this time."""

    def __init__(self, t, safe_t):
        self.t = t
        self.safe_t = safe_t
        super().__init__(f"W(t) is numerically singular at t = {t:g}; smallest safe t is about {safe_t:.6g}")


class BoundViolationError(FPSpecError, AssertionError):
    """A decay bound failed at a sample; this indicates a bug."""

    def __init__(self, index, t, fisher, bound):
        self.index, self.t, self.fisher, self.bound = index, t, fisher, bound
        super().__init__(f"sample {index} (t = {t:.17g}): fisher {fisher:.17g} exceeds bound {bound:.17g}")

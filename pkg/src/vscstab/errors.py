"""Exception types shared across the package."""


class VscStabError(Exception):
    """Base class for all package errors."""


class ParameterError(VscStabError):
    """Invalid physical or controller parameter."""


class InfeasibleOperatingPointError(VscStabError):
    """The PLL lock equation has no root in the search bracket."""


class RationalArithmeticError(VscStabError):
    """Ill-posed rational-function arithmetic (e.g. division by zero)."""


class PoleError(VscStabError):
    """Evaluation at (or numerically too close to) a pole.

    Carries the offending Laplace point in ``s``.
    """

    def __init__(self, s, message=None):
        self.s = s
        super().__init__(message or f"evaluation at a pole: s = {s}")


class ModelConstructionError(VscStabError):
    """A transfer-function denominator degenerated while building the model."""


class UnreliableWindingError(VscStabError):
    """Angle steps survived refinement; the winding number cannot be trusted."""


class AmbiguousBoundaryError(VscStabError):
    """Multiple stability transitions inside a bisection bracket."""

    def __init__(self, transitions, message=None):
        self.transitions = list(transitions)
        super().__init__(
            message
            or "non-monotone verdict transition; boundaries near: "
            + ", ".join(f"{t:.6g}" for t in self.transitions)
        )


class DegenerateSystemError(VscStabError):
    """An identically-zero denominator in a generalized network reduction."""


class WindowQualityError(VscStabError):
    """Spectral window failed the leakage or oscillation-content checks."""


class ConfigError(VscStabError):
    """Configuration file error; message names the key and line."""

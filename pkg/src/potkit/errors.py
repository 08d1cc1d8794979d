"""Exception taxonomy shared by all potkit modules.

Two families matter to callers: :class:`InputError` covers malformed or
inconsistent input (bad JSON, non-immersed curves, base points outside their
hole), while :class:`MathError` covers mathematically legitimate input on
which a requested operation is undefined or numerically refused (pole on the
integration contour, evaluation too close to the boundary, singular constant
system).  The CLI maps the former to exit code 2 and the latter to exit 3.
"""


class PotkitError(Exception):
    """Base class for all potkit errors."""


class InputError(PotkitError):
    """Malformed or inconsistent input data."""


class MathError(PotkitError):
    """A mathematically refused operation on well-formed input."""


class NonImmersedCurveError(InputError):
    """|z'(t)| falls below the immersion floor somewhere on the curve."""


class GeometryError(InputError):
    """Domain invariants violated (orientation, disjointness, base points)."""


class PoleOnBoundaryError(MathError):
    """A pole sits on (or within tolerance of) the integration boundary."""


class DegenerateSubstitutionError(MathError):
    """Rational substitution produced an identically zero denominator."""


class ZeroRationalDivisionError(MathError):
    """Division by the zero rational function."""


class NearBoundaryError(MathError):
    """Evaluation point refused: closer than 5x the local node spacing."""


class EvaluationError(MathError):
    """A pointwise evaluation failed (pole hit, Newton non-convergence)."""


class BasePointError(MathError):
    """The Szego base point produced degenerate kernel zeros; re-pick a."""


class SingularSystemError(MathError):
    """A dense linear system was singular or unusable."""


class ZeroCountError(MathError):
    """Argument-principle zero count disagreed with the expected n-1."""


class DecompositionError(MathError):
    """Boundary decomposition u = f + conj(F) exceeded its residual budget."""

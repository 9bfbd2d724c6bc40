"""Exception types shared across the package."""


class JodagError(Exception):
    """Base class for package-specific errors."""


class SingularDesign(JodagError):
    """A Gram submatrix was numerically singular during a regression solve.

    Callers performing model search should treat the offending candidate
    parent set as invalid (score of minus infinity) rather than aborting.
    """


class DegenerateVariance(JodagError):
    """A residual variance hit the numerical floor before taking its log."""


class OracleLimitError(JodagError):
    """A brute-force oracle was invoked beyond its configured size limit."""

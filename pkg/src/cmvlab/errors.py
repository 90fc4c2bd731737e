"""Exception types shared across the toolkit."""


class NumericalInstabilityError(RuntimeError):
    """A computation could not be certified at the requested tolerance."""


class TruncationInstabilityError(NumericalInstabilityError):
    """A half-line value changed too much when the truncation window was doubled."""


class DegenerateBandError(NumericalInstabilityError):
    """Two Floquet eigenvalues are too close to separate into band branches."""

    def __init__(self, k: float, gap: float):
        self.k = k
        self.gap = gap
        super().__init__(
            f"near-degenerate Floquet eigenvalues at k={k!r} (gap {gap:.3e})"
        )


class WeylDenominatorError(NumericalInstabilityError):
    """The M_minus denominator is numerically zero."""


class CoinGaugeError(ValueError):
    """A coin does not admit the CMV-compatible gauge at some site."""

    def __init__(self, site: int, message: str):
        self.site = site
        super().__init__(f"coin at site {site}: {message}")

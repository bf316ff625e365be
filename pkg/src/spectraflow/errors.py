"""Exception types shared across the package."""


class SpectralError(ValueError):
    """A numerical refusal: the input violates a gap, tolerance or sampling condition.

    The CLI maps this to exit status 3 and prints the message verbatim.
    """

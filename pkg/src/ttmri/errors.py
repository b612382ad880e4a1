"""Exception types shared across the package."""


class TtmriError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(TtmriError, ValueError):
    """Shapes or sizes of the operands do not match."""


class ParameterError(TtmriError, ValueError):
    """A hyperparameter or option is outside its valid range."""


class UnitarityError(TtmriError, ValueError):
    """A supplied matrix is not unitary within tolerance."""

    def __init__(self, message: str, deviation: float):
        super().__init__(f"{message} (deviation {deviation:.3e})")
        self.deviation = deviation


class NumericError(TtmriError, RuntimeError):
    """A numerical routine failed (for example an SVD did not converge)."""

    def __init__(self, message: str, slice_index: int | None = None):
        super().__init__(message)
        self.slice_index = slice_index


class DivergenceError(NumericError):
    """An iterative solver produced non-finite values."""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


class DataFormatError(TtmriError, ValueError):
    """A file does not conform to the expected binary layout."""

"""Exception types raised by quadflow."""


class QuadflowError(Exception):
    """Base class for all library errors."""


class NonSquareError(QuadflowError, ValueError):
    pass


class DimensionError(QuadflowError, ValueError):
    pass


class EigenSolverError(QuadflowError):
    pass


class MatrixFunctionError(QuadflowError):
    """Neither the eigen path nor the series fallback met the error budget."""


class ExceptionalTime(QuadflowError):
    """cos(tF) is (numerically) singular at the requested time."""

    def __init__(self, t, det_magnitude, threshold):
        self.t = t
        self.det_magnitude = det_magnitude
        self.threshold = threshold
        super().__init__(
            f"t={t!r} lies in the exceptional set: |det cos(tF)| = {det_magnitude:.3e} "
            f"<= {threshold:.3e}"
        )


class NonDiagonalizable(QuadflowError):
    pass


class RealEigenvalue(QuadflowError):
    pass


class PairingFailure(QuadflowError):
    pass


class NotPositiveDefinite(QuadflowError, ValueError):
    pass


class NotSymplectic(QuadflowError, ValueError):
    pass


class NonSymplecticSingularSpace(QuadflowError):
    pass


class FullSingularSpace(QuadflowError):
    pass


class IllConditionedExponent(QuadflowError):
    pass


class GridTooCoarse(QuadflowError):
    pass


class ModelError(QuadflowError, ValueError):
    """Unknown model name, bad parameters or malformed model file."""


class NonDissipative(QuadflowError):
    pass

"""Exception types raised by the numerical pipelines."""


class FloquetError(Exception):
    """Base class for every error raised by floqnf."""


class InputError(FloquetError):
    """Malformed system or field description."""


class NumericalFailure(FloquetError):
    """A computed quantity violates a structural guarantee."""


# linsys
class SingularQ(NumericalFailure):
    pass


# integrator
class StepSizeUnderflow(NumericalFailure):
    pass


class OutOfWindow(FloquetError):
    pass


# spectral
class SingularMonodromy(NumericalFailure):
    pass


class AmbiguousCluster(NumericalFailure):
    pass


class ChainBreakdown(NumericalFailure):
    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class AnchorNotEigenvector(NumericalFailure):
    pass


# realog
class ZeroEigenvalue(NumericalFailure):
    pass


class NoRealLogarithm(NumericalFailure):
    pass


class SingularMatrix(NumericalFailure):
    pass


class NotNegativeSpectrum(NumericalFailure):
    pass


class MatrixExpOverflow(NumericalFailure):
    pass


class BranchResidue(NumericalFailure):
    """Imaginary residue above the drop threshold in a supposedly real log."""


# floquet
class UnsupportedK(FloquetError):
    pass


# orbitframes
class NoConvergence(NumericalFailure):
    pass


class DegenerateSection(NumericalFailure):
    pass


class IndexMismatch(NumericalFailure):
    pass


class FrameDegenerate(NumericalFailure):
    pass

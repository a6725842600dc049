"""Exception types raised by the contextual-value toolkit."""


class ContextualValueError(Exception):
    """Base class for all toolkit errors."""


class NotHermitian(ContextualValueError):
    """Matrix expected to be Hermitian is not, within tolerance."""


class IncompleteContext(ContextualValueError):
    """Kraus operators whose POVM does not sum to the identity."""

    def __init__(self, residual):
        self.residual = float(residual)
        super().__init__(f"POVM completeness defect {self.residual:.3e}")


class DimensionMismatch(ContextualValueError):
    """Operators or states of incompatible dimension."""


class ZeroProbabilityBranch(ContextualValueError):
    """State update along a measurement branch of (numerically) zero probability."""


class NonCommutingContext(ContextualValueError):
    """Operation requires mutually commuting measurement operators and observable."""


class NotReconstructable(ContextualValueError):
    """Observable is not in the span of the POVM elements."""

    def __init__(self, residual, message=None):
        self.residual = float(residual)
        super().__init__(message or f"residual {self.residual:.3e} above tolerance")


class ZeroPostselectionProbability(ContextualValueError):
    """Postselection outcome has probability below the stability floor."""


class OrthogonalPostselection(ContextualValueError):
    """Pre- and postselection states are orthogonal."""


class GridInadequate(ContextualValueError):
    """Discretization grid fails the completeness adequacy check."""

    def __init__(self, defect):
        self.defect = float(defect)
        super().__init__(f"grid completeness defect {self.defect:.3e}")


class DegenerateCoupling(ContextualValueError):
    """Detector coupling too weak to invert (overlap equals the norm constant)."""


class DivergentPostselection(ContextualValueError):
    """Closed-form conditioned average has a vanishing denominator."""


class NoPostselectedTrials(ContextualValueError):
    """Monte Carlo run kept zero trials after postselection."""

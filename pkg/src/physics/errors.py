"""Exceptions raised by the physics layer.

Every error names the precondition or invariant it guards in `invariant`, which the
command line prints alongside the message, and carries the process `exit_code` the
command line maps it to: bad input exits with 2, a numerical failure with 3.
"""


class CompositeEntropyError(Exception):
    """Base class for every error this package raises on purpose."""

    invariant = "composite-entropy"
    exit_code = 3

    def __init__(self, message, *, invariant=None):
        """Store the message and, optionally, a more specific invariant name."""
        super().__init__(message)
        if invariant is not None:
            self.invariant = invariant


class InvalidParams(CompositeEntropyError, ValueError):
    """A physical parameter or weight definition violates its invariants."""

    invariant = "valid-params"
    exit_code = 2


class OutOfRange(CompositeEntropyError, ValueError):
    """A tabulated weight was evaluated outside its sample range."""

    invariant = "inside-table"
    exit_code = 2


class OutOfValidity(CompositeEntropyError, ValueError):
    """A closed form was asked for outside the regime where it holds."""

    invariant = "closed-form-validity"
    exit_code = 2


class NumericalError(CompositeEntropyError, ArithmeticError):
    """A discretization or solver failed to meet its accuracy contract."""

    invariant = "numerics"


class QuadratureNotConverged(NumericalError):
    """Successive refinements still disagree after the last allowed refinement."""

    invariant = "quadrature-converged"


class GridTooCoarse(NumericalError):
    """The position grid cannot hold the density matrix to the trace tolerance."""

    invariant = "grid-resolves-trace"


class NonPositivePurity(NumericalError):
    """Tr[rho^2] came out non-positive, which only a broken discretization does."""

    invariant = "positive-purity"


class SpectrumError(NumericalError):
    """The density-matrix spectrum has a clearly negative eigenvalue."""

    invariant = "nonnegative-spectrum"


class NegativeWigner(NumericalError):
    """A Wigner function dips below zero, so its Shannon entropy is undefined."""

    invariant = "nonnegative-wigner"


class NegativeHusimi(NumericalError):
    """An hbar/2-Husimi function dips below zero, which only a transform bug does."""

    invariant = "nonnegative-husimi"


class NotSymmetric(NumericalError):
    """The matrix handed to the symmetric eigensolver is not symmetric."""

    invariant = "symmetric-matrix"


class NoConvergence(NumericalError):
    """The eigensolver did not converge."""

    invariant = "eigensolver-converged"

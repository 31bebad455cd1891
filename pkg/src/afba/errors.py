"""Exceptions and warnings shared across the package."""


class DimensionMismatch(ValueError):
    """Operands have incompatible shapes."""


class InvalidParameters(ValueError):
    """A configuration failed its validity inequalities.

    Attributes
    ----------
    inequalities : list
        Every checked inequality, as :class:`afba.validity.Inequality`
        objects.  The failed ones are available as ``failed``.
    """

    def __init__(self, message, inequalities=()):
        super().__init__(message)
        self.inequalities = list(inequalities)

    @property
    def failed(self):
        return [q for q in self.inequalities if not q.holds]

    @property
    def failed_names(self):
        return [q.name for q in self.failed]

    def to_dict(self):
        return {
            "valid": False,
            "message": str(self),
            "inequalities": [q.to_dict() for q in self.inequalities],
        }


class InvariantViolation(RuntimeError):
    """A quantity the theory guarantees positive or finite was not."""


class NumericalFailure(RuntimeError):
    """Iterates became non-finite.

    Attributes
    ----------
    last_good : ndarray or None
        The last finite iterate.
    iteration : int
    """

    def __init__(self, message, last_good=None, iteration=None):
        super().__init__(message)
        self.last_good = last_good
        self.iteration = iteration


class NonConvergenceWarning(RuntimeWarning):
    """An inner numerical routine stopped at its iteration budget."""

"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line frontend:
2 for usage/input problems, 3 for estimation-domain failures.
"""


class WeibullTailError(ValueError):
    exit_code = 3


# input / usage errors

class EmptySample(WeibullTailError):
    exit_code = 2


class InvalidValue(WeibullTailError):
    exit_code = 2

    def __init__(self, index, value=None):
        self.index = index
        self.value = value
        super().__init__(f"non-finite value {value!r} at index {index}")


class UnknownModel(WeibullTailError):
    exit_code = 2


class UnknownScore(WeibullTailError):
    exit_code = 2


class BadParam(WeibullTailError):
    exit_code = 2


class BadSpec(WeibullTailError):
    exit_code = 2


# estimation-domain errors

class BadK(WeibullTailError):
    pass


class NonPositiveTail(WeibullTailError):
    pass


class BadEpsilon(WeibullTailError):
    pass


class DegenerateDenominator(WeibullTailError):
    pass


class DegenerateScore(WeibullTailError):
    pass


class IntegralDiverged(WeibullTailError):
    pass


class DomainError(WeibullTailError):
    pass


class InversionFailed(WeibullTailError):
    pass

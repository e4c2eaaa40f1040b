"""Exception hierarchy shared by the scheme, the baselines and the CLI."""


class AmounError(Exception):
    """Base class for every error raised by this package."""


class NotInvertible(AmounError, ValueError):
    def __init__(self, a, m):
        super().__init__(f"{a} has no inverse modulo {m}")
        self.a = a
        self.m = m


class RetryBudgetExhausted(AmounError, RuntimeError):
    pass


class InvalidParameters(AmounError, ValueError):
    pass


class BudgetEmpty(InvalidParameters):
    pass


class ModuliNotCoprime(AmounError, ValueError):
    def __init__(self, i, j):
        super().__init__(f"moduli of recipients {i} and {j} share a factor")
        self.i = i
        self.j = j


class GroupTooSmall(AmounError, ValueError):
    pass


class IndexOutOfRange(AmounError, IndexError):
    pass


class LengthMismatch(AmounError, ValueError):
    pass


class MessageTooLarge(AmounError, ValueError):
    def __init__(self, index, detail=""):
        msg = f"message {index} exceeds its budget"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.index = index


class MalformedEnvelope(AmounError, ValueError):
    pass


class ConfigInvalid(AmounError, ValueError):
    pass

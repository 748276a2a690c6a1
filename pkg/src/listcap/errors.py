"""Exception hierarchy shared by all listcap modules."""


class ListcapError(ValueError):
    """Base class for input and numerical errors raised by listcap."""


class NonStochasticRow(ListcapError):
    pass


class NotHermitian(ListcapError):
    pass


class NotPositiveSemidefinite(ListcapError):
    pass


class TraceNotOne(ListcapError):
    pass


class DimensionMismatch(ListcapError):
    pass


class VariantMismatch(ListcapError):
    """Classical and quantum objects were mixed in one computation."""


class BudgetExceeded(ListcapError):
    """Exact enumeration would exceed the configured memory/work budget."""


class InfiniteDivergence(ListcapError):
    pass


class InvalidCode(ListcapError):
    """Encoder/decoder tables that violate the list-code invariants."""


class NotConverged(ListcapError):
    """Iteration limit hit before the duality gap fell below tolerance.

    The best result found so far is available as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result

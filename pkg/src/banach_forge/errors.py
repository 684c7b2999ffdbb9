"""Exception hierarchy.

Each class carries an ``exit_code`` used by the command line front end:
2 parse, 3 shape, 4 budget, 5 certificate failure.
"""


class BanachForgeError(Exception):
    exit_code = 1


class ParseError(BanachForgeError):
    exit_code = 2


class DimensionMismatch(BanachForgeError, ValueError):
    exit_code = 3


class DomainMismatch(DimensionMismatch):
    pass


class Infeasible(BanachForgeError):
    pass


class Unbounded(BanachForgeError):
    pass


class UnboundedInput(BanachForgeError):
    pass


class DegenerateSpace(BanachForgeError):
    exit_code = 3


class BudgetExhausted(BanachForgeError):
    exit_code = 4


class CertificateFailure(BanachForgeError):
    """A checked postcondition did not hold; ``witness`` names a vector if one exists."""

    exit_code = 5

    def __init__(self, message, witness=None, value=None):
        super().__init__(message)
        self.witness = witness
        self.value = value


class NotOneBounded(CertificateFailure):
    pass


class P1Violated(CertificateFailure):
    pass


class P2Violated(CertificateFailure):
    pass


class NotEpsIsometry(CertificateFailure):
    pass


class HypothesisFailed(CertificateFailure):
    pass


class NotKArrow(CertificateFailure):
    pass


class ChainInvalid(CertificateFailure):
    pass


class BadInput(BanachForgeError):
    exit_code = 3


class BadSeedIsometry(BadInput):
    pass

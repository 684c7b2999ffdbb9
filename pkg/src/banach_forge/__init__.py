"""Exact constructions with polyhedral finite-dimensional Banach spaces."""
from .rational import Q, Matrix, parse_rational, fmt
from .spaces import PolyBanachSpace, Operator, norm, op_norm, lower_isometry_bound
from .category import KArrow, LArrow, Chain, Certificate, verify_karrow, compose_k

__version__ = "0.1.0"

__all__ = ["Q", "Matrix", "parse_rational", "fmt", "PolyBanachSpace", "Operator", "norm", "op_norm",
           "lower_isometry_bound", "KArrow", "LArrow", "Chain", "Certificate", "verify_karrow", "compose_k"]

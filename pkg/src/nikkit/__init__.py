"""Explicit two-factor Nikishin system: evaluation, measures, identity checks, Hermite-Padé."""

from .branchkit import (PROPOSITION, DomainError, FactorExponents, SheetSide, SystemParams,
                        conjecture_exponents, eval_f)

__version__ = "0.1.0"

__all__ = ["PROPOSITION", "DomainError", "FactorExponents", "SheetSide", "SystemParams",
           "conjecture_exponents", "eval_f", "__version__"]

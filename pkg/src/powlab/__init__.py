"""Cumulative powers of finite structures: hereditary operations, quotients
by hereditary identity and by ultrafilters, preservation classifiers and
embedding theorems, checked on exhaustive finite grids."""

from .syntax import Signature, format_formula, parse_formula, to_pcnf, to_pdnf
from .filters import FilterFamily, principal_ultrafilter, ultrafilters_over, validate_filter
from .finmodel import FiniteStructure, direct_power, enumerate_structures, satisfies, ultrapower
from .cumulative import Base, CumulativePower, Func, IndexFamily, apply_operation, level, vartheta
from .quotients import canonical_iso_direct, canonical_iso_ultra, quotient_by, Ultra
from .classify import classify_formula, is_direct_power_sentence, is_horn, weinstein_R

__all__ = [
    "Signature", "format_formula", "parse_formula", "to_pcnf", "to_pdnf",
    "FilterFamily", "principal_ultrafilter", "ultrafilters_over", "validate_filter",
    "FiniteStructure", "direct_power", "enumerate_structures", "satisfies", "ultrapower",
    "Base", "CumulativePower", "Func", "IndexFamily", "apply_operation", "level", "vartheta",
    "canonical_iso_direct", "canonical_iso_ultra", "quotient_by", "Ultra",
    "classify_formula", "is_direct_power_sentence", "is_horn", "weinstein_R",
]

__version__ = "0.1.0"

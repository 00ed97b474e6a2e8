"""Autocorrelation and diffraction of weighted Dirac combs with exact
quadratic-field coordinates."""
from .autocorr import Autocorrelation, autocorrelation, convergence_series, covering_set, order_check
from .comb import VanHoveSpec, WeightedComb, compare_combs, make_comb, restrict
from .cps import CPScheme, WeightFn, generate_model_comb, preset, tent, indicator
from .errors import BraggError, CapacityError, DomainError
from .exactnum import QuadValue, parse_quad, format_quad
from .spectrum import SpectrumEstimate, bragg_scan, decompose, gram_psd

__version__ = "0.1.0"

__all__ = [
    "Autocorrelation",
    "BraggError",
    "CPScheme",
    "CapacityError",
    "DomainError",
    "QuadValue",
    "SpectrumEstimate",
    "VanHoveSpec",
    "WeightFn",
    "WeightedComb",
    "autocorrelation",
    "bragg_scan",
    "compare_combs",
    "convergence_series",
    "covering_set",
    "decompose",
    "format_quad",
    "generate_model_comb",
    "gram_psd",
    "indicator",
    "make_comb",
    "order_check",
    "parse_quad",
    "preset",
    "restrict",
    "tent",
]

"""Multiple zeta values, multiple polylogarithms, the Ohno relation and its
reduction to F = G, Mellin transforms and the Landen connection formula."""

__version__ = "0.1.0"

from .errors import (ConvergenceError, DomainError, MZVError, ParseError, QuadratureError,
                     RankDeficient)
from .indices import (Composition, Index, PairComposition, dual, kappa, kappa_inv, normalize,
                      precedes, strictly_precedes)
from .series_eval import EvalConfig, TailCorrection, eval_mpl, eval_mzv, pole_coefficients
from .genfun import eval_f, eval_F, eval_g, eval_G
from .mellin import eval_Psi, forward_mellin, inverse_mellin
from .ohno import fit_reduction, verify_landen, verify_ohno, verify_reduced, verify_table

__all__ = [
    "ConvergenceError", "DomainError", "MZVError", "ParseError", "QuadratureError", "RankDeficient",
    "Composition", "Index", "PairComposition", "dual", "kappa", "kappa_inv", "normalize",
    "precedes", "strictly_precedes",
    "EvalConfig", "TailCorrection", "eval_mpl", "eval_mzv", "pole_coefficients",
    "eval_f", "eval_F", "eval_g", "eval_G",
    "eval_Psi", "forward_mellin", "inverse_mellin",
    "fit_reduction", "verify_landen", "verify_ohno", "verify_reduced", "verify_table",
]

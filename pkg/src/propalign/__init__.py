"""Population-proportional preference aggregation from pairwise comparisons."""

from .core import (
    GroupDecomposition,
    Policy,
    PreferenceMatrix,
    Profile,
    Ranking,
    ValidationError,
    decompose_groups,
    induce_preference,
    validate_preference,
)
from .rules import (
    Rule,
    borda_scores,
    f_beta,
    f_infinity,
    f_star,
    fit_bt,
    maximal_borda,
    maximal_lotteries,
    parse_rule,
    random_dictatorship,
    u_vector,
)

__version__ = "0.1.0"

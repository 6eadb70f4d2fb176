"""Distributed sequential fixed-size confidence sets for linear regression."""

from ._distseq import (
    GramState,
    RankDeficient,
    SetupError,
    UndefinedVariance,
    chi2_quantile,
    contains,
    d_optimal_score,
    divide_and_conquer,
    factorize_spd,
    fit,
    gen_clean,
    max_eig,
    min_eig,
    shrink,
    simulate,
    stopping_inequality,
)

__all__ = [
    "GramState",
    "RankDeficient",
    "SetupError",
    "UndefinedVariance",
    "chi2_quantile",
    "contains",
    "d_optimal_score",
    "divide_and_conquer",
    "factorize_spd",
    "fit",
    "gen_clean",
    "max_eig",
    "min_eig",
    "shrink",
    "simulate",
    "stopping_inequality",
]

"""Riemann-Hilbert solver and regularized WZNW action for Fuchsian systems."""

from ._rhwz import (
    AdmissibleRep,
    RhwzError,
    WeightSystem,
    __version__,
    action,
    bruhat,
    cholesky_minors,
    expected_dims,
    hypergeometric_target,
    in_large_cell,
    monodromy,
    rep_distance,
    solve,
    verify,
)

"""Python access to the memkernel solvers."""

from ._memkernel import (
    ESTIMATE_CONSTANT,
    ConfigError,
    Expr,
    Grid,
    MemkernelError,
    NoConvergence,
    ParseError,
    Problem,
    add_noise,
    check_compatibility,
    reconstruct,
    run,
    solve_direct,
    synthesize_f,
)

__all__ = [
    "ESTIMATE_CONSTANT",
    "ConfigError",
    "Expr",
    "Grid",
    "MemkernelError",
    "NoConvergence",
    "ParseError",
    "Problem",
    "add_noise",
    "check_compatibility",
    "reconstruct",
    "run",
    "solve_direct",
    "synthesize_f",
]

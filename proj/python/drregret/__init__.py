"""Distributionally robust regret-optimal measurement-feedback control.

Thin wrapper around the compiled extension. The heavy lifting (operator
lifting, factorizations, SDP synthesis, worst-case distributions, radius
sweeps) lives in the C++ core.
"""

try:
    from drregret._drregret import *  # noqa: F401,F403  (installed package)
except ImportError:
    from _drregret import *  # noqa: F401,F403  (build-tree layout)

__all__ = [
    "boeing747",
    "lift",
    "factorizations",
    "synthesize",
    "worst_case",
    "run_experiment",
    "export_dr_sdp",
    "run_fixed_gamma",
]

"""Mallows height library.

Exact and asymptotic laws of the height function of Mallows permutations,
an exact sampler and a verification harness, configured with Hydra.
"""

__version__ = "1.0.0"

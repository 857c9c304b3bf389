"""Pairwise entanglement of permutation-symmetric qubit states.

Tools for computing the concurrence of two-qubit marginals, the closed-form
spectral theory of the symmetric-state family, the maximization that yields
the tight ``2/N`` bound, and entangled-web constructions.
"""

__version__ = "0.1.0"

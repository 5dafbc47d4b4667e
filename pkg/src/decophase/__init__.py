"""Decoherence-induced phases of abelian topological orders.

Exact enumeration of symmetric Lagrangian subgroups of replicated
K-matrix theories, plus loop-model / Ising Monte Carlo / stabilizer
machinery for the toric-code decoherence transition.
"""

__version__ = "0.1.0"

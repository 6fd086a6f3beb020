"""Hybrid encryption in the correlated-randomness model.

Key encapsulation with information-theoretic security from correlated
source samples, one-time data encapsulation, their composition, and
combiners, together with an executable security-game harness.
"""

__version__ = "0.1.0"

"""Numerical toolkit for uniform entanglement-entropy bounds in the 1D
transverse-field Ising chain: exact diagonalization oracles, continuous-time
path-integral Monte Carlo, and a desk-scale polymer/cluster expansion with
its Kotecky-Preiss convergence check.
"""

from .fastpath import BACKEND
from .rng import make_rng

__all__ = ["BACKEND", "make_rng"]
__version__ = "0.1.0"

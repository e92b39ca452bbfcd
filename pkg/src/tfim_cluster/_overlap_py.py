"""Pure-numpy implementation of the trajectory overlap kernel.

This is the fallback backend; see fastpath.py for the selection logic and
_overlap_cy.pyx for the compiled twin.
"""

import numpy as np


def overlap_merged(init_x, flips_x, init_y, flips_y, t_lo, t_hi):
    """Exact integral of sigma_x(t)*sigma_y(t) over [t_lo, t_hi].

    Both trajectories are piecewise constant +-1 paths given by their value
    at t_lo and their sorted flip times inside the interval.  The integral
    is computed on the merged flip grid, so there is no quadrature error.
    """
    flips = np.concatenate((flips_x, flips_y))
    flips.sort(kind="stable")
    bounds = np.empty(flips.size + 2)
    bounds[0] = t_lo
    bounds[1:-1] = flips
    bounds[-1] = t_hi
    durations = np.diff(bounds)
    signs = np.ones(flips.size + 1)
    signs[1::2] = -1.0
    return init_x * init_y * float(np.dot(signs, durations))

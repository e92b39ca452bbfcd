"""Continuous-time spin-flip trajectories.

A trajectory is a piecewise-constant cadlag function t -> {-1,+1} on a
finite interval, stored as its value at the left endpoint plus the sorted
list of flip times.  The value at time t is initial * (-1)**(#flips <= t),
so a flip sitting exactly on a block boundary is already visible in the
value at that boundary (right-continuity).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .fastpath import overlap_merged

__all__ = [
    "Trajectory",
    "transition_kernel",
    "sample_stationary",
    "sample_bridge",
    "block_decompose",
    "recompose",
    "overlap_integral",
    "trajectory_to_json",
    "trajectory_from_json",
]

# below this value of h * length the bridge sampler switches from bisection
# to direct parity-constrained Poisson sampling
_BRIDGE_DIRECT_THRESHOLD = 1.0


@dataclass(frozen=True)
class Trajectory:
    """A +-1 valued cadlag path on [t_lo, t_hi] with finitely many flips."""

    t_lo: float
    t_hi: float
    initial: int
    flips: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        if self.t_hi <= self.t_lo:
            raise ValueError("degenerate interval")
        if self.initial not in (-1, 1):
            raise ValueError("initial value must be +-1")
        flips = self.flips
        if not (isinstance(flips, np.ndarray) and flips.dtype == np.float64):
            flips = np.asarray(flips, dtype=float)
            object.__setattr__(self, "flips", flips)
        if flips.size:
            if flips.size > 1 and not (flips[1:] > flips[:-1]).all():
                raise ValueError("flip times must be strictly increasing")
            if flips[0] <= self.t_lo or flips[-1] > self.t_hi:
                raise ValueError("flip times must lie in (t_lo, t_hi]")

    @property
    def length(self):
        return self.t_hi - self.t_lo

    def value_at(self, t):
        """Value at time t (right-continuous)."""
        if not self.t_lo <= t <= self.t_hi:
            raise ValueError("time outside the trajectory interval")
        k = int(np.searchsorted(self.flips, t, side="right"))
        return self.initial * (-1) ** k

    @property
    def final(self):
        return self.initial * (-1) ** int(self.flips.size)

    def negated(self):
        return Trajectory(self.t_lo, self.t_hi, -self.initial, self.flips.copy())

    def shifted(self, dt):
        return Trajectory(self.t_lo + dt, self.t_hi + dt, self.initial,
                          self.flips + dt)

    def restricted(self, t_lo, t_hi):
        """Restriction to a subinterval [t_lo, t_hi]."""
        if t_lo < self.t_lo or t_hi > self.t_hi or t_hi <= t_lo:
            raise ValueError("not a subinterval")
        lo = int(np.searchsorted(self.flips, t_lo, side="right"))
        hi = int(np.searchsorted(self.flips, t_hi, side="right"))
        return Trajectory(t_lo, t_hi, self.initial * (-1) ** lo,
                          self.flips[lo:hi].copy())


def transition_kernel(eta, eta_prime, dt, h):
    """P(sigma(s+dt) = eta_prime | sigma(s) = eta) for the rate-h flip process."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if h <= 0:
        raise ValueError("h must be positive")
    if eta not in (-1, 1) or eta_prime not in (-1, 1):
        raise ValueError("spin values must be +-1")
    return 0.5 * (1.0 + eta_prime * eta * math.exp(-2.0 * h * dt))


def _poisson_flip_times(h, t_lo, t_hi, rng, n=None):
    if n is None:
        n = rng.poisson(h * (t_hi - t_lo))
    times = rng.uniform(t_lo, t_hi, size=n)
    times.sort()
    # ties have probability zero; regenerate defensively if they occur
    while n > 1 and not (times[1:] > times[:-1]).all():
        times = rng.uniform(t_lo, t_hi, size=n)
        times.sort()
    return times


def sample_stationary(h, interval, rng, initial=None):
    """Draw a trajectory of the stationary rate-h spin-flip process.

    The initial value is uniform on +-1 unless given explicitly (giving it
    yields the process conditioned on its left endpoint).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    t_lo, t_hi = interval
    if initial is None:
        initial = 1 if rng.random() < 0.5 else -1
    return Trajectory(t_lo, t_hi, initial, _poisson_flip_times(h, t_lo, t_hi, rng))


_parity_pmf_cache = {}


def _sample_parity_count(lam, parity, rng):
    """Sample N ~ Poisson(lam) conditioned on N = parity (mod 2)."""
    if lam == 0:
        if parity == 1:
            raise ValueError("cannot sample odd flip count at rate 0")
        return 0
    key = (lam, parity)
    cached = _parity_pmf_cache.get(key)
    if cached is None:
        # explicit pmf over the parity class; lam is small here so the tail
        # truncation is far beyond machine precision
        n_max = max(20, int(lam + 12 * math.sqrt(lam + 1.0)))
        ns = np.arange(parity, n_max + 1, 2)
        logs = ns * math.log(lam) - gammaln(ns + 1.0)
        w = np.exp(logs - logs.max())
        cdf = np.cumsum(w / w.sum())
        if len(_parity_pmf_cache) > 4096:
            _parity_pmf_cache.clear()
        cached = _parity_pmf_cache[key] = (ns, cdf)
    ns, cdf = cached
    return int(ns[np.searchsorted(cdf, rng.random())])


def sample_bridge(eta_lo, eta_hi, interval, h, rng):
    """Conditioned trajectory with prescribed endpoint values.

    The law is the stationary process conditioned on sigma(t_lo) = eta_lo
    and sigma(t_hi) = eta_hi, realised by recursive bisection: the midpoint
    value is drawn from the two-step kernel composition, and segments with
    small h * length fall through to direct parity-constrained Poisson
    sampling.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    t_lo, t_hi = interval
    if t_hi <= t_lo:
        raise ValueError("degenerate interval")
    flips = _bridge_flips(eta_lo, eta_hi, t_lo, t_hi, h, rng)
    return Trajectory(t_lo, t_hi, eta_lo, np.asarray(flips))


def _bridge_flips(eta_lo, eta_hi, t_lo, t_hi, h, rng):
    length = t_hi - t_lo
    if h * length <= _BRIDGE_DIRECT_THRESHOLD:
        parity = 0 if eta_lo == eta_hi else 1
        n = _sample_parity_count(h * length, parity, rng)
        return list(_poisson_flip_times(h, t_lo, t_hi, rng, n=n))
    t_mid = 0.5 * (t_lo + t_hi)
    q_left = math.exp(-2.0 * h * (t_mid - t_lo))
    q_right = math.exp(-2.0 * h * (t_hi - t_mid))
    w_plus = (1.0 + eta_lo * q_left) * (1.0 + eta_hi * q_right)
    w_minus = (1.0 - eta_lo * q_left) * (1.0 - eta_hi * q_right)
    eta_mid = 1 if rng.random() * (w_plus + w_minus) < w_plus else -1
    left = _bridge_flips(eta_lo, eta_mid, t_lo, t_mid, h, rng)
    right = _bridge_flips(eta_mid, eta_hi, t_mid, t_hi, h, rng)
    return left + right


def block_decompose(traj, delta):
    """Cut a trajectory into consecutive blocks of duration delta.

    Each block is returned on the local interval [0, delta]; consecutive
    blocks satisfy block[k].final == block[k+1].initial.
    """
    n = traj.length / delta
    n_blocks = int(round(n))
    if abs(n - n_blocks) > 1e-9 or n_blocks < 1:
        raise ValueError("interval length is not a multiple of delta")
    blocks = []
    value = traj.initial
    for k in range(n_blocks):
        lo = traj.t_lo + k * delta
        hi = traj.t_lo + (k + 1) * delta
        i = int(np.searchsorted(traj.flips, lo, side="right"))
        j = int(np.searchsorted(traj.flips, hi, side="right")) if k < n_blocks - 1 \
            else traj.flips.size
        block = Trajectory(0.0, delta, value, traj.flips[i:j] - lo)
        blocks.append(block)
        value = block.final
    return blocks


def recompose(blocks, t_lo=0.0):
    """Inverse of block_decompose (up to the global time origin)."""
    if not blocks:
        raise ValueError("no blocks")
    delta = blocks[0].length
    flips = []
    value = blocks[0].initial
    for k, block in enumerate(blocks):
        if abs(block.length - delta) > 1e-12:
            raise ValueError("blocks have unequal durations")
        if block.initial != value:
            raise ValueError("blocks violate the gluing condition")
        flips.append(block.flips + (t_lo + k * delta))
        value = block.final
    return Trajectory(t_lo, t_lo + len(blocks) * delta, blocks[0].initial,
                      np.concatenate(flips))


def overlap_integral(traj_x, traj_y, subinterval=None):
    """Exact value of int sigma_x(t) sigma_y(t) dt over the subinterval."""
    if subinterval is None:
        a, b = max(traj_x.t_lo, traj_y.t_lo), min(traj_x.t_hi, traj_y.t_hi)
        if (a, b) != (traj_x.t_lo, traj_x.t_hi) or (a, b) != (traj_y.t_lo, traj_y.t_hi):
            raise ValueError("trajectory intervals differ; pass subinterval explicitly")
    else:
        a, b = subinterval
        if (a < traj_x.t_lo or b > traj_x.t_hi or a < traj_y.t_lo
                or b > traj_y.t_hi or b <= a):
            raise ValueError("subinterval not covered by both trajectories")
    fx, fy = traj_x.flips, traj_y.flips
    ix = int(np.searchsorted(fx, a, side="right"))
    jx = int(np.searchsorted(fx, b, side="left"))
    iy = int(np.searchsorted(fy, a, side="right"))
    jy = int(np.searchsorted(fy, b, side="left"))
    init_x = traj_x.initial * (-1) ** ix
    init_y = traj_y.initial * (-1) ** iy
    return overlap_merged(float(init_x), fx[ix:jx], float(init_y), fy[iy:jy],
                          a, b)


def trajectory_to_json(traj):
    """JSON-safe dict; flip times as decimal strings for exact round trips."""
    return {
        "t_lo": repr(float(traj.t_lo)),
        "t_hi": repr(float(traj.t_hi)),
        "initial": int(traj.initial),
        "flips": [repr(float(t)) for t in traj.flips],
    }


def trajectory_from_json(data):
    return Trajectory(
        float(data["t_lo"]),
        float(data["t_hi"]),
        int(data["initial"]),
        np.array([float(s) for s in data["flips"]]),
    )

"""Path-integral Gibbs measure over spin lines and its Monte Carlo sampler.

A configuration assigns to each site x in Lambda a +-1 trajectory on
[-beta/2, beta/2].  Relative to the free product of spin-flip processes the
Gibbs density is exp(J * sum_bonds int sigma_x sigma_y dt), with time
boundary conditions (fixed endpoint values, periodic, or free) imposed as
hard constraints on the trajectories.

Sampling is independence Metropolis per site: a proposal redraws one site's
line from the free, boundary-respecting measure and is accepted with
probability min(1, exp(Delta)) where Delta is the change of the overlap
energy against the current neighbor lines.  At J=0 every proposal is
accepted and the chain samples the product measure exactly.  For J > 0 the
full-line proposals are interleaved with window moves that redraw a bridge
on a random subinterval with the endpoint values held fixed; these have a
much higher acceptance rate when beta * J is large and shorten the
autocorrelation time without changing the stationary measure.  A global
spin-flip move (negating every line at once, exact symmetry of the energy
unless frozen exterior lines are present) removes the slowly mixing overall
sign of the configuration; it is skipped under fixed time boundary
conditions, which it would violate.

The slit variant used for reduced-density matrix elements doubles the
time-0 point of the block sites: a block line consists of an upper piece on
[0, beta/2] and a lower piece on [-beta/2, 0] that are glued at the outer
ends (periodically) but free at time 0.  The matrix element at (eps_plus,
eps_minus) is the probability of observing those time-0 values on the two
sides of the cut, normalized so the diagonal sums to one.
"""

import math
from dataclasses import dataclass

import numpy as np

from .trajectories import (Trajectory, overlap_integral, sample_bridge,
                           sample_stationary)

__all__ = [
    "GibbsParams",
    "ObservableEstimate",
    "MatrixEstimate",
    "BoundaryViolation",
    "log_relative_density",
    "mc_sample",
    "estimate_time_zero_observable",
    "mc_reduced_density",
    "mc_slit_samples",
]


class BoundaryViolation(ValueError):
    """A configuration violates the requested boundary conditions."""


@dataclass(frozen=True)
class GibbsParams:
    J: float
    h: float
    beta: float
    lam: tuple
    bc_time: tuple = ("periodic",)
    bc_space: tuple = ("free",)

    def __post_init__(self):
        if self.J < 0:
            raise ValueError("J must be nonnegative (ferromagnetic)")
        if self.h <= 0 or self.beta <= 0:
            raise ValueError("h and beta must be positive")
        lam = tuple(sorted(int(x) for x in self.lam))
        if not lam or lam != tuple(range(lam[0], lam[-1] + 1)):
            raise ValueError("lambda must be a nonempty contiguous interval")
        object.__setattr__(self, "lam", lam)
        kind = self.bc_time[0]
        if kind not in ("fixed", "periodic", "free"):
            raise ValueError("unknown time boundary condition")
        if kind == "fixed":
            xi_plus = _normalize_spins(self.bc_time[1], lam)
            xi_minus = _normalize_spins(self.bc_time[2], lam)
            object.__setattr__(self, "bc_time", ("fixed", xi_plus, xi_minus))
        if self.bc_space[0] not in ("free", "fixed"):
            raise ValueError("unknown spatial boundary condition")

    @property
    def interval(self):
        return (-0.5 * self.beta, 0.5 * self.beta)


def _normalize_spins(xi, lam):
    if isinstance(xi, dict):
        vals = {int(x): int(v) for x, v in xi.items()}
    else:
        vals = {x: int(v) for x, v in zip(lam, xi)}
    if set(vals) != set(lam) or any(v not in (-1, 1) for v in vals.values()):
        raise ValueError("fixed boundary values must give +-1 for every site")
    return tuple(vals[x] for x in lam)


def _exterior_lines(params):
    if params.bc_space[0] != "fixed":
        return {}
    eta = dict(params.bc_space[1])
    lo, hi = params.lam[0] - 1, params.lam[-1] + 1
    if not set(eta) <= {lo, hi}:
        raise ValueError("exterior lines must sit at the two adjacent columns")
    return eta


def propose_line(params, x, rng):
    """Fresh line for site x from the free boundary-respecting measure."""
    t_lo, t_hi = params.interval
    kind = params.bc_time[0]
    if kind == "free":
        return sample_stationary(params.h, (t_lo, t_hi), rng)
    if kind == "periodic":
        v = 1 if rng.random() < 0.5 else -1
        return sample_bridge(v, v, (t_lo, t_hi), params.h, rng)
    xi_plus, xi_minus = params.bc_time[1], params.bc_time[2]
    i = params.lam.index(x)
    return sample_bridge(xi_minus[i], xi_plus[i], (t_lo, t_hi), params.h, rng)


def _check_boundary(config, params):
    t_lo, t_hi = params.interval
    kind = params.bc_time[0]
    for i, x in enumerate(params.lam):
        traj = config[x]
        if (traj.t_lo, traj.t_hi) != (t_lo, t_hi):
            raise BoundaryViolation("trajectory interval mismatch at site %d" % x)
        if kind == "periodic" and traj.initial != traj.final:
            raise BoundaryViolation("periodic condition violated at site %d" % x)
        if kind == "fixed":
            if traj.initial != params.bc_time[2][i] or traj.final != params.bc_time[1][i]:
                raise BoundaryViolation("fixed endpoints violated at site %d" % x)


def log_relative_density(config, params):
    """Log Gibbs density of a configuration w.r.t. the free product measure."""
    _check_boundary(config, params)
    total = 0.0
    for x, y in zip(params.lam[:-1], params.lam[1:]):
        total += overlap_integral(config[x], config[y])
    for x, line in _exterior_lines(params).items():
        inside = x + 1 if x < params.lam[0] else x - 1
        total += overlap_integral(config[inside], line, params.interval)
    return params.J * total


def _site_energy(config, params, x, line, exterior):
    """Overlap energy (without J) of `line` at site x against its neighbors."""
    total = 0.0
    for y in (x - 1, x + 1):
        if y in config and y != x:
            total += overlap_integral(line, config[y])
        elif y in exterior:
            total += overlap_integral(line, exterior[y], params.interval)
    return total


def _window_energy(config, params, x, line, exterior, window):
    """Overlap energy of `line` against its neighbors restricted to window."""
    total = 0.0
    for y in (x - 1, x + 1):
        if y in config and y != x:
            total += overlap_integral(line, config[y], window)
        elif y in exterior:
            total += overlap_integral(line, exterior[y], window)
    return total


def _window_resample(traj, window, h, rng):
    """Redraw traj on (a, b] as a bridge between its current values there."""
    a, b = window
    bridge = sample_bridge(traj.value_at(a), traj.value_at(b), (a, b), h, rng)
    flips = traj.flips
    new_flips = np.concatenate(
        [flips[flips <= a], bridge.flips, flips[flips > b]])
    return Trajectory(traj.t_lo, traj.t_hi, traj.initial, new_flips)


def mc_sample(params, n_sweeps, n_burn_in, rng, stats=None):
    """Generator over post-burn-in configurations (dict site -> Trajectory)."""
    if n_sweeps <= n_burn_in:
        raise ValueError("need n_sweeps > n_burn_in")
    exterior = _exterior_lines(params)
    config = {x: propose_line(params, x, rng) for x in params.lam}
    t_lo, _ = params.interval
    if params.J > 0:
        window_len = min(params.beta, 1.0 / params.J)
        n_windows = int(round(params.beta / window_len))
    else:
        n_windows = 0
    accepted = proposed = 0
    for sweep in range(n_sweeps):
        for x in params.lam:
            new = propose_line(params, x, rng)
            delta = params.J * (_site_energy(config, params, x, new, exterior)
                                - _site_energy(config, params, x, config[x], exterior))
            proposed += 1
            if delta >= 0 or rng.random() < math.exp(delta):
                config[x] = new
                accepted += 1
            for _ in range(n_windows):
                a = t_lo + rng.random() * (params.beta - window_len)
                window = (a, a + window_len)
                cur = config[x]
                new = _window_resample(cur, window, params.h, rng)
                delta = params.J * (
                    _window_energy(config, params, x, new, exterior, window)
                    - _window_energy(config, params, x, cur, exterior, window))
                if delta >= 0 or rng.random() < math.exp(delta):
                    config[x] = new
        if params.bc_time[0] != "fixed" and rng.random() < 0.5:
            # global flip: pair overlaps inside lambda are invariant, only
            # the coupling to frozen exterior lines changes sign
            delta = 0.0
            for y, line in exterior.items():
                inside = y + 1 if y < params.lam[0] else y - 1
                delta -= 2.0 * params.J * overlap_integral(
                    config[inside], line, params.interval)
            if delta >= 0 or rng.random() < math.exp(delta):
                config = {x: traj.negated() for x, traj in config.items()}
        if sweep >= n_burn_in:
            yield dict(config)
    if stats is not None:
        stats["proposed"] = proposed
        stats["accepted"] = accepted


@dataclass(frozen=True)
class ObservableEstimate:
    mean: float
    std_error: float
    n_samples: int
    integrated_autocorrelation_time: float


def _batch_estimate(values, n_batches=50):
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 100:
        raise ValueError("need at least 100 samples for batch-mean errors")
    bs = n // n_batches
    used = values[n - n_batches * bs:]
    batches = used.reshape(n_batches, bs).mean(axis=1)
    mean = float(used.mean())
    se = float(batches.std(ddof=1) / np.sqrt(n_batches))
    var = float(used.var(ddof=1))
    tau = 0.5 if var == 0 else max(0.5, se**2 * used.size / (2.0 * var))
    return ObservableEstimate(mean, se, int(used.size), tau)


def estimate_time_zero_observable(samples, f, n_batches=50):
    """Batch-mean estimate of E[f(sigma_Lambda(0))] over a sample stream.

    `f` receives a dict mapping each site to its +-1 value at time 0.
    """
    values = [float(f({x: traj.value_at(0.0) for x, traj in config.items()}))
              for config in samples]
    if not values:
        raise ValueError("empty sample stream")
    return _batch_estimate(values, n_batches)


# ---------------------------------------------------------------------------
# slit-box sampler for reduced-density matrix elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _CutLine:
    """Block-site line cut open at time 0."""

    upper: Trajectory   # on [0, beta/2]; value at 0 is eps_plus
    lower: Trajectory   # on [-beta/2, 0]; value at 0 is eps_minus


def _propose_cut_line(params, x, rng):
    half = 0.5 * params.beta
    kind = params.bc_time[0]
    if kind == "periodic":
        # one stationary line on the circle of circumference beta, cut at 0
        circ = sample_stationary(params.h, (0.0, params.beta), rng)
        return _CutLine(upper=circ.restricted(0.0, half),
                        lower=circ.restricted(half, params.beta).shifted(-params.beta))
    if kind == "free":
        return _CutLine(upper=sample_stationary(params.h, (0.0, half), rng),
                        lower=sample_stationary(params.h, (-half, 0.0), rng))
    xi_plus, xi_minus = params.bc_time[1], params.bc_time[2]
    i = params.lam.index(x)
    # upper piece conditioned at its far end: draw flips, then set the
    # initial value so the trajectory hits xi_plus at beta/2
    flips = sample_stationary(params.h, (0.0, half), rng).flips
    init = xi_plus[i] * (-1) ** int(flips.size)
    upper = Trajectory(0.0, half, init, flips)
    lower = sample_stationary(params.h, (-half, 0.0), rng,
                              initial=xi_minus[i])
    return _CutLine(upper=upper, lower=lower)


def _pair_overlap(a, b, params):
    half = 0.5 * params.beta
    cut_a, cut_b = isinstance(a, _CutLine), isinstance(b, _CutLine)
    if not cut_a and not cut_b:
        return overlap_integral(a, b)
    if cut_a and cut_b:
        return (overlap_integral(a.upper, b.upper)
                + overlap_integral(a.lower, b.lower))
    cut, plain = (a, b) if cut_a else (b, a)
    return (overlap_integral(cut.upper, plain, (0.0, half))
            + overlap_integral(cut.lower, plain, (-half, 0.0)))


def mc_slit_samples(params, block, n_sweeps, n_burn_in, rng, stats=None):
    """Sample stream of (eps_plus, eps_minus) block values across the slit.

    Yields pairs of tuples holding the +-1 values of the block sites just
    above and just below the time-0 cut.
    """
    block = tuple(sorted(int(x) for x in block))
    if not set(block) <= set(params.lam):
        raise ValueError("block must lie inside lambda")
    if block != tuple(range(block[0], block[-1] + 1)):
        raise ValueError("block must be contiguous")
    if n_sweeps <= n_burn_in:
        raise ValueError("need n_sweeps > n_burn_in")
    exterior = _exterior_lines(params)
    in_block = set(block)

    def propose(x):
        if x in in_block:
            return _propose_cut_line(params, x, rng)
        return propose_line(params, x, rng)

    config = {x: propose(x) for x in params.lam}
    accepted = proposed = 0
    for sweep in range(n_sweeps):
        for x in params.lam:
            new = propose(x)
            old_e = _slit_site_energy(config, params, x, config[x], exterior)
            new_e = _slit_site_energy(config, params, x, new, exterior)
            delta = params.J * (new_e - old_e)
            proposed += 1
            if delta >= 0 or rng.random() < math.exp(delta):
                config[x] = new
                accepted += 1
        if sweep >= n_burn_in:
            eps_plus = tuple(config[x].upper.value_at(0.0) for x in block)
            eps_minus = tuple(config[x].lower.final for x in block)
            yield eps_plus, eps_minus
    if stats is not None:
        stats["proposed"] = proposed
        stats["accepted"] = accepted


def _slit_site_energy(config, params, x, line, exterior):
    total = 0.0
    for y in (x - 1, x + 1):
        if y in config and y != x:
            total += _pair_overlap(line, config[y], params)
        elif y in exterior:
            total += _pair_overlap(line, exterior[y], params)
    return total


@dataclass(frozen=True)
class MatrixEstimate:
    """Entrywise mean/std-error matrices plus cell sample counts."""

    mean: np.ndarray
    std_error: np.ndarray
    counts: np.ndarray
    n_samples: int

    @property
    def undersampled(self):
        return self.counts < 10


def _spins_to_index(spins):
    idx = 0
    for v in spins:
        idx = 2 * idx + (0 if v == 1 else 1)
    return idx


def mc_reduced_density(params, block, n_sweeps, rng, n_burn_in=None,
                       n_batches=50):
    """Estimated reduced-density matrix elements across the time-0 slit.

    Entry (i, j) estimates the probability of block values (eps_plus,
    eps_minus) with spins encoded big-endian (+1 -> bit 0), normalized so
    the diagonal sums to 1.  Standard errors are propagated from batch
    means of the indicator counts.
    """
    block = tuple(sorted(int(x) for x in block))
    if len(block) > 3:
        raise ValueError("block too large to estimate all matrix elements")
    if n_burn_in is None:
        n_burn_in = max(1, n_sweeps // 5)
    dim = 2 ** len(block)
    pairs = np.fromiter(
        ((_spins_to_index(ep) * dim + _spins_to_index(em))
         for ep, em in mc_slit_samples(params, block, n_sweeps, n_burn_in, rng)),
        dtype=np.int64)
    n = pairs.size
    if n < 100:
        raise ValueError("too few post-burn-in samples")
    bs = n // n_batches
    used = pairs[n - n_batches * bs:]
    counts = np.bincount(used, minlength=dim * dim).reshape(dim, dim)
    # per-batch cell frequencies for error propagation
    batch_freq = np.stack([
        np.bincount(used[b * bs:(b + 1) * bs], minlength=dim * dim)
        .reshape(dim, dim) / bs
        for b in range(n_batches)])
    freq = counts / used.size
    diag = float(np.trace(freq))
    if diag <= 0:
        raise ValueError("no diagonal events observed; cannot normalize")
    batch_diag = np.einsum("bii->b", batch_freq)
    good = batch_diag > 0
    if good.sum() < 2:
        raise ValueError("undersampled diagonal; increase n_sweeps")
    batch_ratio = batch_freq[good] / batch_diag[good, None, None]
    se = batch_ratio.std(axis=0, ddof=1) / np.sqrt(good.sum())
    return MatrixEstimate(mean=freq / diag, std_error=se,
                          counts=counts, n_samples=int(used.size))

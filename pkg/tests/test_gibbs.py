import math

import numpy as np
import pytest

from tfim_cluster import gibbs, make_rng
from tfim_cluster.gibbs import (BoundaryViolation, GibbsParams,
                                estimate_time_zero_observable,
                                log_relative_density, mc_reduced_density,
                                mc_sample, mc_slit_samples)
from tfim_cluster.quantum import (build_hamiltonian, sigma3_site,
                                  thermal_density, thermal_expectation)
from tfim_cluster.trajectories import Trajectory, overlap_integral

np_empty = np.empty(0)


def _const_line(beta, value):
    return Trajectory(-0.5 * beta, 0.5 * beta, value, np_empty)


# ---------------------------------------------------------------- density

def test_log_density_constant_lines():
    beta, J = 2.0, 1.3
    p = GibbsParams(J=J, h=1.0, beta=beta, lam=(0, 1), bc_time=("free",))
    aligned = {0: _const_line(beta, 1), 1: _const_line(beta, 1)}
    opposed = {0: _const_line(beta, 1), 1: _const_line(beta, -1)}
    assert log_relative_density(aligned, p) == pytest.approx(J * beta,
                                                             abs=1e-12)
    assert log_relative_density(opposed, p) == pytest.approx(-J * beta,
                                                             abs=1e-12)


def test_log_density_matches_metropolis_ratio():
    # the acceptance ratio used by the sampler must equal the true density
    # ratio of the two configurations
    beta = 2.0
    p = GibbsParams(J=0.7, h=1.0, beta=beta, lam=(0, 1), bc_time=("free",))
    rng = make_rng(3)
    lines = [gibbs.propose_line(p, 0, rng) for _ in range(4)]
    c1 = {0: lines[0], 1: lines[1]}
    c2 = {0: lines[2], 1: lines[1]}
    direct = log_relative_density(c2, p) - log_relative_density(c1, p)
    by_overlap = p.J * (overlap_integral(lines[2], lines[1])
                        - overlap_integral(lines[0], lines[1]))
    assert direct == pytest.approx(by_overlap, abs=1e-12)


def test_boundary_violations():
    beta = 2.0
    p_per = GibbsParams(J=1.0, h=1.0, beta=beta, lam=(0,),
                        bc_time=("periodic",))
    odd = Trajectory(-1.0, 1.0, 1, np.array([0.0]))
    with pytest.raises(BoundaryViolation):
        log_relative_density({0: odd}, p_per)
    p_fix = GibbsParams(J=1.0, h=1.0, beta=beta, lam=(0,),
                        bc_time=("fixed", [1], [1]))
    with pytest.raises(BoundaryViolation):
        log_relative_density({0: odd}, p_fix)
    p_free = GibbsParams(J=1.0, h=1.0, beta=beta, lam=(0,),
                         bc_time=("free",))
    wrong_interval = Trajectory(0.0, beta, 1, np_empty)
    with pytest.raises(BoundaryViolation):
        log_relative_density({0: wrong_interval}, p_free)


def test_params_validation():
    with pytest.raises(ValueError):
        GibbsParams(J=-1.0, h=1.0, beta=1.0, lam=(0,))
    with pytest.raises(ValueError):
        GibbsParams(J=1.0, h=0.0, beta=1.0, lam=(0,))
    with pytest.raises(ValueError):
        GibbsParams(J=1.0, h=1.0, beta=1.0, lam=(0, 2))
    with pytest.raises(ValueError):
        GibbsParams(J=1.0, h=1.0, beta=1.0, lam=(0,),
                    bc_time=("fixed", [2], [1]))


def test_proposals_respect_boundary_conditions():
    rng = make_rng(8)
    beta = 2.0
    for bc in (("free",), ("periodic",), ("fixed", [1, -1], [-1, 1])):
        p = GibbsParams(J=1.0, h=2.0, beta=beta, lam=(0, 1), bc_time=bc)
        for x in (0, 1):
            for _ in range(20):
                log_relative_density({0: gibbs.propose_line(p, 0, rng),
                                      1: gibbs.propose_line(p, 1, rng)}, p)


# ---------------------------------------------------------------- sampler

def test_j_zero_product_measure():
    p = GibbsParams(J=0.0, h=1.0, beta=2.0, lam=(0, 1), bc_time=("free",))
    stats = {}
    samples = list(mc_sample(p, 2000, 100, make_rng(21), stats=stats))
    assert stats["accepted"] == stats["proposed"]
    est = estimate_time_zero_observable(samples, lambda s: s[0] * s[1])
    # independent symmetric spins: zero correlation
    assert abs(est.mean) <= 4 * est.std_error + 1e-12


def test_seed_determinism():
    p = GibbsParams(J=1.0, h=1.0, beta=2.0, lam=(0, 1))
    f = lambda s: s[0] * s[1]
    a = estimate_time_zero_observable(
        list(mc_sample(p, 800, 100, make_rng(5, stream=1))), f)
    b = estimate_time_zero_observable(
        list(mc_sample(p, 800, 100, make_rng(5, stream=1))), f)
    c = estimate_time_zero_observable(
        list(mc_sample(p, 800, 100, make_rng(5, stream=2))), f)
    assert a == b
    assert a.mean != c.mean


def test_correlation_increases_with_coupling():
    h, beta = 1.0, 2.0
    f = lambda s: s[0] * s[1]
    means = []
    for i, J in enumerate((0.5, 2.0)):
        p = GibbsParams(J=J, h=h, beta=beta, lam=(0, 1))
        est = estimate_time_zero_observable(
            list(mc_sample(p, 4000, 400, make_rng(31, stream=i))), f)
        means.append((est.mean, est.std_error))
    assert means[1][0] > means[0][0] + 4 * (means[0][1] + means[1][1])


def test_mc_matches_ed_correlator():
    J, h, beta, n = 1.0, 2.0, 2.0, 2
    p = GibbsParams(J=J, h=h, beta=beta, lam=tuple(range(n)))
    est = estimate_time_zero_observable(
        list(mc_sample(p, 6000, 600, make_rng(13))), lambda s: s[0] * s[1])
    H = build_hamiltonian(n, J, h)
    ed = thermal_expectation(H, beta, sigma3_site(0, n) @ sigma3_site(1, n))
    assert abs(est.mean - ed) <= 4 * est.std_error


def test_sampler_validation():
    p = GibbsParams(J=1.0, h=1.0, beta=2.0, lam=(0,))
    with pytest.raises(ValueError):
        list(mc_sample(p, 100, 100, make_rng(0)))
    with pytest.raises(ValueError):
        estimate_time_zero_observable([], lambda s: 1.0)
    with pytest.raises(ValueError):
        gibbs._batch_estimate([1.0] * 99)


# ---------------------------------------------------------------- slit

def test_slit_single_site_matches_thermal_density():
    J, h, beta = 1.0, 2.0, 2.0
    p = GibbsParams(J=J, h=h, beta=beta, lam=(0, 1), bc_time=("periodic",))
    est = mc_reduced_density(p, (0,), 8000, make_rng(41))
    rho_ed = thermal_density(build_hamiltonian(2, J, h), beta)
    red = np.zeros((2, 2))
    full = rho_ed.reshape(2, 2, 2, 2)
    for k in range(2):
        red += full[:, k, :, k]
    assert est.mean.shape == (2, 2)
    assert np.trace(est.mean) == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diag(est.mean) >= 0)
    assert np.allclose(est.mean, est.mean.T,
                       atol=4 * (est.std_error + est.std_error.T).max())
    dev = np.abs(est.mean - red)
    assert np.all(dev <= 4 * est.std_error + 1e-12)


def test_slit_full_block_matches_thermal_matrix():
    J, h, beta = 1.0, 2.0, 2.0
    p = GibbsParams(J=J, h=h, beta=beta, lam=(0, 1), bc_time=("periodic",))
    est = mc_reduced_density(p, (0, 1), 12000, make_rng(43))
    rho_ed = thermal_density(build_hamiltonian(2, J, h), beta)
    dev = np.abs(est.mean - rho_ed)
    checked = ~est.undersampled
    assert checked.sum() >= 8
    assert np.all(dev[checked] <= 4 * est.std_error[checked] + 1e-12)


def test_slit_sample_stream_shapes():
    p = GibbsParams(J=1.0, h=1.0, beta=2.0, lam=(0, 1, 2),
                    bc_time=("periodic",))
    for ep, em in mc_slit_samples(p, (1, 2), 30, 10, make_rng(2)):
        assert len(ep) == 2 and len(em) == 2
        assert set(ep) <= {-1, 1} and set(em) <= {-1, 1}
    with pytest.raises(ValueError):
        next(mc_slit_samples(p, (0, 2), 10, 1, make_rng(0)))
    with pytest.raises(ValueError):
        next(mc_slit_samples(p, (5,), 10, 1, make_rng(0)))

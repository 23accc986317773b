import numpy as np
import pytest
from scipy import stats

from spdelab import GridSpec, NoiseGrid, noise_mass, sample_noise
from spdelab.errors import ConfigurationError


def test_determinism_same_key():
    spec = GridSpec(L=1.0, T=0.5, nx=16, nt=32)
    a = sample_noise(spec, seed=7, replicate=0)
    b = sample_noise(spec, seed=7, replicate=0)
    assert np.array_equal(a.increments, b.increments)


def test_distinct_keys_differ():
    spec = GridSpec(L=1.0, T=0.5, nx=16, nt=32)
    a = sample_noise(spec, seed=7, replicate=0)
    assert not np.array_equal(a.increments, sample_noise(spec, 7, 1).increments)
    assert not np.array_equal(a.increments, sample_noise(spec, 8, 0).increments)


def test_increments_read_only():
    spec = GridSpec(L=1.0, T=0.5, nx=8, nt=4)
    g = sample_noise(spec, seed=1)
    with pytest.raises(ValueError):
        g.increments[0, 0] = 1.0


def test_cell_variance_matches_cell_area():
    # dt*dx = 0.001; sample variance over 1e6 cells within 3 standard errors
    spec = GridSpec(L=10.0, T=10.0, nx=100, nt=1000)
    assert abs(spec.dx - 0.1) < 1e-15 and abs(spec.dt - 0.01) < 1e-15
    g = sample_noise(spec, seed=11)
    v = float(np.var(g.increments))
    n = g.increments.size
    se = 0.001 * np.sqrt(2.0 / (n - 1))
    assert abs(v - 0.001) <= 3 * se


def test_cell_variance_chi_square_one_percent():
    spec = GridSpec(L=10.0, T=10.0, nx=100, nt=1000)
    g = sample_noise(spec, seed=5)
    q = float(np.sum(g.increments**2) / (spec.dt * spec.dx))
    n = g.increments.size
    assert stats.chi2.ppf(0.005, n) <= q <= stats.chi2.ppf(0.995, n)


def test_replicates_uncorrelated():
    spec = GridSpec(L=1.0, T=1.0, nx=100, nt=1000)
    a = sample_noise(spec, seed=3, replicate=0).increments.ravel()
    b = sample_noise(spec, seed=3, replicate=1).increments.ravel()
    r = float(np.corrcoef(a, b)[0, 1])
    assert abs(r) <= 3.0 / np.sqrt(a.size)


def test_disjoint_cells_uncorrelated():
    spec = GridSpec(L=1.0, T=1.0, nx=200, nt=1000)
    w = sample_noise(spec, seed=9).increments
    r1 = float(np.corrcoef(w[:, :-1].ravel(), w[:, 1:].ravel())[0, 1])
    r2 = float(np.corrcoef(w[:-1].ravel(), w[1:].ravel())[0, 1])
    n = w[:, :-1].size
    assert abs(r1) <= 3.0 / np.sqrt(n)
    assert abs(r2) <= 3.0 / np.sqrt(n)


def test_mass_distribution_unit_square():
    # L = T = 1: mass ~ Normal(0, 1); sample variance within 5% over 1e4 reps
    spec = GridSpec(L=1.0, T=1.0, nx=4, nt=4)
    masses = np.array([noise_mass(sample_noise(spec, seed=21, replicate=r))
                       for r in range(10_000)])
    assert abs(np.var(masses) - 1.0) <= 0.05
    assert abs(np.mean(masses)) <= 3.0 / np.sqrt(10_000)


def test_mass_variance_scales_with_horizon():
    reps = 10_000
    v = {}
    for T in (1.0, 2.0):
        spec = GridSpec(L=1.0, T=T, nx=4, nt=8)
        m = np.array([noise_mass(sample_noise(spec, seed=22, replicate=r))
                      for r in range(reps)])
        v[T] = float(np.var(m))
    assert abs(v[2.0] / v[1.0] - 2.0) <= 0.15


def test_mass_zero_size_grid():
    spec = GridSpec(L=1.0, T=1.0, nx=2, nt=1)
    g = NoiseGrid(spec=spec, seed=0, replicate=0, increments=np.zeros((0, 0)))
    assert noise_mass(g) == 0.0


def test_refinement_aggregation_consistency():
    # summing a 2x-finer grid's increments over coarse cells reproduces the
    # coarse cell variance dt*dx
    fine = GridSpec(L=1.0, T=1.0, nx=64, nt=64)
    w = sample_noise(fine, seed=13).increments
    coarse = w.reshape(32, 2, 32, 2).sum(axis=(1, 3))
    var = float(np.var(coarse))
    target = (1.0 / 32) * (1.0 / 32)
    se = target * np.sqrt(2.0 / (coarse.size - 1))
    assert abs(var - target) <= 4 * se


@pytest.mark.parametrize("bad", [
    dict(L=0.0, T=1.0, nx=4, nt=4),
    dict(L=1.0, T=-1.0, nx=4, nt=4),
    dict(L=1.0, T=1.0, nx=1, nt=4),
    dict(L=1.0, T=1.0, nx=4, nt=0),
])
def test_invalid_spec_rejected(bad):
    with pytest.raises(ConfigurationError):
        GridSpec(**bad)

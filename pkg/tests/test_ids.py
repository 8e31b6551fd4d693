"""IDS estimators, gap detection, and hyperbolicity certification."""
import math
from fractions import Fraction

import numpy as np
import pytest

from gaplab import (
    Bernoulli,
    ConfigurationError,
    Direct,
    EmpiricalDOS,
    Periodic,
    build_truncation,
    certify_gap,
    count_eigenvalues_above,
    detect_gaps,
    empirical_dos,
    ids_at,
    ids_profile,
    sample_potential,
)


def free_ids(e):
    if e <= -2.0:
        return 0.0
    if e >= 2.0:
        return 1.0
    return 1.0 - math.acos(e / 2.0) / math.pi


def test_free_profile_tracks_the_arcsine_law():
    system = Periodic((0.0,))
    grid = np.linspace(-2.5, 2.5, 101)
    profile = ids_profile(system, Direct(), grid, 500, 1)
    reference = np.array([free_ids(e) for e in grid])
    assert np.max(np.abs(profile.values - reference)) < 0.01


def test_estimator_is_an_exact_eigenvalue_ratio():
    rng = np.random.default_rng(2024)
    system = Periodic(tuple(rng.uniform(-1, 1, size=7)))
    for _ in range(25):
        size = int(rng.integers(2, 60))
        energy = float(rng.uniform(-3, 3))
        window = sample_potential(system, Direct(), 0, 1, size)
        trunc = build_truncation(window)
        dense = np.linalg.eigvalsh(np.diag(window) + np.eye(size, k=1) + np.eye(size, k=-1))
        stated = ids_at(system, Direct(), energy, size, 0)
        flips = count_eigenvalues_above(trunc, energy)
        assert Fraction(size - flips, size) == Fraction(int(np.sum(dense <= energy)), size)
        assert stated == (size - flips) / size


def test_empirical_dos_pools_all_phases_sorted():
    system = Periodic((0.0, 3.0))
    dos = empirical_dos(system, Direct(), 50, 4)
    assert dos.phases == 2  # only two distinct shifts exist
    assert dos.values.shape == (100,)
    assert np.all(np.diff(dos.values) >= 0)
    assert dos.count == 100
    # ensemble estimate interpolates the pooled staircase
    assert dos.estimate(10.0) == 1.0
    assert dos.estimate(-10.0) == 0.0


def test_detect_gaps_on_a_synthetic_pool():
    values = np.array([0.0, 0.1, 0.2, 1.0, 1.1, 1.2])
    dos = EmpiricalDOS(values=values, size=3, phases=2)
    gaps = detect_gaps(dos, min_width=0.5)
    assert len(gaps) == 1
    gap = gaps[0]
    assert gap.left == 0.2 and gap.right == 1.0
    assert gap.label == 0.5  # three of six pooled eigenvalues sit below
    assert gap.width == 0.8
    assert detect_gaps(dos, min_width=2.0) == []


def test_default_gap_threshold_is_twenty_mean_spacings():
    rng = np.random.default_rng(8)
    base = np.sort(rng.uniform(0.0, 1.0, size=400))
    pool = np.concatenate([base, base + 1.5])  # half-unit hole in the middle
    dos = EmpiricalDOS(values=np.sort(pool), size=800, phases=1)
    gaps = detect_gaps(dos)
    assert len(gaps) == 1
    assert abs(gaps[0].label - 0.5) < 1e-12


def test_periodic_two_band_gap_is_exact():
    system = Periodic((0.0, 3.0))
    dos = empirical_dos(system, Direct(), 200, 2)
    gaps = detect_gaps(dos)
    assert len(gaps) == 1
    assert gaps[0].label == 0.5


def test_bernoulli_dilute_gap():
    # the label counts the zero-potential sites, a binomial proportion whose
    # spread at this small scale is ~1/(2 sqrt(N*P)) ~ 0.011
    system = Bernoulli((0.0, 8.0), (0.5, 0.5), seed=3)
    dos = empirical_dos(system, Direct(), 500, 4)
    wide = [g for g in detect_gaps(dos) if g.width > 1.0]
    assert len(wide) == 1
    assert abs(wide[0].label - 0.5) < 0.035


def test_certify_gap_inside_and_outside():
    system = Periodic((0.0, 3.0))
    assert certify_gap(system, Direct(), 1.5, steps=1500)  # the spectral gap
    assert not certify_gap(system, Direct(), -0.5, steps=1500)  # inside a band
    assert certify_gap(system, Direct(), 5.0, steps=1500)  # above the spectrum
    with pytest.raises(ConfigurationError):
        certify_gap(system, Direct(), 1.5, steps=50)


def test_thread_env_parity(monkeypatch):
    system = Bernoulli((0.0, 2.0), (0.5, 0.5), seed=1)
    serial = empirical_dos(system, Direct(), 80, 4, seed=5)
    monkeypatch.setenv("GAPLAB_THREADS", "3")
    threaded = empirical_dos(system, Direct(), 80, 4, seed=5)
    assert np.array_equal(serial.values, threaded.values)


def test_profile_and_dos_agree_on_the_grid():
    system = Periodic((0.5, -0.5, 1.0))
    dos = empirical_dos(system, Direct(), 120, 3)
    grid = np.linspace(-3, 3, 41)
    profile = ids_profile(system, Direct(), grid, 120, 3)
    staircase = np.searchsorted(dos.values, grid, side="right") / dos.count
    assert np.max(np.abs(profile.values - staircase)) < 2.0 / 120

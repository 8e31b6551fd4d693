"""Sampled potentials for each base system, and their validation rules."""
import math
import warnings

import numpy as np
import pytest

from gaplab import (
    Affine,
    Bernoulli,
    ConfigurationError,
    CosineSum,
    Direct,
    LetterValues,
    Periodic,
    ResonanceWarning,
    Rotation,
    Substitution,
    SubstitutionSubshift,
    fixed_point_prefix,
    iterate_affine,
    phase_ensemble,
    sample_potential,
)

GOLDEN = (math.sqrt(5) - 1) / 2


def test_periodic_sampling_cycles():
    system = Periodic((0.0, 3.0, 1.0))
    window = sample_potential(system, Direct(), 0, 1, 7)
    assert window.tolist() == [3.0, 1.0, 0.0, 3.0, 1.0, 0.0, 3.0]
    shifted = sample_potential(system, Direct(), 2, 1, 3)
    assert shifted.tolist() == [0.0, 3.0, 1.0]


def test_rotation_sampling_is_the_cosine_of_the_orbit():
    system = Rotation((GOLDEN,))
    sampling = CosineSum((1.0,), coupling=2.0)
    phase = (0.13,)
    window = sample_potential(system, sampling, phase, 1, 50)
    direct = np.array([2.0 * math.cos(2 * math.pi * ((0.13 + n * GOLDEN) % 1.0)) for n in range(1, 51)])
    assert np.max(np.abs(window - direct)) < 1e-12


def test_rotation_resonance_warning_fires_only_for_rationals():
    with pytest.warns(ResonanceWarning):
        Rotation((0.25,))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        Rotation((GOLDEN,))  # badly approximable: must stay silent


def test_affine_orbit_reduces_mod_one_each_step():
    skew = Affine(((1, 0), (1, 1)), (GOLDEN, 0.0))
    point = iterate_affine(skew.matrix, skew.shift, (0.0, 0.0), 3)
    expected = ((3 * GOLDEN) % 1.0, (3 * GOLDEN) % 1.0)
    assert max(abs(a - b) for a, b in zip(point, expected)) < 1e-12

    cat = Affine(((2, 1), (1, 1)), (0.0, 0.0))
    w = (0.123456789, 0.987654321)
    for _ in range(60):
        w = iterate_affine(cat.matrix, cat.shift, w, 1)
        assert 0.0 <= w[0] < 1.0 and 0.0 <= w[1] < 1.0


def test_affine_rejects_non_unimodular_matrices():
    with pytest.raises(ConfigurationError):
        Affine(((2, 0), (0, 1)), (0.0, 0.0))
    Affine(((1, 1), (0, 1)), (0.0, 0.0))  # determinant one is fine


def test_affine_sampling_matches_manual_orbit():
    cat = Affine(((2, 1), (1, 1)), (0.0, 0.0))
    sampling = CosineSum((1.0, 1.0))
    phase = (0.3, 0.4)
    window = sample_potential(cat, sampling, phase, 1, 20)
    w = phase
    manual = []
    for _ in range(20):
        w = iterate_affine(cat.matrix, cat.shift, w, 1)
        manual.append(math.cos(2 * math.pi * w[0]) + math.cos(2 * math.pi * w[1]))
    assert np.max(np.abs(window - np.array(manual))) < 1e-10


def test_substitution_validation():
    with pytest.raises(ConfigurationError, match="'1'"):
        Substitution({"0": "01", "1": ""})  # empty image must name the symbol
    with pytest.raises(ConfigurationError):
        Substitution({"0": "0", "1": "1"})  # reducible: no mixing at any power
    with pytest.raises(ConfigurationError):
        Substitution({"0": "02", "1": "0"})  # image uses an unknown symbol
    with pytest.raises(ConfigurationError):
        Substitution({"ab": "abab"})  # symbols are single characters


def test_fibonacci_fixed_point_prefix():
    fib = Substitution({"0": "01", "1": "0"})
    prefix = fixed_point_prefix(fib, 13)
    assert prefix == "0100101001001"
    # invariance: applying the substitution reproduces the prefix
    assert fib.apply(prefix).startswith(prefix)


def test_thue_morse_fixed_point_prefix():
    tm = Substitution({"0": "01", "1": "10"})
    assert fixed_point_prefix(tm, 16) == "0110100110010110"


def test_substitution_sampling_reads_the_window():
    fib = SubstitutionSubshift(Substitution({"0": "01", "1": "0"}))
    sampling = LetterValues({"0": 1.0, "1": -1.0})
    window = sample_potential(fib, sampling, 0, 1, 6)
    # letters 1..6 of 0100101... are 1 0 0 1 0 1
    assert window.tolist() == [-1.0, 1.0, 1.0, -1.0, 1.0, -1.0]
    offset = sample_potential(fib, sampling, 2, 1, 4)
    # …same word shifted two sites: letters 3..6 are 0 1 0 1
    assert offset.tolist() == [1.0, -1.0, 1.0, -1.0]


def test_bernoulli_windows_are_seed_deterministic_and_consistent():
    system = Bernoulli((0.0, 8.0), (0.5, 0.5), seed=9)
    first = sample_potential(system, Direct(), 123, 1, 200)
    again = sample_potential(system, Direct(), 123, 1, 200)
    assert np.array_equal(first, again)
    longer = sample_potential(system, Direct(), 123, 1, 400)
    assert np.array_equal(longer[:200], first)  # site n never depends on the window end
    assert set(np.unique(first)) <= {0.0, 8.0}
    other_phase = sample_potential(system, Direct(), 124, 1, 200)
    assert not np.array_equal(first, other_phase)


def test_bernoulli_weight_validation():
    with pytest.raises(ConfigurationError):
        Bernoulli((0.0, 1.0), (0.5, 0.4))
    with pytest.raises(ConfigurationError):
        Bernoulli((0.0, 1.0), (1.5, -0.5))


def test_bernoulli_frequencies_approach_the_weights():
    system = Bernoulli((0.0, 1.0), (0.25, 0.75), seed=4)
    window = sample_potential(system, Direct(), 7, 1, 20000)
    assert abs(window.mean() - 0.75) < 0.02


def test_sampling_pairing_is_enforced():
    with pytest.raises(ConfigurationError):
        sample_potential(Periodic((1.0,)), CosineSum((1.0,)), 0, 1, 5)
    with pytest.raises(ConfigurationError):
        sample_potential(Rotation((GOLDEN,)), Direct(), (0.0,), 1, 5)
    with pytest.raises(ConfigurationError):
        sample_potential(Rotation((GOLDEN, math.sqrt(2) - 1)), CosineSum((1.0,)), (0.0, 0.0), 1, 5)
    fib = SubstitutionSubshift(Substitution({"0": "01", "1": "0"}))
    with pytest.raises(ConfigurationError, match="missing"):
        sample_potential(fib, LetterValues({"0": 1.0}), 0, 1, 5)


def test_phase_ensembles_are_deterministic_and_well_typed():
    periodic = phase_ensemble(Periodic((0.0, 3.0)), 5, seed=1)
    assert periodic == [0, 1]  # capped at the period

    rot = Rotation((GOLDEN,))
    phases = phase_ensemble(rot, 6, seed=2)
    assert phases == phase_ensemble(rot, 6, seed=2)
    assert all(0.0 <= p[0] < 1.0 for p in phases)
    assert phases != phase_ensemble(rot, 6, seed=3)

    fib = SubstitutionSubshift(Substitution({"0": "01", "1": "0"}))
    offsets = phase_ensemble(fib, 6, seed=2)
    assert all(isinstance(o, int) and o >= 0 for o in offsets)

    bern = Bernoulli((0.0, 1.0), (0.5, 0.5))
    seeds = phase_ensemble(bern, 8, seed=0)
    assert len(set(seeds)) == 8

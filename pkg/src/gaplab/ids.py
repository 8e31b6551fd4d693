"""Integrated density of states, spectral gaps, and their certification.

The finite-volume estimator is k_N(E) = (number of eigenvalues of H_N at or
below E) / N, averaged over an ensemble of starting phases.  Pooling the
sorted eigenvalues of all ensemble members gives a step function whose large
flat stretches are the spectral gaps; the IDS value on such a stretch is the
gap's label, the quantity the label groups constrain.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import phase_ensemble, sample_potential
from .errors import ConfigurationError
from .operator_core import (
    build_truncation,
    count_eigenvalues_above,
    eigenvalues,
    oscillation_counts,
    transfer_log_norms,
)

_THREAD_ENV = "GAPLAB_THREADS"


@dataclass(frozen=True)
class EmpiricalDOS:
    """Pooled sorted eigenvalues of an ensemble of truncations."""

    values: np.ndarray
    size: int
    phases: int

    @property
    def count(self) -> int:
        return int(self.values.size)

    def estimate(self, energy: float) -> float:
        """Ensemble-averaged IDS estimate at one energy."""
        return float(np.searchsorted(self.values, energy, side="right")) / self.count


@dataclass(frozen=True)
class IDSProfile:
    """IDS estimates on a fixed energy grid."""

    energies: np.ndarray
    values: np.ndarray


@dataclass
class Gap:
    """A spacing in the pooled spectrum wide enough to count as a gap."""

    left: float
    right: float
    label: float
    certified: bool = False
    match: object = None

    @property
    def width(self) -> float:
        return self.right - self.left

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.left + self.right)


def _worker_count() -> int:
    raw = os.environ.get(_THREAD_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def empirical_dos(system, sampling, size: int, phases: int, *, seed: int = 0, abs_tol: float = 1e-10) -> EmpiricalDOS:
    """Eigenvalues of H_N for an ensemble of phases, pooled and sorted.

    ``abs_tol`` is the bisection tolerance passed through to the eigensolver;
    profiles that only feed gap detection can run it far looser than the
    default without moving any gap by a visible amount.
    """
    if size < 1:
        raise ConfigurationError("truncation size must be at least 1")
    ensemble = phase_ensemble(system, phases, seed)

    def solve(phase):
        window = sample_potential(system, sampling, phase, 1, size)
        return eigenvalues(build_truncation(window), abs_tol=abs_tol)

    workers = min(_worker_count(), len(ensemble))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(solve, ensemble))
    else:
        blocks = [solve(phase) for phase in ensemble]
    pooled = np.sort(np.concatenate(blocks))
    return EmpiricalDOS(values=pooled, size=size, phases=len(ensemble))


def ids_at(system, sampling, energy: float, size: int, phase=None, *, seed: int = 0) -> float:
    """Finite-volume IDS estimate (eigenvalues at or below E) / N for one phase."""
    if size < 1:
        raise ConfigurationError("truncation size must be at least 1")
    if phase is None:
        phase = phase_ensemble(system, 1, seed)[0]
    window = sample_potential(system, sampling, phase, 1, size)
    trunc = build_truncation(window)
    return (size - count_eigenvalues_above(trunc, energy)) / size


def ids_profile(system, sampling, energies, size: int, phases: int, *, seed: int = 0) -> IDSProfile:
    """Ensemble-averaged IDS on an energy grid, via batched oscillation counts."""
    grid = np.atleast_1d(np.asarray(energies, dtype=float))
    if grid.ndim != 1 or grid.size == 0:
        raise ConfigurationError("energy grid must be a nonempty 1-d array")
    if size < 1:
        raise ConfigurationError("truncation size must be at least 1")
    ensemble = phase_ensemble(system, phases, seed)
    below = np.zeros(grid.size, dtype=np.int64)
    for phase in ensemble:
        window = sample_potential(system, sampling, phase, 1, size)
        below += size - oscillation_counts(window, grid)
    values = below / (size * len(ensemble))
    return IDSProfile(energies=grid, values=values)


def detect_gaps(dos: EmpiricalDOS, min_width: float | None = None) -> list:
    """Spacings of the pooled spectrum wider than ``min_width``, as Gap objects.

    The default threshold is 20 mean level spacings, 20 * span / N; each gap
    carries the IDS value of its plateau, (index of left edge + 1) / (N * P).
    """
    pooled = dos.values
    if pooled.size < 2:
        return []
    span = float(pooled[-1] - pooled[0])
    if min_width is None:
        if span == 0.0:
            return []
        min_width = 20.0 * span / dos.size
    if min_width <= 0:
        raise ConfigurationError("gap width threshold must be positive")
    spacings = np.diff(pooled)
    out = []
    for i in np.flatnonzero(spacings > min_width):
        out.append(
            Gap(
                left=float(pooled[i]),
                right=float(pooled[i + 1]),
                label=(int(i) + 1) / dos.count,
            )
        )
    return out


def certify_gap(
    system,
    sampling,
    energy: float,
    *,
    steps: int = 2000,
    phases: int = 4,
    growth_threshold: float = 0.02,
    window: int = 50,
    seed: int = 0,
) -> bool:
    """Heuristic check that the transfer cocycle grows uniformly at ``energy``.

    Tracks the log-norm of the n-step transfer matrix along ``phases`` orbits;
    the energy passes if every ``window``-step increment is positive and the
    average growth rate clears ``growth_threshold`` (nats per step) on every
    orbit.  Energies inside bands fluctuate and fail the monotonicity test.
    """
    if steps < 100:
        raise ConfigurationError("certification needs at least 100 transfer steps")
    if window < 1 or window > steps:
        raise ConfigurationError("window must lie between 1 and the step count")
    for phase in phase_ensemble(system, phases, seed):
        potential = sample_potential(system, sampling, phase, 1, steps)
        norms = transfer_log_norms(potential, energy)
        checkpoints = norms[::window]
        if checkpoints[-1] != norms[-1]:
            checkpoints = np.append(checkpoints, norms[-1])
        if not (np.diff(checkpoints) > 0).all():
            return False
        if norms[-1] < growth_threshold * steps:
            return False
    return True

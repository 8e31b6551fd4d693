"""Tridiagonal truncations, oscillation counting, and transfer matrices.

The operators live on the half line with Dirichlet boundary conditions: the
N-site truncation is the symmetric tridiagonal matrix with the potential
V(1..N) on the diagonal and 1 on both off-diagonals.  Everything spectral in
this module goes through the solution u of the three-term recurrence

    u(n+1) = (E - V(n)) u(n) - u(n-1),    u(0) = 0, u(1) = 1.

Counting sign flips of u along 1..N+1 gives the number of truncation
eigenvalues strictly above E (oscillation counting), which is the only
primitive the bisection eigensolver needs.  Inside spectral gaps u grows
exponentially, so magnitudes are carried as sign + log-magnitude with
renormalization; signs and exact zeros are never thresholded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalError

# log(DBL_MAX); reconstructing a value whose log-magnitude exceeds this
# cannot be represented in a native float.
_LOG_HUGE = math.log(np.finfo(float).max)

_BISECTION_CAP = 200


@dataclass(frozen=True)
class Truncation:
    """N-site Dirichlet restriction; off-diagonals are implicitly 1."""

    diagonal: np.ndarray

    @property
    def size(self) -> int:
        return len(self.diagonal)


@dataclass(frozen=True)
class DirichletSolution:
    """Solution of the recurrence, stored as exact signs plus log-magnitudes.

    Index n of each array corresponds to u(n); entry 0 is the boundary value
    u(0) = 0.  ``signs`` uses the convention sgn(0) = +1, ``zero_flags`` marks
    entries that are exactly zero in floating point, and ``logmags`` holds
    log|u(n)| (-inf at exact zeros) accumulated through the renormalization,
    so u(n) = signs[n] * exp(logmags[n]) whenever that fits in a float.
    """

    signs: np.ndarray
    logmags: np.ndarray
    zero_flags: np.ndarray
    energy: float


@dataclass(frozen=True)
class TransferMatrix:
    """Normalized 2x2 cocycle product; the true product is exp(lognorm) * entries."""

    entries: np.ndarray

    def determinant(self) -> float:
        a, b = self.entries[0]
        c, d = self.entries[1]
        return a * d - b * c


def build_truncation(potential_window) -> Truncation:
    """Package a finite potential window V(1..N) as a truncation."""
    diag = np.asarray(potential_window, dtype=float)
    if diag.ndim != 1 or diag.size == 0:
        raise ConfigurationError("potential window must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(diag)):
        raise ConfigurationError("potential window contains non-finite values")
    diag = diag.copy()
    diag.flags.writeable = False
    return Truncation(diag)


def dirichlet_solution(trunc: Truncation, energy: float) -> DirichletSolution:
    """Run the recurrence through u(N+1) with per-step renormalization.

    The working pair (u(n-1), u(n)) is rescaled by the larger of the two
    magnitudes after every step; the accumulated log of those factors is
    folded into the stored log-magnitudes.  Rescaling by a positive factor
    preserves signs and exact zeros, so the combinatorial data is exact.
    """
    if not math.isfinite(energy):
        raise ConfigurationError("energy must be finite")
    diag = trunc.diagonal
    n_sites = trunc.size
    signs = np.ones(n_sites + 2, dtype=np.int8)
    logmags = np.empty(n_sites + 2)
    zero_flags = np.zeros(n_sites + 2, dtype=bool)

    # u(0) = 0, u(1) = 1
    zero_flags[0] = True
    logmags[0] = -math.inf
    logmags[1] = 0.0

    u_prev, u_cur = 0.0, 1.0
    scale = 0.0  # log of the factor divided out so far
    for j in range(n_sites):
        u_next = (energy - diag[j]) * u_cur - u_prev
        if u_next == 0.0:
            zero_flags[j + 2] = True
            logmags[j + 2] = -math.inf
        else:
            if u_next < 0.0:
                signs[j + 2] = -1
            logmags[j + 2] = scale + math.log(abs(u_next))
        m = max(abs(u_cur), abs(u_next))
        if m == 0.0:
            # two consecutive zeros would contradict the Wronskian
            raise NumericalError("degenerate solution pair (two consecutive zeros)")
        u_prev = u_cur / m
        u_cur = u_next / m
        scale += math.log(m)
    return DirichletSolution(signs, logmags, zero_flags, float(energy))


def sign_flip_count(sol: DirichletSolution, n_sites: int) -> int:
    """Count sign changes of u over the window [1, N+1].

    Under the convention sgn(0) = +1 the count runs over 1 <= j <= N, except
    when u(N+1) is exactly zero (E is a Dirichlet eigenvalue), where the last
    comparison is dropped to avoid over-counting.  The result equals the
    number of truncation eigenvalues strictly above the energy.
    """
    s = sol.signs
    if len(s) < n_sites + 2:
        raise ValueError("solution was not computed through index N+1")
    pairs = n_sites - 1 if sol.zero_flags[n_sites + 1] else n_sites
    if pairs <= 0:
        return 0
    return int(np.count_nonzero(s[1 : pairs + 1] != s[2 : pairs + 2]))


def count_eigenvalues_above(trunc: Truncation, energy: float) -> int:
    """Number of truncation eigenvalues strictly exceeding the energy."""
    return sign_flip_count(dirichlet_solution(trunc, energy), trunc.size)


def oscillation_counts(diagonal, energies) -> np.ndarray:
    """Vectorized oscillation count: flips of u over [1, N+1] per energy.

    Identical in exact arithmetic to running ``count_eigenvalues_above`` at
    each energy, but evaluates the recurrence for the whole energy batch per
    lattice step.  Renormalization happens on a fixed stride (the pair decays
    or grows by at most a bounded factor per step, so a stride well below the
    overflow horizon is safe); rescaling is by the per-energy max of the pair,
    which leaves signs and exact zeros untouched.
    """
    diag = np.asarray(diagonal, dtype=float)
    E = np.atleast_1d(np.asarray(energies, dtype=float))
    m = E.shape[0]
    if diag.size == 0 or m == 0:
        return np.zeros(m, dtype=np.int64)

    # one-step growth of the pair is at most max|E - V| + 1
    growth = float(np.max(np.abs(E))) + float(np.max(np.abs(diag))) + 2.0
    stride = max(1, min(64, int(_LOG_HUGE / (2.0 * math.log(growth)))))

    u_prev = np.zeros(m)
    u_cur = np.ones(m)
    neg_cur = np.zeros(m, dtype=bool)  # u(1) = 1 is positive
    flips = np.zeros(m, dtype=np.int64)
    work = np.empty(m)
    neg_next = np.empty(m, dtype=bool)
    flip = np.zeros(m, dtype=bool)
    mag_a = np.empty(m)
    mag_b = np.empty(m)

    for i in range(diag.size):
        np.subtract(E, diag[i], out=work)
        np.multiply(work, u_cur, out=work)
        np.subtract(work, u_prev, out=work)  # u(n+1)
        np.less(work, 0.0, out=neg_next)
        np.not_equal(neg_next, neg_cur, out=flip)
        flips += flip
        u_prev, u_cur, work = u_cur, work, u_prev
        neg_cur, neg_next = neg_next, neg_cur
        if i % stride == stride - 1:
            np.abs(u_prev, out=mag_a)
            np.abs(u_cur, out=mag_b)
            np.maximum(mag_a, mag_b, out=mag_a)
            np.divide(u_prev, mag_a, out=u_prev)
            np.divide(u_cur, mag_a, out=u_cur)

    # drop the final comparison where u(N+1) is exactly zero
    flips -= flip & (u_cur == 0.0)
    return flips


def eigenvalues(trunc: Truncation, abs_tol: float = 1e-10) -> np.ndarray:
    """All N eigenvalues by bisection on the oscillation count.

    A single counting pass over a uniform grid brackets every eigenvalue at
    once; batched bisection then shrinks all brackets in lockstep until each
    has width <= abs_tol.  Eigenvalues of these truncations are simple, so the
    returned array is increasing.
    """
    if not abs_tol > 0.0:
        raise ValueError("abs_tol must be positive")
    diag = trunc.diagonal
    n = trunc.size
    span = float(diag.max() - diag.min())
    pad = 1e-9 * max(1.0, span + 4.0)
    lo_edge = float(diag.min()) - 2.0 - pad
    hi_edge = float(diag.max()) + 2.0 + pad

    # coarse localization: counting function on a uniform grid
    grid = np.linspace(lo_edge, hi_edge, 2 * n + 1)
    counts = n - oscillation_counts(diag, grid)  # eigenvalues <= grid point
    counts = np.maximum.accumulate(counts)
    if counts[0] != 0 or counts[-1] != n:
        raise NumericalError("counting function inconsistent at the spectral bounds")
    ks = np.arange(1, n + 1)
    upper_idx = np.searchsorted(counts, ks, side="left")
    hi = grid[upper_idx]
    lo = grid[upper_idx - 1]

    iterations = 0
    while float(np.max(hi - lo)) > abs_tol:
        iterations += 1
        if iterations > _BISECTION_CAP:
            raise NumericalError(
                f"bisection did not reach width {abs_tol:g} in {_BISECTION_CAP} sweeps"
            )
        mid = 0.5 * (lo + hi)
        above = n - oscillation_counts(diag, mid) >= ks
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


def char_poly_value(trunc: Truncation, energy: float, n: int) -> float:
    """u_E(n+1), which equals det(E - H_n) for the n-site truncation.

    Reconstructed from the stored sign/log-magnitude data; raises
    OverflowError when the value no longer fits in a float.
    """
    if not 1 <= n <= trunc.size:
        raise ValueError(f"n must lie in 1..{trunc.size}, got {n}")
    sub = Truncation(trunc.diagonal[:n])
    sol = dirichlet_solution(sub, energy)
    if sol.zero_flags[n + 1]:
        return 0.0
    logmag = float(sol.logmags[n + 1])
    if logmag > _LOG_HUGE:
        raise OverflowError(
            f"det(E - H_n) has log-magnitude {logmag:.1f}, beyond float range"
        )
    return float(sol.signs[n + 1]) * math.exp(logmag)


def _transfer_scan(potential_window, energy: float, n: int, record):
    """Shared renormalized left-product loop over [[E-V, -1], [1, 0]] steps."""
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    lognorm = 0.0
    if record is not None:
        record[0] = 0.0
    for j in range(n):
        t = energy - potential_window[j]
        a, b, c, d = t * a - c, t * b - d, a, b
        m = max(abs(a), abs(b), abs(c), abs(d))
        if m > 0.0:
            inv = 1.0 / m
            a *= inv
            b *= inv
            c *= inv
            d *= inv
            lognorm += math.log(m)
        if record is not None:
            record[j + 1] = lognorm
    return a, b, c, d, lognorm


def transfer_product(potential_window, energy: float, n: int):
    """Renormalized n-step cocycle product and its accumulated log-norm.

    Multiplies the one-step matrices [[E - V(j), -1], [1, 0]] for j = 1..n in
    cocycle order (latest step on the left).  The product is rescaled by its
    largest entry magnitude at every step; the true product is
    exp(lognorm) * entries, so the determinant bookkeeping is purely a matter
    of the scalar factor and the sign pattern of the entries is exact.
    """
    window = np.asarray(potential_window, dtype=float)
    if n < 0 or n > window.size:
        raise ValueError("window must cover n steps")
    a, b, c, d, lognorm = _transfer_scan(window, float(energy), n, None)
    return TransferMatrix(np.array([[a, b], [c, d]])), lognorm


def transfer_log_norms(potential_window, energy: float) -> np.ndarray:
    """Cumulative log-norm of the cocycle products after 0..n steps."""
    window = np.asarray(potential_window, dtype=float)
    out = np.empty(window.size + 1)
    _transfer_scan(window, float(energy), window.size, out)
    return out

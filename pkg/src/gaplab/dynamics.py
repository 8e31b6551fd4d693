"""Base dynamical systems and sampled potentials V(n) = f(T^n omega).

Five families of base dynamics are supported: periodic cycles, torus
rotations, affine torus automorphisms T(w) = A w + b with A integer and
|det A| = 1, primitive substitution subshifts, and Bernoulli full shifts.
A sampling function f turns an orbit into a real potential; the pairings are
fixed (cosine sums live on tori, letter values on subshifts, direct values on
periodic/Bernoulli systems).

All pseudo-randomness (phase ensembles, Bernoulli draws) comes from numpy's
seeded PCG64 generator, with uniforms mapped through explicit arithmetic, so
every ensemble is reproducible bit for bit from its seed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

_DENOMINATOR_SCAN = 10**6
_PRIMITIVITY_NOTE = "substitution matrix is not primitive (no power within the bound is positive)"
# substitution phases are window offsets into a one-sided fixed point; the
# offset range is fixed so ensembles do not depend on the truncation size
_OFFSET_RANGE = 1 << 20
_PREFIX_CAP = 1 << 22


class ResonanceWarning(UserWarning):
    """A rotation frequency admits a small rational relation."""


def _as_float_tuple(values, what: str) -> tuple:
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{what} must be a sequence of reals") from exc
    if not all(math.isfinite(v) for v in out):
        raise ConfigurationError(f"{what} contains non-finite values")
    return out


def continued_fraction_convergents(x: float, max_denominator: int):
    """Convergents p/q of x with q <= max_denominator, by the Euclidean scan."""
    p_prev, q_prev = 1, 0
    p_cur, q_cur = int(math.floor(x)), 1
    out = [(p_cur, q_cur)]
    frac = x - math.floor(x)
    while frac > 0:
        rec = 1.0 / frac
        a = int(math.floor(rec))
        frac = rec - a
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, a * p_cur + p_prev, a * q_cur + q_prev
        if q_cur > max_denominator:
            break
        out.append((p_cur, q_cur))
        if len(out) > 64:  # doubles only carry ~40 partial quotients of signal
            break
    return out


def _warn_if_resonant(alpha: float) -> None:
    # threshold must sit well below the ~1/(sqrt(5) q^2) floor of badly
    # approximable numbers, or the golden mean itself would trip it
    for p, q in continued_fraction_convergents(alpha, _DENOMINATOR_SCAN):
        if abs(alpha - p / q) < 1e-14:
            warnings.warn(
                f"rotation frequency {alpha!r} is within 1e-12 of {p}/{q}; "
                "the frequency module degenerates on resonant tori",
                ResonanceWarning,
                stacklevel=3,
            )
            return


def _int_det(rows) -> int:
    """Exact determinant of a small integer matrix (cofactor expansion)."""
    d = len(rows)
    if d == 1:
        return rows[0][0]
    total = 0
    for j in range(d):
        minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
        term = rows[0][j] * _int_det(minor)
        total += term if j % 2 == 0 else -term
    return total


@dataclass(frozen=True)
class Periodic:
    """Cyclic shift on p sites with fixed potential values."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", _as_float_tuple(self.values, "periodic values"))
        if len(self.values) < 1:
            raise ConfigurationError("periodic system needs at least one value")

    @property
    def period(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Rotation:
    """Translation by alpha on the d-torus, coordinates kept in [0, 1)."""

    alpha: tuple

    def __post_init__(self):
        alpha = _as_float_tuple(self.alpha, "rotation frequencies")
        if not alpha:
            raise ConfigurationError("rotation needs at least one frequency")
        alpha = tuple(a - math.floor(a) for a in alpha)
        object.__setattr__(self, "alpha", alpha)
        for a in alpha:
            _warn_if_resonant(a)

    @property
    def dimension(self) -> int:
        return len(self.alpha)


@dataclass(frozen=True)
class Affine:
    """Affine torus map T(w) = A w + b mod 1 with A integer, |det A| = 1."""

    matrix: tuple
    shift: tuple

    def __post_init__(self):
        try:
            rows = tuple(tuple(int(entry) for entry in row) for row in self.matrix)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError("affine matrix must be an integer matrix") from exc
        d = len(rows)
        if d == 0 or any(len(row) != d for row in rows):
            raise ConfigurationError("affine matrix must be square")
        if abs(_int_det([list(r) for r in rows])) != 1:
            raise ConfigurationError("affine matrix must have determinant +-1")
        shift = _as_float_tuple(self.shift, "affine shift")
        if len(shift) != d:
            raise ConfigurationError("affine shift dimension does not match the matrix")
        object.__setattr__(self, "matrix", rows)
        object.__setattr__(self, "shift", tuple(s - math.floor(s) for s in shift))

    @property
    def dimension(self) -> int:
        return len(self.matrix)


class Substitution:
    """A symbol-to-word map on a finite alphabet of single-character symbols.

    Primitivity (some power of the abundance matrix is entrywise positive)
    and the existence of a seed symbol whose image under some power starts
    with itself are checked up front; both are needed for a fixed point.
    """

    def __init__(self, rules, alphabet=None):
        rules = dict(rules)
        if alphabet is None:
            alphabet = tuple(sorted(rules))
        else:
            alphabet = tuple(alphabet)
        if len(set(alphabet)) != len(alphabet) or not alphabet:
            raise ConfigurationError("alphabet symbols must be distinct and nonempty")
        for sym in alphabet:
            if not (isinstance(sym, str) and len(sym) == 1):
                raise ConfigurationError(f"symbol {sym!r} is not a single character")
            if sym not in rules:
                raise ConfigurationError(f"no rule for symbol {sym!r}")
        if set(rules) != set(alphabet):
            extra = set(rules) - set(alphabet)
            raise ConfigurationError(f"rules mention symbols outside the alphabet: {sorted(extra)}")
        images = {}
        for sym in alphabet:
            word = rules[sym]
            if not isinstance(word, str):
                word = "".join(word)
            if len(word) == 0:
                raise ConfigurationError(f"rule for symbol {sym!r} maps to the empty word")
            if any(ch not in set(alphabet) for ch in word):
                raise ConfigurationError(f"image of {sym!r} uses symbols outside the alphabet")
            images[sym] = word
        self.alphabet = alphabet
        self.rules = images
        self._index = {sym: i for i, sym in enumerate(alphabet)}
        self._prefix = ""
        if not self._primitive():
            raise ConfigurationError(_PRIMITIVITY_NOTE)
        self._seed_symbol, self._seed_power = self._find_seed()

    def __repr__(self):
        body = ", ".join(f"{s}->{w}" for s, w in self.rules.items())
        return f"Substitution({body})"

    def __eq__(self, other):
        return isinstance(other, Substitution) and self.alphabet == other.alphabet and self.rules == other.rules

    def __hash__(self):
        return hash((self.alphabet, tuple(sorted(self.rules.items()))))

    def matrix(self) -> np.ndarray:
        """Abundance matrix: entry (i, j) counts symbol i in the image of symbol j."""
        k = len(self.alphabet)
        m = np.zeros((k, k), dtype=np.int64)
        for j, sym in enumerate(self.alphabet):
            for ch in self.rules[sym]:
                m[self._index[ch], j] += 1
        return m

    def apply(self, word: str) -> str:
        return "".join(self.rules[ch] for ch in word)

    def _primitive(self) -> bool:
        k = len(self.alphabet)
        reach = self.matrix() > 0
        power = reach.copy()
        for _ in range(2 * k * k):
            if power.all():
                return True
            power = power @ reach
        return bool(power.all())

    def _find_seed(self):
        # follow the first-letter map into its cycle, then take the cycle
        # length (or a multiple) as the power whose fixed point we expand
        first = {sym: self.rules[sym][0] for sym in self.alphabet}
        for start in self.alphabet:
            seen = {}
            sym = start
            while sym not in seen:
                seen[sym] = len(seen)
                sym = first[sym]
            cycle_entry = sym
            cycle_len = len(seen) - seen[sym]
            word = cycle_entry
            for power in range(1, 2 * len(self.alphabet) ** 2 + 1):
                word = self.apply(word)
                if power % cycle_len == 0 and word[0] == cycle_entry and len(word) > 1:
                    return cycle_entry, power
        raise ConfigurationError("substitution has no expanding seed symbol")

    def _extend_prefix(self, length: int) -> str:
        if length > _PREFIX_CAP:
            raise ConfigurationError(f"requested prefix length {length} exceeds the cap {_PREFIX_CAP}")
        word = self._prefix if self._prefix else self._seed_symbol
        power_rules = {sym: sym for sym in self.alphabet}
        for _ in range(self._seed_power):
            power_rules = {sym: self.apply(power_rules[sym]) for sym in self.alphabet}
        while len(word) < length:
            word = "".join(power_rules[ch] for ch in word)
        self._prefix = word
        return word


@dataclass(frozen=True)
class SubstitutionSubshift:
    """Subshift generated by the fixed point of a primitive substitution."""

    substitution: Substitution

    def __post_init__(self):
        if not isinstance(self.substitution, Substitution):
            raise ConfigurationError("substitution system needs a Substitution instance")


@dataclass(frozen=True)
class Bernoulli:
    """Full shift with iid letters; weights are the letter probabilities."""

    values: tuple
    weights: tuple
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", _as_float_tuple(self.values, "bernoulli values"))
        object.__setattr__(self, "weights", _as_float_tuple(self.weights, "bernoulli weights"))
        if len(self.values) != len(self.weights) or not self.values:
            raise ConfigurationError("bernoulli values and weights must have equal nonzero length")
        if any(w <= 0 for w in self.weights):
            raise ConfigurationError("bernoulli weights must be positive")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ConfigurationError("bernoulli weights must sum to 1 within 1e-12")
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class CosineSum:
    """f(w) = coupling * sum_j coefficients[j] * cos(2 pi w_j) on a torus."""

    coefficients: tuple
    coupling: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _as_float_tuple(self.coefficients, "cosine coefficients"))
        coupling = float(self.coupling)
        if not math.isfinite(coupling):
            raise ConfigurationError("coupling must be finite")
        object.__setattr__(self, "coupling", coupling)


@dataclass(frozen=True)
class LetterValues:
    """Potential value per subshift symbol."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = dict(self.values)
        for sym, v in vals.items():
            if not (isinstance(sym, str) and len(sym) == 1):
                raise ConfigurationError(f"letter {sym!r} is not a single character")
            vals[sym] = float(v)
            if not math.isfinite(vals[sym]):
                raise ConfigurationError(f"value for letter {sym!r} is not finite")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class Direct:
    """Pass-through sampling: the system's own values are the potential."""


def _check_pairing(system, sampling):
    if isinstance(sampling, CosineSum):
        if not isinstance(system, (Rotation, Affine)):
            raise ConfigurationError("cosine sampling requires a rotation or affine system")
        if len(sampling.coefficients) != system.dimension:
            raise ConfigurationError("cosine coefficients must match the torus dimension")
    elif isinstance(sampling, LetterValues):
        if not isinstance(system, SubstitutionSubshift):
            raise ConfigurationError("letter-value sampling requires a substitution system")
        missing = [s for s in system.substitution.alphabet if s not in sampling.values]
        if missing:
            raise ConfigurationError(f"letter values missing for symbols: {missing}")
    elif isinstance(sampling, Direct):
        if not isinstance(system, (Periodic, Bernoulli)):
            raise ConfigurationError("direct sampling requires a periodic or bernoulli system")
    else:
        raise ConfigurationError(f"unknown sampling function {sampling!r}")


def iterate_affine(matrix, shift, point, n: int) -> tuple:
    """T^n(point) for T(w) = A w + b, reducing mod 1 after every step."""
    a = np.asarray(matrix, dtype=float)
    b = np.asarray(shift, dtype=float)
    w = np.asarray(point, dtype=float) % 1.0
    for _ in range(n):
        w = (a @ w + b) % 1.0
    return tuple(w)


def _affine_orbit(system: Affine, point, count: int) -> np.ndarray:
    a = np.asarray(system.matrix, dtype=float)
    b = np.asarray(system.shift, dtype=float)
    orbit = np.empty((count, system.dimension))
    w = np.asarray(point, dtype=float) % 1.0
    for i in range(count):
        orbit[i] = w
        w = (a @ w + b) % 1.0
    return orbit


def fixed_point_prefix(subst: Substitution, length: int) -> str:
    """Prefix of the one-sided fixed point of (a power of) the substitution."""
    if length < 1:
        raise ConfigurationError("prefix length must be at least 1")
    return subst._extend_prefix(length)[:length]


def sample_potential(system, sampling, phase, n_start: int, n_stop: int) -> np.ndarray:
    """Evaluate V(n) = f(T^n phase) for n in the inclusive range n_start..n_stop."""
    _check_pairing(system, sampling)
    if n_stop < n_start or n_start < 0:
        raise ConfigurationError("sampling range must satisfy 0 <= n_start <= n_stop")
    count = n_stop - n_start + 1

    if isinstance(system, Periodic):
        idx = (int(phase) + np.arange(n_start, n_stop + 1)) % system.period
        return np.asarray(system.values, dtype=float)[idx]

    if isinstance(system, Rotation):
        alpha = np.asarray(system.alpha, dtype=float)
        base = np.asarray(phase, dtype=float)
        if base.shape != alpha.shape:
            raise ConfigurationError("rotation phase dimension does not match the frequencies")
        pts = (base + np.outer(np.arange(n_start, n_stop + 1), alpha)) % 1.0
        return sampling.coupling * (np.cos(2.0 * math.pi * pts) @ np.asarray(sampling.coefficients))

    if isinstance(system, Affine):
        base = np.asarray(phase, dtype=float)
        if base.shape != (system.dimension,):
            raise ConfigurationError("affine phase dimension does not match the matrix")
        orbit = _affine_orbit(system, base, n_stop + 1)[n_start:]
        return sampling.coupling * (np.cos(2.0 * math.pi * orbit) @ np.asarray(sampling.coefficients))

    if isinstance(system, SubstitutionSubshift):
        offset = int(phase)
        if offset < 0:
            raise ConfigurationError("substitution phases are nonnegative window offsets")
        prefix = fixed_point_prefix(system.substitution, offset + n_stop + 1)
        window = prefix[offset + n_start : offset + n_stop + 1]
        lut = sampling.values
        return np.fromiter((lut[ch] for ch in window), dtype=float, count=count)

    if isinstance(system, Bernoulli):
        rng = np.random.default_rng(np.random.SeedSequence([system.seed & (2**63 - 1), int(phase)]))
        uniforms = rng.random(n_stop + 1)
        edges = np.cumsum(np.asarray(system.weights, dtype=float))
        letters = np.minimum(np.searchsorted(edges, uniforms, side="right"), len(system.values) - 1)
        return np.asarray(system.values, dtype=float)[letters[n_start:]]

    raise ConfigurationError(f"unknown system descriptor {system!r}")


def phase_ensemble(system, count: int, seed: int):
    """Deterministic list of starting phases for ensemble averaging.

    Uniform torus points for rotations and affine maps, window offsets into
    the fixed point for substitution systems, distinct sub-seeds for Bernoulli
    shifts, and the p distinct shifts (count permitting) for periodic systems.
    """
    if count < 1:
        raise ConfigurationError("ensemble size must be at least 1")
    rng = np.random.default_rng(np.random.SeedSequence([0x6A70, int(seed) & (2**63 - 1)]))

    if isinstance(system, Periodic):
        return list(range(min(count, system.period)))
    if isinstance(system, (Rotation, Affine)):
        return [tuple(rng.random(system.dimension)) for _ in range(count)]
    if isinstance(system, SubstitutionSubshift):
        return [int(v) for v in rng.integers(0, _OFFSET_RANGE, size=count)]
    if isinstance(system, Bernoulli):
        seeds = []
        seen = set()
        while len(seeds) < count:
            candidate = int(rng.integers(0, 2**62))
            if candidate not in seen:
                seen.add(candidate)
                seeds.append(candidate)
        return seeds
    raise ConfigurationError(f"unknown system descriptor {system!r}")

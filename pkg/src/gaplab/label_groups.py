"""Label groups: the countable subgroups of R that can carry gap values.

For each base system the integrated density of states, evaluated on a
spectral gap, lands in a specific countable subgroup of [0, 1]:

* periodic with period p          -> (1/p) Z
* torus rotation by alpha         -> Z + alpha_1 Z + ... + alpha_d Z
* affine torus map T(w) = Aw + b  -> Z + <k, b> Z over integer vectors k
                                     fixed by the transpose of A
* primitive substitution          -> the Z[1/theta]-module spanned by letter
                                     and two-letter-word frequencies and 1
* Bernoulli with weights p_i      -> the subring Z[p_1, ..., p_m] of R

This module builds those groups from system descriptors, enumerates their
elements in [0, 1] under explicit caps, and matches observed gap values
against them.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .dynamics import (
    Affine,
    Bernoulli,
    Periodic,
    Rotation,
    Substitution,
    SubstitutionSubshift,
    fixed_point_prefix,
)
from .errors import ConfigurationError, NumericalError, ResourceLimitError

_ENUM_CAP = 10**6
# A float counts as rational only with a small denominator AND a tiny error:
# quadratic irrationals (golden mean!) admit q <= 1e4 approximants no better
# than ~1e-8, while genuinely rational frequency data sits within ~1e-13.
_RATIONAL_TOL = 1e-11
_RATIONAL_DENOM = 10**4
_DEDUP_TOL = 1e-12
_WORD_SCAN_CAP = 1 << 21
_PAIR_COEFF_CAP = 10  # inner cap for two-generator sums in the fallback scan


# ---------------------------------------------------------------------------
# group descriptors


@dataclass(frozen=True)
class FractionGroup:
    """(1/denominator) Z intersected with [0, 1]."""

    denominator: int

    def __post_init__(self):
        if int(self.denominator) < 1:
            raise ConfigurationError("denominator must be a positive integer")
        object.__setattr__(self, "denominator", int(self.denominator))


@dataclass(frozen=True)
class FrequencyModule:
    """Z + frequencies[0] Z + ... + frequencies[d-1] Z."""

    frequencies: tuple

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(float(a) for a in self.frequencies))


@dataclass(frozen=True)
class AffineLabels:
    """Z + <k, b> Z over the integer vectors k with A^T k = k.

    ``basis`` holds the kernel basis vectors, ``offsets`` their pairings
    <k, b> with the translation part; an empty basis leaves only Z.
    """

    basis: tuple
    offsets: tuple


@dataclass(frozen=True)
class PerronModule:
    """Z[1/theta]-module spanned by ``generators`` (frequency data and 1)."""

    theta: float
    generators: tuple


@dataclass(frozen=True)
class WeightRing:
    """Subring of R generated over Z by the given weights."""

    weights: tuple


@dataclass(frozen=True)
class LabelMatch:
    """A group element close to an observed gap value."""

    representation: str
    value: float
    residual: float

    def __str__(self):
        return f"{self.representation} = {self.value:.12g} (residual {self.residual:.3g})"


# ---------------------------------------------------------------------------
# exact integer kernel


def integer_kernel(matrix):
    """Basis of the integer kernel {k : M k = 0} of an integer matrix.

    Column elimination with a unimodular transform, exact over Python ints.
    Returned vectors are sign-normalised (first nonzero entry positive) and
    sorted; together they generate every integer solution.
    """
    rows = [[int(x) for x in row] for row in matrix]
    n_rows = len(rows)
    if n_rows == 0 or any(len(r) != len(rows[0]) for r in rows):
        raise ConfigurationError("kernel computation needs a nonempty rectangular matrix")
    n_cols = len(rows[0])

    cols = [[rows[r][j] for r in range(n_rows)] for j in range(n_cols)]
    unimod = [[1 if i == j else 0 for i in range(n_cols)] for j in range(n_cols)]
    active = list(range(n_cols))

    for r in range(n_rows):
        while True:
            nonzero = [j for j in active if cols[j][r] != 0]
            if len(nonzero) <= 1:
                break
            nonzero.sort(key=lambda j: abs(cols[j][r]))
            piv = nonzero[0]
            for j in nonzero[1:]:
                q = cols[j][r] // cols[piv][r]
                if q:
                    for rr in range(n_rows):
                        cols[j][rr] -= q * cols[piv][rr]
                    for k in range(n_cols):
                        unimod[j][k] -= q * unimod[piv][k]
        nonzero = [j for j in active if cols[j][r] != 0]
        if nonzero:
            active.remove(nonzero[0])

    basis = []
    for j in active:
        if any(v != 0 for v in cols[j]):  # pragma: no cover - elimination guarantees zero
            raise NumericalError("column elimination left a nonzero unpinned column")
        vec = list(unimod[j])
        lead = next((v for v in vec if v != 0), 0)
        if lead < 0:
            vec = [-v for v in vec]
        basis.append(tuple(vec))

    for vec in basis:  # exactness check: these must be genuine kernel vectors
        for r in range(n_rows):
            if sum(rows[r][j] * vec[j] for j in range(n_cols)) != 0:
                raise NumericalError("kernel verification failed")
    return sorted(basis)


# ---------------------------------------------------------------------------
# derived substitutions on m-letter windows


@dataclass(frozen=True)
class DerivedSubstitution:
    """Substitution induced on the legal m-letter windows of a subshift.

    The image of a window w is the sequence of m-letter windows of S(w)
    starting at offsets 0 .. |S(w_1)| - 1; ``matrix`` counts, per column,
    how often each window occurs in the image of the column's window.
    """

    length: int
    words: tuple
    rules: dict
    matrix: np.ndarray

    def __eq__(self, other):
        return (
            isinstance(other, DerivedSubstitution)
            and self.length == other.length
            and self.words == other.words
            and self.rules == other.rules
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.length, self.words))


def _legal_words(subst: Substitution, m: int):
    """All length-m windows of the fixed point, collected until stable."""
    span = max(1024, 8 * m)
    while True:
        if 4 * span > _WORD_SCAN_CAP:
            raise NumericalError(f"window collection did not stabilise below {_WORD_SCAN_CAP} letters")
        tiers = []
        for mult in (1, 2, 4):
            prefix = fixed_point_prefix(subst, mult * span)
            tiers.append({prefix[i : i + m] for i in range(len(prefix) - m + 1)})
        if tiers[0] == tiers[1] == tiers[2]:
            return sorted(tiers[2], key=lambda w: tuple(subst.alphabet.index(ch) for ch in w))
        span *= 2


def derive_substitution(subst: Substitution, m: int) -> DerivedSubstitution:
    if m < 1:
        raise ConfigurationError("window length must be at least 1")
    words = _legal_words(subst, m)
    while True:
        word_set = set(words)
        rules = {}
        missing = False
        for w in words:
            image = subst.apply(w)
            windows = tuple(image[k : k + m] for k in range(len(subst.rules[w[0]])))
            if any(win not in word_set for win in windows):
                missing = True
                break
            rules[w] = windows
        if not missing:
            break
        # a window surfaced that the prefix scan missed; rescan deeper
        extra = {win for w in words for win in (subst.apply(w)[k : k + m] for k in range(len(subst.rules[w[0]])))}
        words = sorted(
            word_set | extra,
            key=lambda w: tuple(subst.alphabet.index(ch) for ch in w),
        )

    index = {w: i for i, w in enumerate(words)}
    mat = np.zeros((len(words), len(words)), dtype=np.int64)
    for j, w in enumerate(words):
        for win in rules[w]:
            mat[index[win], j] += 1
    for j, w in enumerate(words):  # column sums count the windows laid down
        if mat[:, j].sum() != len(subst.rules[w[0]]):
            raise NumericalError("window count mismatch in derived substitution")
    return DerivedSubstitution(length=m, words=tuple(words), rules=rules, matrix=mat)


def _power_substitution(subst: Substitution, p: int) -> Substitution:
    rules = {a: a for a in subst.alphabet}
    for _ in range(p):
        rules = {a: subst.apply(rules[a]) for a in subst.alphabet}
    return Substitution(rules, alphabet=subst.alphabet)


def prefix_factorization(subst: Substitution, m: int):
    """Factor the window substitution through two-letter windows.

    Returns (R, P, p) where p is minimal with min_a |S^p(a)| >= m - 1,
    P projects m-windows onto their leading two letters, and R rebuilds the
    m-window abundance from two-window data:  M_m(S^p) = R P  and
    M_2(S^p) = P R.  Both identities are verified exactly.
    """
    if m < 2:
        raise ConfigurationError("factorization needs windows of length at least 2")
    p = 1
    power = subst
    while min(len(power.rules[a]) for a in power.alphabet) < m - 1:
        p += 1
        if p > 64:
            raise NumericalError("no substitution power has long enough letter images")
        power = _power_substitution(subst, p)

    derived_m = derive_substitution(power, m)
    derived_2 = derive_substitution(power, 2)
    pair_index = {w: i for i, w in enumerate(derived_2.words)}

    rebuild = np.zeros((len(derived_m.words), len(derived_2.words)), dtype=np.int64)
    seen = [False] * len(derived_2.words)
    for j, w in enumerate(derived_m.words):
        head = w[:2]
        if head not in pair_index:
            raise NumericalError(f"window prefix {head!r} is not a legal two-letter window")
        col = pair_index[head]
        if seen[col]:
            if not np.array_equal(rebuild[:, col], derived_m.matrix[:, j]):
                raise NumericalError("windows sharing a two-letter prefix have unequal image counts")
        else:
            rebuild[:, col] = derived_m.matrix[:, j]
            seen[col] = True
    if not all(seen):
        raise NumericalError("some legal two-letter window is no window prefix")

    project = np.zeros((len(derived_2.words), len(derived_m.words)), dtype=np.int64)
    for j, w in enumerate(derived_m.words):
        project[pair_index[w[:2]], j] = 1

    if not np.array_equal(derived_m.matrix, rebuild @ project):
        raise NumericalError("window factorization failed on the long side")
    if not np.array_equal(derived_2.matrix, project @ rebuild):
        raise NumericalError("window factorization failed on the short side")
    return rebuild, project, p


# ---------------------------------------------------------------------------
# Perron data


@dataclass(frozen=True)
class PerronData:
    """Leading eigenvalue and its positive eigenvector, normalised to sum 1."""

    theta: float
    vector: np.ndarray
    residual: float


def perron(matrix, *, tol: float = 1e-13, max_iter: int = 5000) -> PerronData:
    """Power iteration for the leading eigenpair of a nonnegative matrix."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ConfigurationError("perron data needs a nonempty square matrix")
    if (m < 0).any():
        raise ConfigurationError("matrix must be entrywise nonnegative")
    v = np.full(m.shape[0], 1.0 / m.shape[0])
    for _ in range(max_iter):
        w = m @ v
        total = w.sum()
        if total <= 0:
            raise NumericalError("iteration collapsed: matrix has a zero action on positive vectors")
        v = w / total
        image = m @ v
        theta = image.sum()
        residual = float(np.max(np.abs(image - theta * v)))
        if residual <= tol * max(1.0, abs(theta)):
            return PerronData(theta=float(theta), vector=v, residual=residual)
    raise NumericalError(f"power iteration did not reach residual {tol} in {max_iter} steps")


def substitution_label_group(subst: Substitution) -> PerronModule:
    """Assemble the gap-label module of a primitive substitution subshift.

    Generators are the letter frequencies, the two-letter window frequencies,
    and 1; the module closes under division by the expansion factor theta.
    """
    letters = perron(subst.matrix())
    pairs = perron(derive_substitution(subst, 2).matrix)
    if abs(letters.theta - pairs.theta) > 1e-9 * max(1.0, abs(letters.theta)):
        warnings.warn(
            "letter and window substitutions disagree on the expansion factor "
            f"({letters.theta!r} vs {pairs.theta!r})",
            stacklevel=2,
        )
    gens = tuple(float(x) for x in letters.vector) + tuple(float(x) for x in pairs.vector) + (1.0,)
    return PerronModule(theta=float(letters.theta), generators=gens)


def group_for_system(system):
    """The gap-label group determined by the base dynamics."""
    if isinstance(system, Periodic):
        return FractionGroup(system.period)
    if isinstance(system, Rotation):
        return FrequencyModule(system.alpha)
    if isinstance(system, Affine):
        d = system.dimension
        fixed = [[(1 if i == j else 0) - system.matrix[j][i] for j in range(d)] for i in range(d)]
        basis = integer_kernel(fixed)
        offsets = tuple(sum(k * b for k, b in zip(vec, system.shift)) for vec in basis)
        return AffineLabels(basis=tuple(basis), offsets=offsets)
    if isinstance(system, SubstitutionSubshift):
        return substitution_label_group(system.substitution)
    if isinstance(system, Bernoulli):
        return WeightRing(weights=system.weights)
    raise ConfigurationError(f"no label group known for system {system!r}")


# ---------------------------------------------------------------------------
# enumeration and matching


def _as_rational(x: float):
    frac = Fraction(x).limit_denominator(_RATIONAL_DENOM)
    if abs(x - float(frac)) <= _RATIONAL_TOL:
        return frac
    return None


def _quadratic_fit(x: float, beta: float, bound: int = 64):
    """Integers (a, b) with x ~ a + b*beta, smallest |b| first, or None."""
    for mag in range(bound + 1):
        for b in ((mag,) if mag == 0 else (mag, -mag)):
            a = round(x - b * beta)
            if abs(a) <= bound and abs(x - a - b * beta) <= _RATIONAL_TOL:
                return int(a), int(b)
    return None


def _linear_text(pairs, constant: int) -> str:
    chunks = []
    for c, sym in pairs:
        if c == 0:
            continue
        body = sym if abs(c) == 1 else f"{abs(c)}*{sym}"
        if not chunks:
            chunks.append(body if c > 0 else f"-{body}")
        else:
            chunks.append(f"{'-' if c < 0 else '+'} {body}")
    if constant != 0 or not chunks:
        if not chunks:
            chunks.append(str(constant))
        else:
            chunks.append(f"{'-' if constant < 0 else '+'} {abs(constant)}")
    return " ".join(chunks)


def _signed_range(cap: int):
    """0, 1, -1, 2, -2, ...: magnitude order, positive first, for stable ties."""
    out = [0]
    for k in range(1, cap + 1):
        out.extend((k, -k))
    return out


def _module_candidates(names, values, coeff_cap):
    """Stream (label, norm, text) over frac(sum n_i * values_i), |n_i| <= cap."""
    d = len(values)
    if d == 0:
        yield 0.0, 0, "0"
        yield 1.0, 1, "1"
        return
    rng = _signed_range(coeff_cap)
    for coeffs in product(rng, repeat=d):
        raw = sum(n * v for n, v in zip(coeffs, values))
        label = raw - math.floor(raw)
        norm = max(abs(n) for n in coeffs)
        constant = -math.floor(raw)
        yield label, norm, _linear_text(list(zip(coeffs, names)), constant)
        if label == 0.0 and all(abs(n) <= 1 for n in coeffs):
            yield 1.0, max(norm, 1), _linear_text(list(zip(coeffs, names)), constant + 1)


def _module_count(d: int, coeff_cap: int) -> int:
    return (2 * coeff_cap + 1) ** d


def _perron_paths(group: PerronModule):
    """Classify the module: ('rational', D, t, g), ('quadratic', beta, fits), or ('general',)."""
    rationals = [_as_rational(g) for g in group.generators]
    theta_int = round(group.theta)
    if all(r is not None for r in rationals) and theta_int >= 2 and abs(group.theta - theta_int) <= _RATIONAL_TOL:
        denom = 1
        for r in rationals:
            denom = denom * r.denominator // math.gcd(denom, r.denominator)
        content = 0
        for r in rationals:
            content = math.gcd(content, abs(r.numerator) * (denom // r.denominator))
        return ("rational", denom, theta_int, max(content, 1))

    beta = next((g for g, r in zip(group.generators, rationals) if r is None), None)
    if beta is not None:
        fits = [_quadratic_fit(g, beta) for g in group.generators]
        closure = [
            _quadratic_fit(1.0 / group.theta, beta),
            _quadratic_fit(beta / group.theta, beta),
        ]
        if all(f is not None for f in fits) and all(c is not None for c in closure):
            return ("quadratic", beta, fits)
    return ("general",)


def _perron_candidates(group: PerronModule, coeff_cap: int, power_cap: int):
    kind = _perron_paths(group)
    if kind[0] == "rational":
        _, denom, theta_int, content = kind
        total = denom * theta_int**power_cap
        steps = total // content
        if steps + 1 > _ENUM_CAP:
            raise ResourceLimitError(
                f"rational module has {steps + 1} elements in [0, 1] at power {power_cap}; lower power_cap"
            )
        for k in range(steps + 1):
            frac = Fraction(k * content, total)
            yield float(frac), k, f"{frac.numerator}/{frac.denominator}" if frac.denominator > 1 else str(frac.numerator)
        return
    if kind[0] == "quadratic":
        _, beta, _ = kind
        if _module_count(1, coeff_cap) > _ENUM_CAP:
            raise ResourceLimitError("coefficient cap too large for the quadratic module scan")
        tag = f"beta[{beta:.12g}]"
        yield from _module_candidates((tag,), (beta,), coeff_cap)
        return

    # general fallback: single generators and pairs, over powers of theta
    gens = group.generators
    singles = len(gens) * (2 * coeff_cap + 1) * (power_cap + 1)
    pair_cap = min(coeff_cap, _PAIR_COEFF_CAP)
    pairs = math.comb(len(gens), 2) * (2 * pair_cap + 1) ** 2 * (power_cap + 1)
    if singles + pairs > _ENUM_CAP:
        raise ResourceLimitError(
            f"fallback scan would visit {singles + pairs} combinations; lower coeff_cap or power_cap"
        )
    theta = group.theta
    for e in range(power_cap + 1):
        scale = theta**e
        for i, g in enumerate(gens):
            for c in _signed_range(coeff_cap):
                raw = c * g / scale
                label = raw - math.floor(raw)
                text = f"{c}*g{i + 1}/theta^{e} {-math.floor(raw):+d}"
                yield label, abs(c), text
        for (i, gi), (j, gj) in combinations(enumerate(gens), 2):
            for ci in _signed_range(pair_cap):
                for cj in _signed_range(pair_cap):
                    raw = (ci * gi + cj * gj) / scale
                    label = raw - math.floor(raw)
                    text = f"({ci}*g{i + 1} {cj:+d}*g{j + 1})/theta^{e} {-math.floor(raw):+d}"
                    yield label, max(abs(ci), abs(cj)), text
    yield 1.0, 1, "1"


def _weight_candidates(group: WeightRing, coeff_cap: int, power_cap: int):
    rationals = [_as_rational(w) for w in group.weights]
    if all(r is not None for r in rationals):
        base = 1
        for r in rationals:
            base = base * r.denominator // math.gcd(base, r.denominator)
        total = base**power_cap
        if total + 1 > _ENUM_CAP:
            raise ResourceLimitError(
                f"weight ring has {total + 1} elements in [0, 1] at degree {power_cap}; lower power_cap"
            )
        for k in range(total + 1):
            frac = Fraction(k, total)
            yield float(frac), k, f"{frac.numerator}/{frac.denominator}" if frac.denominator > 1 else str(frac.numerator)
        return
    # irrational weights: single monomials c * w_i^e
    count = len(group.weights) * (2 * coeff_cap + 1) * power_cap + 2
    if count > _ENUM_CAP:
        raise ResourceLimitError("monomial scan too large; lower coeff_cap or power_cap")
    yield 0.0, 0, "0"
    yield 1.0, 1, "1"
    for i, w in enumerate(group.weights):
        for e in range(1, power_cap + 1):
            mono = w**e
            for c in range(-coeff_cap, coeff_cap + 1):
                raw = c * mono
                label = raw - math.floor(raw)
                yield label, abs(c), f"{c}*w{i + 1}^{e} {-math.floor(raw):+d}"


def _candidates(group, coeff_cap: int, power_cap: int):
    if isinstance(group, FractionGroup):
        q = group.denominator
        if q + 1 > _ENUM_CAP:
            raise ResourceLimitError(f"denominator {q} exceeds the enumeration cap")
        for k in range(q + 1):
            frac = Fraction(k, q)
            yield float(frac), k, f"{frac.numerator}/{frac.denominator}" if frac.denominator > 1 else str(frac.numerator)
        return
    if isinstance(group, FrequencyModule):
        d = len(group.frequencies)
        if _module_count(d, coeff_cap) > _ENUM_CAP:
            raise ResourceLimitError(
                f"frequency module scan would visit {_module_count(d, coeff_cap)} points; lower coeff_cap"
            )
        names = ("alpha",) if d == 1 else tuple(f"alpha{i + 1}" for i in range(d))
        yield from _module_candidates(names, group.frequencies, coeff_cap)
        return
    if isinstance(group, AffineLabels):
        d = len(group.offsets)
        if _module_count(d, coeff_cap) > _ENUM_CAP:
            raise ResourceLimitError(
                f"affine label scan would visit {_module_count(d, coeff_cap)} points; lower coeff_cap"
            )
        names = tuple(f"<k{i + 1},b>" for i in range(d))
        yield from _module_candidates(names, group.offsets, coeff_cap)
        return
    if isinstance(group, PerronModule):
        yield from _perron_candidates(group, coeff_cap, power_cap)
        return
    if isinstance(group, WeightRing):
        yield from _weight_candidates(group, coeff_cap, power_cap)
        return
    raise ConfigurationError(f"cannot enumerate labels for {group!r}")


def enumerate_labels(group, *, coeff_cap: int = 40, power_cap: int = 8) -> np.ndarray:
    """Sorted distinct label values of the group inside [0, 1].

    Scans are capped; a group whose enumeration would exceed the cap raises
    ResourceLimitError before any large allocation happens.
    """
    values = np.array([v for v, _, _ in _candidates(group, coeff_cap, power_cap)])
    values.sort()
    if values.size == 0:
        return values
    keep = np.empty(values.size, dtype=bool)
    keep[0] = True
    np.greater(np.diff(values), _DEDUP_TOL, out=keep[1:])
    return values[keep]


def match_label(value: float, group, *, tol: float = 5e-3, coeff_cap: int = 40, power_cap: int = 8):
    """Best group element within ``tol`` of ``value``, or None.

    Ties on the residual are broken toward the smallest coefficient norm and
    then toward generation order (small positive coefficients come first), so
    the reported expression is stable run to run.
    """
    if not math.isfinite(value):
        raise ConfigurationError("cannot match a non-finite value")
    best = None
    for label, norm, text in _candidates(group, coeff_cap, power_cap):
        residual = abs(label - float(value))
        if residual > tol:
            continue
        if best is None or (residual, norm) < best[0]:
            best = ((residual, norm), label, text)
    if best is None:
        return None
    (residual, _), label, text = best
    return LabelMatch(representation=text, value=float(label), residual=float(residual))

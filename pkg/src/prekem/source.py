"""Correlated-randomness sources.

A source is an n-fold i.i.d. product of a per-symbol joint distribution
P_XYZ.  A trusted sampler hands the x-string to Alice, the y-string to Bob
and the z-string to Eve; all security and correctness statements are
relative to that distribution.

Conventions:
  - symbol strings are tuples of ints, one symbol per position;
  - probabilities are Fractions in exact mode (every alphabet <= 4 and
    n <= 16) and doubles otherwise, with a 2^-40 validation tolerance;
  - log-probability costs are always doubles (math.fsum of per-symbol
    terms), so membership decisions are order-independent.

The binary satellite scenario is the main concrete instance: X is a
uniform bit, Y = X xor Ber(p), Z = X xor Ber(q).  q = 1/2 makes Eve's
string independent.
"""

from __future__ import annotations

import bisect
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple, Union

from .errors import InfeasibleError, MalformedError

Number = Union[Fraction, float]

EXACT_ALPHABET_MAX = 4
EXACT_N_MAX = 16
SUM_TOL = 2.0 ** -40
DEFAULT_CAP = 1 << 20

# Work ceiling for exhaustive guessing-mass enumeration: largest
# per-coordinate string count we are willing to iterate over.
ENUM_STRINGS_MAX = 1 << 12


@dataclass(frozen=True)
class SourceSpec:
    """An i.i.d. product source: per-symbol joint table plus repetition count.

    table is flat in lexicographic (x, y, z) order: index (x*ny + y)*nz + z.
    bsc carries (p, q) when the spec was built by bsc_source, enabling
    closed-form large-n evaluation; None for general tables.
    """

    nx: int
    ny: int
    nz: int
    n: int
    table: Tuple[Number, ...]
    bsc: Optional[Tuple[Number, Number]] = None

    def __post_init__(self) -> None:
        if min(self.nx, self.ny, self.nz) < 1 or self.n < 1:
            raise MalformedError("alphabet sizes and n must be positive")
        if len(self.table) != self.nx * self.ny * self.nz:
            raise MalformedError("table length does not match alphabet sizes")
        if any(p < 0 for p in self.table):
            raise MalformedError("negative probability")
        total = sum(self.table)
        if self.exact:
            if total != 1:
                raise MalformedError(f"probabilities sum to {total}, not 1")
        elif abs(total - 1.0) > SUM_TOL:
            raise MalformedError(f"probabilities sum to {total}, not 1")

    @property
    def exact(self) -> bool:
        return isinstance(self.table[0], Fraction)

    def p(self, x: int, y: int, z: int) -> Number:
        return self.table[(x * self.ny + y) * self.nz + z]


@dataclass(frozen=True)
class SampleTriple:
    """One draw from the n-fold source: Alice's, Bob's and Eve's strings."""

    x: Tuple[int, ...]
    y: Tuple[int, ...]
    z: Tuple[int, ...]


@dataclass(frozen=True)
class ReconSet:
    """All x-strings whose conditional surprisal given y is at most nu bits.

    members is materialized, sorted by ascending cost then lexicographically,
    so iteration order is reproducible across runs and implementations.
    """

    y: Tuple[int, ...]
    nu: float
    members: Tuple[Tuple[int, ...], ...]


def _coerce(v, exact: bool) -> Number:
    if exact:
        if isinstance(v, Fraction):
            return v
        if isinstance(v, int):
            return Fraction(v)
        # str() round-trips the decimal literal the caller had in mind
        # (0.25 -> 1/4) instead of the exact binary expansion of the double.
        return Fraction(str(v))
    try:
        return float(v)
    except ValueError:
        # "1/20"-style strings are valid in exact mode; accept them here too
        try:
            return float(Fraction(v))
        except (ValueError, ZeroDivisionError):
            raise MalformedError(f"bad probability literal {v!r}") from None


def bsc_source(p, q, n: int) -> SourceSpec:
    """Binary satellite source: X uniform, Y = X xor Ber(p), Z = X xor Ber(q)."""
    exact = n <= EXACT_N_MAX
    pc, qc = _coerce(p, exact), _coerce(q, exact)
    if not (0 <= pc <= 1 and 0 <= qc <= 1):
        raise MalformedError("flip probabilities must lie in [0, 1]")
    half = Fraction(1, 2) if exact else 0.5
    table = []
    for x in (0, 1):
        for y in (0, 1):
            for z in (0, 1):
                py = (1 - pc) if y == x else pc
                pz = (1 - qc) if z == x else qc
                table.append(half * py * pz)
    return SourceSpec(2, 2, 2, n, tuple(table), bsc=(pc, qc))


def from_json(doc) -> SourceSpec:
    """Build a SourceSpec from a JSON document (dict or serialized string).

    Accepted shapes:
      {"bsc": {"p": ..., "q": ..., "n": ...}}
      {"alphabet": [nx, ny, nz], "n": ..., "pxyz": [[x, y, z, prob], ...]}
    Omitted (x, y, z) cells are zero.
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise MalformedError(f"bad source JSON: {e}") from None
    if not isinstance(doc, dict):
        raise MalformedError("source document must be a JSON object")
    if "bsc" in doc:
        b = doc["bsc"]
        try:
            return bsc_source(b["p"], b["q"], int(b["n"]))
        except (KeyError, TypeError) as e:
            raise MalformedError(f"bad bsc shorthand: {e!r}") from None
    try:
        nx, ny, nz = (int(a) for a in doc["alphabet"])
        n = int(doc["n"])
        rows = doc["pxyz"]
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedError(f"bad source document: {e!r}") from None
    exact = max(nx, ny, nz) <= EXACT_ALPHABET_MAX and n <= EXACT_N_MAX
    zero = Fraction(0) if exact else 0.0
    table = [zero] * (nx * ny * nz)
    for row in rows:
        try:
            x, y, z, prob = row
            x, y, z = int(x), int(y), int(z)
        except (TypeError, ValueError) as e:
            raise MalformedError(f"bad pxyz row {row!r}: {e!r}") from None
        if not (0 <= x < nx and 0 <= y < ny and 0 <= z < nz):
            raise MalformedError(f"pxyz row {row!r} outside alphabet")
        table[(x * ny + y) * nz + z] = _coerce(prob, exact)
    return SourceSpec(nx, ny, nz, n, tuple(table))


# ---------------------------------------------------------------------------
# per-symbol marginals and costs (cached per spec; specs are frozen/hashable)

@lru_cache(maxsize=64)
def _marg_y(spec: SourceSpec) -> Tuple[Number, ...]:
    return tuple(
        sum(spec.p(x, y, z) for x in range(spec.nx) for z in range(spec.nz))
        for y in range(spec.ny)
    )


@lru_cache(maxsize=64)
def _joint_xy(spec: SourceSpec) -> Tuple[Tuple[Number, ...], ...]:
    return tuple(
        tuple(sum(spec.p(x, y, z) for z in range(spec.nz)) for y in range(spec.ny))
        for x in range(spec.nx)
    )


@lru_cache(maxsize=64)
def _joint_xz(spec: SourceSpec) -> Tuple[Tuple[Number, ...], ...]:
    return tuple(
        tuple(sum(spec.p(x, y, z) for y in range(spec.ny)) for z in range(spec.nz))
        for x in range(spec.nx)
    )


@lru_cache(maxsize=64)
def _joint_yz(spec: SourceSpec) -> Tuple[Tuple[Number, ...], ...]:
    return tuple(
        tuple(sum(spec.p(x, y, z) for x in range(spec.nx)) for z in range(spec.nz))
        for y in range(spec.ny)
    )


@lru_cache(maxsize=64)
def _cost_xy(spec: SourceSpec) -> Tuple[Tuple[float, ...], ...]:
    """cost[y][x] = -log2 P(x|y) as a double; inf for zero probability."""
    py = _marg_y(spec)
    pxy = _joint_xy(spec)
    out = []
    for y in range(spec.ny):
        row = []
        for x in range(spec.nx):
            if py[y] == 0 or pxy[x][y] == 0:
                row.append(math.inf)
            else:
                row.append(-math.log2(float(pxy[x][y] / py[y])))
        out.append(tuple(row))
    return tuple(out)


# ---------------------------------------------------------------------------
# sampling

@lru_cache(maxsize=64)
def _cumulative(spec: SourceSpec):
    cums, cells = [], []
    acc = 0.0
    for x in range(spec.nx):
        for y in range(spec.ny):
            for z in range(spec.nz):
                p = float(spec.p(x, y, z))
                if p > 0:
                    acc += p
                    cums.append(acc)
                    cells.append((x, y, z))
    cums[-1] = 1.0
    return cums, cells


def sample(spec: SourceSpec, rng) -> SampleTriple:
    """Draw one n-fold triple; rng is a random.Random-style handle."""
    cums, cells = _cumulative(spec)
    xs, ys, zs = [], [], []
    for _ in range(spec.n):
        i = bisect.bisect_right(cums, rng.random())
        x, y, z = cells[min(i, len(cells) - 1)]
        xs.append(x)
        ys.append(y)
        zs.append(z)
    return SampleTriple(tuple(xs), tuple(ys), tuple(zs))


# ---------------------------------------------------------------------------
# surprisal and the reconciliation set

def cond_neg_log_prob(spec: SourceSpec, x: Tuple[int, ...], y: Tuple[int, ...]) -> float:
    """Sum of per-symbol -log2 P(x_i|y_i); inf when any factor is zero."""
    if len(x) != spec.n or len(y) != spec.n:
        raise MalformedError("strings must have length n")
    cost = _cost_xy(spec)
    return math.fsum(cost[yi][xi] for xi, yi in zip(x, y))


def recon_set(spec: SourceSpec, y: Tuple[int, ...], nu: float,
              cap: int = DEFAULT_CAP) -> ReconSet:
    """All x with cond_neg_log_prob(x, y) <= nu, cost-then-lex ordered.

    Branch and bound over positions: a prefix is abandoned as soon as its
    cost plus the cheapest possible completion exceeds nu.  Every surviving
    internal node has at least one member below it, so the search does
    O(n * |alphabet|) work per member.  More than cap members raises
    InfeasibleError.
    """
    if len(y) != spec.n:
        raise MalformedError("y must have length n")
    cost = _cost_xy(spec)
    n = spec.n
    minc = [min(cost[y[i]]) for i in range(n)]
    suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + minc[i]
    # tiny slack absorbs rounding drift of the running sum; final
    # membership is re-decided by cond_neg_log_prob itself
    budget = nu + 1e-9
    members = []
    prefix = [0] * n
    # iterative depth-first walk (n can exceed the recursion limit):
    # nxt[i] is the next symbol to try at position i, acc[i] the prefix cost
    nxt = [0] * (n + 1)
    acc = [0.0] * (n + 1)
    i = 0 if suffix[0] <= budget else -1
    while i >= 0:
        if i == n:
            members.append(tuple(prefix))
            if len(members) > cap:
                raise InfeasibleError(
                    f"reconciliation set exceeds cap {cap} at nu={nu}")
            i -= 1
            continue
        sym = nxt[i]
        if sym >= spec.nx:
            nxt[i] = 0
            i -= 1
            continue
        nxt[i] = sym + 1
        c = acc[i] + cost[y[i]][sym]
        if c + suffix[i + 1] <= budget:
            prefix[i] = sym
            acc[i + 1] = c
            i += 1
    kept = [x for x in members if cond_neg_log_prob(spec, x, y) <= nu]
    kept.sort(key=lambda x: (cond_neg_log_prob(spec, x, y), x))
    return ReconSet(tuple(y), float(nu), tuple(kept))


# ---------------------------------------------------------------------------
# entropy quantities

def shannon_cond_entropy(spec: SourceSpec) -> float:
    """Per-symbol H(X|Y) in bits."""
    py = _marg_y(spec)
    pxy = _joint_xy(spec)
    terms = []
    for x in range(spec.nx):
        for y in range(spec.ny):
            p = pxy[x][y]
            if p > 0:
                terms.append(float(p) * (math.log2(float(py[y])) - math.log2(float(p))))
    return math.fsum(terms)


def guess_prob_given_z(spec: SourceSpec) -> Number:
    """Per-symbol E_z max_x P(x|z) = sum_z max_x P(x,z); exact in exact mode."""
    pxz = _joint_xz(spec)
    return sum(max(pxz[x][z] for x in range(spec.nx)) for z in range(spec.nz))


def avg_min_entropy_given_z(spec: SourceSpec) -> float:
    """Per-symbol average conditional min-entropy of X given Z, in bits.

    Additive over i.i.d. positions, so the n-fold value is n times this.
    """
    return -math.log2(float(guess_prob_given_z(spec)))


# ---------------------------------------------------------------------------
# guessing masses: the two seed-forging strategies' success probabilities

def bsc_radius(p, n: int, nu: float) -> int:
    """Largest d with cost of a distance-d string <= nu; -1 if none.

    For flip probability p <= 1/2 the reconciliation set of y is exactly the
    Hamming ball of this radius around y.  Costs are fsum'd doubles, the
    same rule recon_set membership uses.
    """
    p = float(p)
    if not 0 <= p <= 0.5:
        raise MalformedError("closed forms need flip probability <= 1/2")
    c0 = -math.log2(1.0 - p) if p < 1.0 else math.inf
    c1 = -math.log2(p) if p > 0 else math.inf
    best = -1
    for d in range(n + 1):
        cost = math.fsum([c1] * d + [c0] * (n - d))
        if cost <= nu:
            best = d
        else:
            break
    return best


def _binom_tail_leq(n: int, d: int, flip: Number) -> Number:
    """P[Binomial(n, flip) <= d], in the arithmetic of flip's type."""
    one = Fraction(1) if isinstance(flip, Fraction) else 1.0
    if d < 0:
        return one * 0
    if d >= n:
        return one
    return sum(math.comb(n, j) * flip ** j * (one - flip) ** (n - j)
               for j in range(d + 1))


def _bsc_masses(spec: SourceSpec, nu: float) -> Tuple[Number, Number]:
    p, q = spec.bsc
    d = bsc_radius(p, spec.n, nu)
    zero = Fraction(0) if spec.exact else 0.0
    if d < 0:
        return zero, zero
    # Both maxima are met by centering the radius-d ball on z: given z, Y
    # flips per symbol with probability p*q' convolution and X with q, both
    # <= 1/2 here, so the ball at the mode carries the most mass.
    yz_flip = p * (1 - q) + q * (1 - p)
    return (_binom_tail_leq(spec.n, d, yz_flip),
            _binom_tail_leq(spec.n, d, q))


def _all_strings(k: int, n: int):
    return itertools.product(range(k), repeat=n)


def _string_prob(pair_table, a: Tuple[int, ...], b: Tuple[int, ...], one):
    p = one
    for ai, bi in zip(a, b):
        p = p * pair_table[ai][bi]
        if p == 0:
            break
    return p


def guessing_mass(spec: SourceSpec, nu: float,
                  cap: int = DEFAULT_CAP) -> Tuple[Number, Number]:
    """Success probabilities of the two optimal guessing strategies.

    mass_x: guess Alice's string x outright and hope it reconciles with the
    unseen y; per z this is max_x of the P(y'|z)-mass of {y' : x in R(y')}.
    mass_y: guess Bob's string y and submit a member of R(y); per z this is
    max_y of the P(x'|z)-mass of R(y).  Both are averaged over z.

    Satellite sources with p, q <= 1/2 use closed-form binomial sums at any
    n; general tables are enumerated exhaustively (small n only).
    """
    if spec.bsc is not None and float(spec.bsc[0]) <= 0.5 and float(spec.bsc[1]) <= 0.5:
        return _bsc_masses(spec, nu)
    if max(spec.nx, spec.ny, spec.nz) ** spec.n > ENUM_STRINGS_MAX:
        raise InfeasibleError("source too large for exhaustive guessing-mass")
    one = Fraction(1) if spec.exact else 1.0
    pyz = _joint_yz(spec)
    pxz = _joint_xz(spec)
    ys = list(_all_strings(spec.ny, spec.n))
    xs = list(_all_strings(spec.nx, spec.n))
    members = {y: frozenset(recon_set(spec, y, nu, cap).members) for y in ys}
    mass_x = one * 0
    mass_y = one * 0
    for z in _all_strings(spec.nz, spec.n):
        py_z = {y: _string_prob(pyz, y, z, one) for y in ys}
        px_z = {x: _string_prob(pxz, x, z, one) for x in xs}
        best_x = max(
            (sum(py_z[y] for y in ys if x in members[y]) for x in xs),
            default=one * 0)
        best_y = max(
            (sum(px_z[x] for x in members[y]) for y in ys), default=one * 0)
        mass_x += best_x
        mass_y += best_y
    return mass_x, mass_y

"""Information-theoretic KEMs over correlated randomness.

Three modes share one parameter object and wire format:

  CEA       shared-seed mode: the reconciliation seed s is sampled once at
            instance setup, published out of band, and reused by every
            encapsulation; the wire carries only (v, s').
  CCA       authenticated mode: both seeds are fresh per encapsulation and
            travel on the wire; the reconciliation hash is the split-seed
            polynomial family whose two-seed solution counts bound forgery.
  BASELINE  comparison mode: as CEA but with per-encapsulation fresh seeds
            and strongly universal (multiply-add) families for both hashes.

Encapsulation hashes Alice's packed x; decapsulation enumerates the
reconciliation set of Bob's y and accepts iff exactly one member explains
the hash value v.  None is the rejection value; an enumeration that would
exceed the configured cap raises InfeasibleError instead (an operational
failure, never a protocol answer).

The derive_params_* engines turn a source plus security targets
(sigma: key indistinguishability, eps: correctness, delta: forgery) into
maximal key lengths; length bounds are also exposed directly as floats.
"""

from __future__ import annotations

import enum
import itertools
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .errors import InfeasibleError, MalformedError
from .gf2 import block, field
from .source import (
    DEFAULT_CAP,
    SourceSpec,
    avg_min_entropy_given_z,
    bsc_radius,
    guessing_mass,
    recon_set,
    sample,
    shannon_cond_entropy,
)
from .uhash import ExtractorSeed, ReconSeed, h_cca, h_cea, hprime, split_seed

__all__ = [
    "Mode",
    "IkemParams",
    "IkemKey",
    "IkemCiphertext",
    "IkemInstance",
    "pack_bits",
    "unpack_bits",
    "gen",
    "encap",
    "decap",
    "derive_params_cea",
    "derive_params_cca",
    "derive_params_baseline",
    "cea_length_bound",
    "cca_length_bound",
    "baseline_length_bound",
    "nu_for_correctness",
    "correctness_bound",
    "distance_bound",
    "forgery_bound",
    "serialize_ciphertext",
    "parse_ciphertext",
]

WIRE_MAGIC = b"IKEM"
WIRE_VERSION = 1
_HEADER = struct.Struct(">4sBBHHH")

# slack for comparing a requested integer length against a float bound
_BOUND_TOL = 1e-9


class Mode(enum.IntEnum):
    CEA = 1
    CCA = 2
    BASELINE = 3


@dataclass(frozen=True)
class IkemParams:
    """Everything a deployed instance needs, plus its security targets.

    sigma bounds key distinguishability, eps decapsulation failure, delta
    forgery; q_e and q_d are the adversary's query budgets the targets are
    stated for.  nu is the reconciliation threshold in bits, cap the
    largest reconciliation set decap will enumerate.
    """

    mode: Mode
    source: SourceSpec
    n: int
    t: int
    ell: int
    nu: float
    r: int
    w: int
    sigma: float
    q_e: int
    q_d: int
    eps: Optional[float] = None
    delta: Optional[float] = None
    cap: int = DEFAULT_CAP

    def __post_init__(self) -> None:
        if self.source.nx != 2 or self.source.ny != 2:
            raise MalformedError("encapsulation needs binary x and y alphabets")
        if self.n != self.source.n:
            raise MalformedError("n must equal the source repetition count")
        if not 1 <= self.t:
            raise MalformedError("t must be positive")
        if not 1 <= self.ell <= self.n:
            raise MalformedError("ell must be in 1..n")
        if not 0 < self.sigma <= 1:
            raise MalformedError("sigma must be in (0, 1]")
        for name, v in (("eps", self.eps), ("delta", self.delta)):
            if v is not None and not 0 < v <= 1:
                raise MalformedError(f"{name} must be in (0, 1]")
        if self.q_e < 0 or self.q_d < 0:
            raise MalformedError("query budgets must be non-negative")
        if self.mode is Mode.CCA:
            if 2 * self.t > self.n:
                raise MalformedError("authenticated mode needs t <= n/2")
            if self.w != self.n:
                raise MalformedError(
                    "authenticated mode shares one n-bit fresh seed")
            pw = self.n - self.t
            if self.r < 2 or self.r % 2:
                raise MalformedError("piece count must be even and >= 2")
            if not (self.r - 2) * pw < self.w <= self.r * pw:
                raise MalformedError("piece count inconsistent with w")
        elif self.mode is Mode.BASELINE:
            if self.t > self.n:
                raise MalformedError("t must be at most n")
            if self.w != self.n + self.ell:
                raise MalformedError(
                    "comparison mode seed is an (n + ell)-bit pair")
        else:
            if self.t > self.n:
                raise MalformedError("t must be at most n")
            if self.w != self.n:
                raise MalformedError("shared-seed mode uses an n-bit seed")


@dataclass(frozen=True)
class IkemKey:
    bits: int
    ell: int

    def __post_init__(self) -> None:
        if not 0 <= self.bits < (1 << self.ell):
            raise MalformedError("key outside its declared length")

    def to_bytes(self) -> bytes:
        return self.bits.to_bytes((self.ell + 7) // 8, "big")


@dataclass(frozen=True)
class IkemCiphertext:
    """Hash value plus seeds; s is None in CEA mode (published out of band)."""

    v: int
    sprime: int
    s: Optional[int]


@dataclass(frozen=True)
class IkemInstance:
    """Private strings from setup plus the CEA-mode public seed."""

    x: Tuple[int, ...]
    y: Tuple[int, ...]
    z: Tuple[int, ...]
    public_seed: Optional[int]


def pack_bits(bits) -> int:
    """First symbol becomes the most significant bit."""
    v = 0
    for b in bits:
        if b not in (0, 1):
            raise MalformedError("packing needs binary symbols")
        v = (v << 1) | b
    return v


def unpack_bits(v: int, n: int) -> Tuple[int, ...]:
    if not 0 <= v < (1 << n):
        raise MalformedError("value does not fit in n bits")
    return tuple((v >> (n - 1 - i)) & 1 for i in range(n))


# ---------------------------------------------------------------------------
# the protocol

def _su_hash(x: int, seed: int, n: int, out_bits: int) -> int:
    """Strongly universal multiply-add family: top bits of a*x, xor b.

    seed packs (a, b) as a || b with a an n-bit field element and b an
    out_bits-bit mask.
    """
    a = seed >> out_bits
    b = seed & ((1 << out_bits) - 1)
    return block(field(n).mul(a, x), n, 1, out_bits) ^ b


def gen(params: IkemParams, rng) -> IkemInstance:
    """Sample private strings; CEA mode also fixes the shared public seed."""
    trip = sample(params.source, rng)
    pub = rng.getrandbits(params.n) if params.mode is Mode.CEA else None
    return IkemInstance(trip.x, trip.y, trip.z, pub)


def _recon_value(params: IkemParams, xp: int, sprime: int, s: int) -> int:
    if params.mode is Mode.CEA:
        return h_cea(xp, ReconSeed(s, params.n, params.t))
    if params.mode is Mode.CCA:
        sv = split_seed(sprime, params.w, params.n - params.t)
        return h_cca(xp, sv, ReconSeed(s, params.n, params.t))
    return _su_hash(xp, s, params.n, params.t)


def _extract(params: IkemParams, xp: int, sprime: int) -> int:
    if params.mode is Mode.BASELINE:
        return _su_hash(xp, sprime, params.n, params.ell)
    return hprime(xp, ExtractorSeed(sprime, params.w, params.ell))


def encap(params: IkemParams, x, rng,
          public_seed: Optional[int] = None) -> Tuple[IkemKey, IkemCiphertext]:
    """Derive a fresh key and ciphertext from Alice's string x.

    Seed draw order is fixed for reproducibility: s' first, then (where
    fresh) s, each as getrandbits of its width.
    """
    if len(x) != params.n:
        raise MalformedError("x must have length n")
    xp = pack_bits(x)
    if params.mode is Mode.CEA:
        if public_seed is None:
            raise MalformedError("shared-seed mode needs the public seed")
        sprime = rng.getrandbits(params.w)
        s: Optional[int] = None
        v = _recon_value(params, xp, sprime, public_seed)
    else:
        sprime = rng.getrandbits(params.w)
        s = rng.getrandbits(
            params.n + (params.t if params.mode is Mode.BASELINE else 0))
        v = _recon_value(params, xp, sprime, s)
    return (IkemKey(_extract(params, xp, sprime), params.ell),
            IkemCiphertext(v, sprime, s))


def _check_ciphertext(params: IkemParams, c: IkemCiphertext) -> None:
    if not 0 <= c.v < (1 << params.t):
        raise MalformedError("hash value outside t bits")
    if not 0 <= c.sprime < (1 << params.w):
        raise MalformedError("seed outside w bits")
    if params.mode is Mode.CEA:
        if c.s is not None:
            raise MalformedError("shared-seed mode carries no s")
    else:
        s_bits = params.n + (params.t if params.mode is Mode.BASELINE else 0)
        if c.s is None or not 0 <= c.s < (1 << s_bits):
            raise MalformedError("reconciliation seed missing or too wide")


def decap(params: IkemParams, y, c: IkemCiphertext,
          public_seed: Optional[int] = None) -> Optional[IkemKey]:
    """Return the key iff exactly one reconciliation candidate explains v.

    None means reject: zero candidates or an ambiguous tie.  A candidate
    set too large to enumerate raises InfeasibleError instead.
    """
    if len(y) != params.n:
        raise MalformedError("y must have length n")
    _check_ciphertext(params, c)
    if params.mode is Mode.CEA:
        if public_seed is None:
            raise MalformedError("shared-seed mode needs the public seed")
        s = public_seed
    else:
        s = c.s
    cands = recon_set(params.source, tuple(y), params.nu, params.cap).members
    match: Optional[int] = None
    for m in cands:
        xp = pack_bits(m)
        if _recon_value(params, xp, c.sprime, s) == c.v:
            if match is not None:
                return None
            match = xp
    if match is None:
        return None
    return IkemKey(_extract(params, match, c.sprime), params.ell)


# ---------------------------------------------------------------------------
# parameter engine

def nu_for_correctness(source: SourceSpec, eps: float) -> float:
    """Reconciliation threshold giving eps-correct decapsulation.

    nu = n H(X|Y) + sqrt(n) log2(|X|+3) sqrt(log2(sqrt(n)/((sqrt(n)-1) eps))).
    """
    if not 0 < eps <= 1:
        raise MalformedError("eps must be in (0, 1]")
    n = source.n
    if n < 2:
        raise InfeasibleError("correctness recipe needs n >= 2")
    rn = math.sqrt(n)
    spread = math.sqrt(math.log2(rn / ((rn - 1) * eps)))
    return n * shannon_cond_entropy(source) + rn * math.log2(source.nx + 3) * spread


def _piece_count(w: int, piece_width: int) -> int:
    r = -(-w // piece_width)
    r += r % 2
    return max(r, 2)


def cea_length_bound(source: SourceSpec, sigma: float, q_e: int, t: int) -> float:
    """Largest key length (in bits, real-valued) for the shared-seed mode."""
    n = source.n
    return (n * avg_min_entropy_given_z(source)
            + 2 * math.log2(sigma) + 2 - t) / (q_e + 1)


def baseline_length_bound(source: SourceSpec, sigma: float, q_e: int, t: int) -> float:
    """Prior fresh-seed bound; the query-leakage term vanishes at q_e = 0."""
    n = source.n
    leak = math.log2(q_e / sigma) if q_e > 0 else 0.0
    return (n * avg_min_entropy_given_z(source)
            + 2 * math.log2(sigma) + 2) / (q_e + 1) - t - leak


def cca_length_bound(source: SourceSpec, sigma: float, delta: float,
                     q_e: int, q_d: int, nu: float, t: int,
                     cap: int = DEFAULT_CAP) -> float:
    """Authenticated-mode key length: min of the secrecy and forgery bounds."""
    n = source.n
    secrecy = (n * avg_min_entropy_given_z(source)
               + 2 * math.log2(sigma) + 2) / (q_e + 1) - t
    if q_d == 0:
        return secrecy
    mass_x, mass_y = guessing_mass(source, nu, cap)
    if mass_x == 0 and mass_y == 0:
        return secrecy
    # min over the two negative logs = -log of the larger mass
    best = max(mass_x, mass_y)
    r = _piece_count(n, n - t)
    forgery = (t - math.log2(float(best)) - n
               - math.log2(q_d * (r + 3) * (r + 2) / delta))
    return min(secrecy, forgery)


def _settle_length(bound: float, ell: Optional[int], n: int) -> int:
    # n caps the length structurally: the extractor output cannot exceed
    # its field width
    if ell is None:
        ell = min(math.floor(bound) if bound < n else n, n)
    if ell < 1:
        raise InfeasibleError(f"no usable key length (bound {bound:.3f})")
    if ell > n:
        raise InfeasibleError("key cannot exceed n bits")
    if ell > bound + _BOUND_TOL:
        raise InfeasibleError(f"requested ell {ell} exceeds bound {bound:.3f}")
    return ell


def derive_params_cea(source: SourceSpec, sigma: float, q_e: int, t: int, *,
                      nu: Optional[float] = None, eps: Optional[float] = None,
                      ell: Optional[int] = None,
                      cap: int = DEFAULT_CAP) -> IkemParams:
    """Shared-seed instance with the longest key the secrecy bound allows.

    nu is a free knob here; when omitted it is filled from eps via
    nu_for_correctness, and one of the two must be given.
    """
    if nu is None:
        if eps is None:
            raise MalformedError("need nu or eps to fix the threshold")
        nu = nu_for_correctness(source, eps)
    ell = _settle_length(cea_length_bound(source, sigma, q_e, t), ell, source.n)
    return IkemParams(
        mode=Mode.CEA, source=source, n=source.n, t=t, ell=ell, nu=nu,
        r=0, w=source.n, sigma=sigma, q_e=q_e, q_d=0, eps=eps, cap=cap)


def derive_params_cca(source: SourceSpec, eps: float, sigma: float,
                      delta: float, q_e: int, q_d: int, *,
                      nu: Optional[float] = None, t: Optional[int] = None,
                      ell: Optional[int] = None,
                      cap: int = DEFAULT_CAP) -> IkemParams:
    """Authenticated instance; nu and minimal t default to the correctness
    recipe, and the key length to the secrecy/forgery minimum."""
    n = source.n
    if nu is None:
        nu = nu_for_correctness(source, eps)
    if t is None:
        if not 0 < eps <= 1:
            raise MalformedError("eps must be in (0, 1]")
        t = math.ceil(nu + math.log2(math.sqrt(n) / eps))
    if t < 1 or 2 * t > n:
        raise InfeasibleError(f"t = {t} outside 1..n/2")
    ell = _settle_length(
        cca_length_bound(source, sigma, delta, q_e, q_d, nu, t, cap), ell, n)
    return IkemParams(
        mode=Mode.CCA, source=source, n=n, t=t, ell=ell, nu=nu,
        r=_piece_count(n, n - t), w=n, sigma=sigma, q_e=q_e, q_d=q_d,
        eps=eps, delta=delta, cap=cap)


def derive_params_baseline(source: SourceSpec, sigma: float, q_e: int, t: int, *,
                           nu: Optional[float] = None,
                           eps: Optional[float] = None,
                           ell: Optional[int] = None,
                           cap: int = DEFAULT_CAP) -> IkemParams:
    """Comparison instance under the prior fresh-seed length bound."""
    if nu is None:
        if eps is None:
            raise MalformedError("need nu or eps to fix the threshold")
        nu = nu_for_correctness(source, eps)
    ell = _settle_length(
        baseline_length_bound(source, sigma, q_e, t), ell, source.n)
    return IkemParams(
        mode=Mode.BASELINE, source=source, n=source.n, t=t, ell=ell, nu=nu,
        r=0, w=source.n + ell, sigma=sigma, q_e=q_e, q_d=0, eps=eps, cap=cap)


# ---------------------------------------------------------------------------
# analytic guarantees for a parameter set

def correctness_bound(params: IkemParams) -> float:
    """Upper bound on the decapsulation failure probability.

    Failure is covered by two events: the true x falls outside the
    reconciliation set, or some other member collides with it under the
    t-bit hash (at most |R| * 2^-t).
    """
    src = params.source
    if src.bsc is not None and float(src.bsc[0]) <= 0.5:
        p = src.bsc[0]
        d = bsc_radius(p, params.n, params.nu)
        if d < 0:
            return 1.0
        one = Fraction(1) if isinstance(p, Fraction) else 1.0
        miss = one - sum(
            math.comb(params.n, j) * p ** j * (one - p) ** (params.n - j)
            for j in range(d + 1))
        ball = sum(math.comb(params.n, j) for j in range(d + 1))
        return min(1.0, float(miss) + ball * 2.0 ** -params.t)
    if 2 ** src.n > 4096:
        raise InfeasibleError("source too large for exhaustive correctness")
    miss_mass = Fraction(0) if src.exact else 0.0
    worst_size = 0
    pxy = {}
    for xs in range(src.nx):
        for ys in range(src.ny):
            pxy[(xs, ys)] = sum(src.p(xs, ys, z) for z in range(src.nz))
    for y in itertools.product(range(src.ny), repeat=src.n):
        members = set(recon_set(src, y, params.nu, params.cap).members)
        worst_size = max(worst_size, len(members))
        for x in itertools.product(range(src.nx), repeat=src.n):
            if x not in members:
                pr = math.prod((pxy[(a, b)] for a, b in zip(x, y)),
                               start=Fraction(1) if src.exact else 1.0)
                miss_mass += pr
    return min(1.0, float(miss_mass) + worst_size * 2.0 ** -params.t)


def distance_bound(params: IkemParams) -> float:
    """Half the root of 2^(exponent): the key-vs-uniform distance bound.

    Exponent per mode: shared-seed (q_e+1)ell + t - nH; authenticated
    (q_e+1)(ell+t) - nH; comparison (q_e+1)(ell+t+leak) - nH, with
    nH the n-fold residual min-entropy given z.
    """
    nh = params.n * avg_min_entropy_given_z(params.source)
    q1 = params.q_e + 1
    if params.mode is Mode.CEA:
        expo = q1 * params.ell + params.t - nh
    elif params.mode is Mode.CCA:
        expo = q1 * (params.ell + params.t) - nh
    else:
        leak = math.log2(params.q_e / params.sigma) if params.q_e > 0 else 0.0
        expo = q1 * (params.ell + params.t + leak) - nh
    return 0.5 * math.sqrt(2.0 ** expo)


def forgery_bound(params: IkemParams) -> float:
    """Acceptance probability bound for q_d forged ciphertexts."""
    if params.mode is not Mode.CCA:
        raise MalformedError("forgery bound applies to the authenticated mode")
    if params.q_d == 0:
        return 0.0
    mass_x, mass_y = guessing_mass(params.source, params.nu, params.cap)
    best = float(max(mass_x, mass_y))
    scale = params.q_d * (params.r + 3) * (params.r + 2)
    return min(1.0, scale * 2.0 ** (params.n + params.ell - params.t) * best)


# ---------------------------------------------------------------------------
# wire format

def _s_bytes(mode: Mode, n: int, t: int) -> int:
    if mode is Mode.CEA:
        return 0
    if mode is Mode.CCA:
        return (n + 7) // 8
    return (n + t + 7) // 8


def serialize_ciphertext(params: IkemParams, c: IkemCiphertext) -> bytes:
    _check_ciphertext(params, c)
    out = _HEADER.pack(WIRE_MAGIC, WIRE_VERSION, int(params.mode),
                       params.n, params.t, params.w)
    out += c.v.to_bytes((params.t + 7) // 8, "big")
    out += c.sprime.to_bytes((params.w + 7) // 8, "big")
    if params.mode is not Mode.CEA:
        out += c.s.to_bytes(_s_bytes(params.mode, params.n, params.t), "big")
    return out


def parse_ciphertext(data: bytes) -> Tuple[Mode, int, int, int, IkemCiphertext]:
    """Strict parse: magic, version, mode, exact length, zero padding bits."""
    if len(data) < _HEADER.size:
        raise MalformedError("ciphertext shorter than its header")
    magic, ver, mode_code, n, t, w = _HEADER.unpack_from(data)
    if magic != WIRE_MAGIC:
        raise MalformedError("bad magic")
    if ver != WIRE_VERSION:
        raise MalformedError(f"unsupported version {ver}")
    try:
        mode = Mode(mode_code)
    except ValueError:
        raise MalformedError(f"unknown mode {mode_code}") from None
    if n < 1 or t < 1 or w < 1:
        raise MalformedError("degenerate header widths")
    vlen, slen = (t + 7) // 8, _s_bytes(mode, n, t)
    plen = (w + 7) // 8
    if len(data) != _HEADER.size + vlen + plen + slen:
        raise MalformedError("ciphertext length mismatch")
    pos = _HEADER.size
    v = int.from_bytes(data[pos:pos + vlen], "big")
    pos += vlen
    sprime = int.from_bytes(data[pos:pos + plen], "big")
    pos += plen
    s = int.from_bytes(data[pos:], "big") if slen else None
    if v >= (1 << t) or sprime >= (1 << w):
        raise MalformedError("nonzero padding bits")
    if s is not None and s >= (1 << (n + (t if mode is Mode.BASELINE else 0))):
        raise MalformedError("nonzero padding bits")
    return mode, n, t, w, IkemCiphertext(v, sprime, s)

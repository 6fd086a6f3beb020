"""Executable security games and exact small-instance analyzers.

Monte-Carlo runners estimate distinguishing advantages and forgery rates
for the encapsulation, DEM and PRF layers; exact analyzers compute the
same quantities by enumeration at desk scale, so every estimate can be
checked against an independent reference and against the closed-form
bounds of the parameter engine.

Estimation protocol: two independent arms, one per challenge bit, each
running config.trials trials on its own derived rng stream.  The report
carries |p0 - p1| and the per-arm 99% Hoeffding half-width
sqrt(ln(2/0.01) / (2N)); an estimate within the half-width of zero is
statistically indistinguishable from a zero-advantage adversary.

Oracles enforce the game rules by raising GameRuleError: query budgets,
the bar on handing the challenge ciphertext to a decapsulation or
decryption oracle, the forgery game's replay exclusion, and the PRF
game's distinct-query rule.  A rule violation means a broken adversary,
not a lost trial.

Exact analyzers clear the source table's common denominator and work on
integer-scaled probabilities throughout, so their results are Fractions
with no float rounding anywhere in the accounting.  Trials are
independent, with per-trial rng streams derived from (seed, arm, index),
so any scheduling of trials produces identical tallies.
"""

from __future__ import annotations

import bisect
import itertools
import json
import math
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .combiner import CompPrfKey, ItPrfKey, prf_comp, prf_it
from .dem import (
    DemCiphertext,
    DemKey,
    DemProfile,
    decrypt_ot,
    decrypt_otcca,
    encrypt_ot,
    encrypt_otcca,
    mac_forgery_bound,
)
from .errors import GameRuleError, InfeasibleError, MalformedError
from .ikem import (
    IkemCiphertext,
    IkemInstance,
    IkemKey,
    IkemParams,
    Mode,
    _extract,
    _recon_value,
    decap,
    distance_bound,
    encap,
    forgery_bound,
    gen,
    unpack_bits,
)
from .source import SourceSpec, recon_set
from .uhash import PaddedSeedVector, ReconSeed, h_cca

__all__ = [
    "GameConfig",
    "AdvantageReport",
    "EveView",
    "ForgeryResult",
    "PrfFamily",
    "hoeffding_halfwidth",
    "run_pkind",
    "run_kint",
    "run_dem_ind",
    "run_pri",
    "brute_force_forger",
    "exact_distance",
    "exact_pri_advantage",
    "count_solutions_lemma6",
    "RandomGuessPkind",
    "CheatingPkind",
    "BayesPkind",
    "RandomCiphertextForger",
    "FixedForger",
    "BruteForceKint",
    "ContrastDemDistinguisher",
    "RandomGuessPri",
    "identity_dem_encrypt",
    "identity_dem_decrypt",
    "it_prf_family",
    "comp_prf_family",
]

PKIND_ATTACKS = ("ot", "cea", "cca")
DEM_ATTACKS = ("ot", "otcca")

# Enumeration ceilings: candidate (x, y) pairs for posterior analysis and
# the inner-product count of the distance enumeration.
PAIR_MAX = 1 << 13
FLOP_MAX = 1 << 35
COUNT_N_MAX = 16


# ---------------------------------------------------------------------------
# configuration and reports

@dataclass(frozen=True)
class GameConfig:
    """What to run: attack flavor, sample size, budgets, rng seed.

    params carries the encapsulation instance parameters (pkind and kint
    games), dem the profile for the DEM game.  target optionally pins
    Eve's string: trials then resample the private strings from the
    conditional source distribution, which is how an adversary's exact
    conditional success probability is checked by simulation.  leak hands
    the adversary Alice's string and exists only for calibration
    fixtures.
    """

    atk: str
    trials: int
    q_e: int = 0
    q_d: int = 0
    seed: int = 0
    params: Optional[IkemParams] = None
    dem: Optional[DemProfile] = None
    target: Optional[Tuple[int, ...]] = None
    leak: bool = False

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise MalformedError("trials must be positive")
        if self.q_e < 0 or self.q_d < 0:
            raise MalformedError("query budgets must be non-negative")
        if self.target is not None and self.params is not None:
            if len(self.target) != self.params.n:
                raise MalformedError("target string must have length n")


@dataclass(frozen=True)
class AdvantageReport:
    """Two-arm estimate with its confidence radius and the declared bound.

    estimate is |p0 - p1|; halfwidth applies to each arm separately.
    bound is the closed-form comparison value, or None when no closed
    form covers the configuration.
    """

    game: str
    atk: str
    estimate: float
    halfwidth: float
    bound: Optional[float]
    n_trials: int
    p0: float
    p1: float

    def to_json_line(self) -> str:
        return json.dumps({
            "game": self.game,
            "atk": self.atk,
            "estimate": self.estimate,
            "halfwidth": self.halfwidth,
            "bound": self.bound,
            "n_trials": self.n_trials,
        })

    def exceeds_bound(self, slack: float = 2.0) -> bool:
        """True when the estimate is beyond bound plus slack half-widths."""
        if self.bound is None:
            return False
        return self.estimate > self.bound + slack * self.halfwidth


@dataclass(frozen=True)
class EveView:
    """What the adversary legitimately sees at the start of a trial."""

    z: Tuple[int, ...]
    public_seed: Optional[int]
    x: Optional[Tuple[int, ...]] = None


def hoeffding_halfwidth(trials: int, confidence: float = 0.99) -> float:
    """Per-arm radius h with P(|p_hat - p| >= h) <= 1 - confidence."""
    if trials < 1:
        raise MalformedError("trials must be positive")
    if not 0 < confidence < 1:
        raise MalformedError("confidence must be in (0, 1)")
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * trials))


def _trial_rng(seed: int, arm: str, index: int) -> random.Random:
    # string seeding hashes the label, so streams are independent of trial
    # scheduling and stable across platforms
    return random.Random(f"{seed}:{arm}:{index}")


# ---------------------------------------------------------------------------
# integer-scaled source probabilities

@lru_cache(maxsize=32)
def _scaled_table(spec: SourceSpec) -> Tuple[int, Tuple[int, ...]]:
    """Clear the per-symbol table's denominators; weights sum to the scale."""
    if not spec.exact:
        raise InfeasibleError("exact analysis needs an exact-mode source")
    denom = math.lcm(*(p.denominator for p in spec.table))
    return denom, tuple(int(p * denom) for p in spec.table)


@lru_cache(maxsize=32)
def _cond_cells(spec: SourceSpec):
    """Per z-symbol cumulative thresholds over the (x, y) cells."""
    _, scaled = _scaled_table(spec)
    out = []
    for z in range(spec.nz):
        cells, cums, acc = [], [], 0
        for x in range(spec.nx):
            for y in range(spec.ny):
                wt = scaled[(x * spec.ny + y) * spec.nz + z]
                if wt:
                    acc += wt
                    cells.append((x, y))
                    cums.append(acc)
        out.append((tuple(cums), tuple(cells), acc))
    return tuple(out)


def _gen_conditioned(params: IkemParams, z: Tuple[int, ...], rng) -> IkemInstance:
    """Sample (x, y) from the source conditioned on Eve's pinned string."""
    table = _cond_cells(params.source)
    xs, ys = [], []
    for zi in z:
        if not 0 <= zi < params.source.nz:
            raise MalformedError("target symbol outside the z alphabet")
        cums, cells, total = table[zi]
        if total == 0:
            raise MalformedError("target string has zero probability")
        x, y = cells[bisect.bisect_right(cums, rng.randrange(total))]
        xs.append(x)
        ys.append(y)
    pub = rng.getrandbits(params.n) if params.mode is Mode.CEA else None
    return IkemInstance(tuple(xs), tuple(ys), tuple(z), pub)


def _enumerate_pairs(spec: SourceSpec, z: Tuple[int, ...]) -> List[Tuple[int, int, int]]:
    """All (x, y) bit-packed pairs with their integer weights given z.

    Zero-weight branches are pruned as the product is extended position by
    position, so the list length tracks the posterior support, not 4^n.
    """
    if len(z) != spec.n:
        raise MalformedError("z must have length n")
    if spec.nx != 2 or spec.ny != 2:
        raise MalformedError("pair enumeration needs binary x and y alphabets")
    _, scaled = _scaled_table(spec)
    acc: List[Tuple[int, int, int]] = [(0, 0, 1)]
    for zi in z:
        if not 0 <= zi < spec.nz:
            raise MalformedError("symbol outside the z alphabet")
        nxt: List[Tuple[int, int, int]] = []
        for xp, yp, wt in acc:
            for x in (0, 1):
                for y in (0, 1):
                    w = scaled[(x * 2 + y) * spec.nz + zi]
                    if w:
                        nxt.append(((xp << 1) | x, (yp << 1) | y, wt * w))
        if len(nxt) > PAIR_MAX:
            raise InfeasibleError("posterior support exceeds the pair ceiling")
        acc = nxt
    if not acc:
        raise MalformedError("target string has zero probability")
    return acc


def _instance_for_trial(params: IkemParams, config: GameConfig, rng) -> IkemInstance:
    if config.target is not None:
        return _gen_conditioned(params, tuple(config.target), rng)
    return gen(params, rng)


def _need_params(config: GameConfig) -> IkemParams:
    if config.params is None:
        raise MalformedError("this game needs config.params")
    return config.params


# ---------------------------------------------------------------------------
# encapsulation-layer oracles

class PkemOracle:
    """Encapsulation/decapsulation oracle pair with hard budgets.

    atk selects which oracles exist; the forgery game gets both.  Once
    the challenge is set, it is barred from decapsulation.  Every
    encapsulation output is recorded so the forgery game can apply its
    replay exclusion.
    """

    def __init__(self, params: IkemParams, instance: IkemInstance, atk: str,
                 q_e: int, q_d: int, rng) -> None:
        self._params = params
        self._inst = instance
        self._atk = atk
        self._rng = rng
        self.encaps_left = q_e if atk in ("cea", "cca", "kint") else 0
        self.decaps_left = q_d if atk in ("cca", "kint") else 0
        self.encap_outputs: List[IkemCiphertext] = []
        self._barred: Optional[IkemCiphertext] = None

    def bar(self, c: IkemCiphertext) -> None:
        self._barred = c

    def encap(self) -> Tuple[IkemKey, IkemCiphertext]:
        if self._atk not in ("cea", "cca", "kint"):
            raise GameRuleError(f"no encapsulation oracle under atk={self._atk}")
        if self.encaps_left <= 0:
            raise GameRuleError("encapsulation budget exhausted")
        self.encaps_left -= 1
        k, c = encap(self._params, self._inst.x, self._rng,
                     self._inst.public_seed)
        self.encap_outputs.append(c)
        return k, c

    def decap(self, c: IkemCiphertext) -> Optional[IkemKey]:
        if self._atk not in ("cca", "kint"):
            raise GameRuleError(f"no decapsulation oracle under atk={self._atk}")
        if self.decaps_left <= 0:
            raise GameRuleError("decapsulation budget exhausted")
        if self._barred is not None and c == self._barred:
            raise GameRuleError("challenge ciphertext is barred from decapsulation")
        self.decaps_left -= 1
        return decap(self._params, self._inst.y, c, self._inst.public_seed)


# ---------------------------------------------------------------------------
# key indistinguishability

def _pkind_bound(params: IkemParams, config: GameConfig) -> Optional[float]:
    if config.atk == "ot":
        return distance_bound(replace(params, q_e=0))
    if config.atk == "cea":
        return distance_bound(replace(params, q_e=config.q_e))
    if params.mode is Mode.CCA:
        # chosen-ciphertext advantage via the composition route: twice the
        # per-query forgery bound plus the passive-query distance
        forged = forgery_bound(replace(params, q_d=config.q_d))
        return min(1.0, 2.0 * config.q_d * forged
                   + distance_bound(replace(params, q_e=config.q_e)))
    return None


def run_pkind(config: GameConfig, adversary) -> AdvantageReport:
    """Two-arm key-indistinguishability experiment.

    Each trial draws a fresh instance (or one conditioned on the pinned
    target), lets the adversary query its phase-1 oracle, encapsulates
    the challenge, hands over either the real or a uniform key by arm,
    and records the adversary's bit.
    """
    params = _need_params(config)
    if config.atk not in PKIND_ATTACKS:
        raise MalformedError(f"pkind attack must be one of {PKIND_ATTACKS}")
    rates = []
    for b in (0, 1):
        ones = 0
        for i in range(config.trials):
            rng = _trial_rng(config.seed, f"pkind{b}", i)
            inst = _instance_for_trial(params, config, rng)
            oracle = PkemOracle(params, inst, config.atk,
                                config.q_e, config.q_d, rng)
            view = EveView(inst.z, inst.public_seed,
                           inst.x if config.leak else None)
            st = adversary.phase1(params, view, oracle, rng)
            k_star, c_star = encap(params, inst.x, rng, inst.public_seed)
            if b == 0:
                k_b = k_star
            else:
                k_b = IkemKey(rng.getrandbits(params.ell), params.ell)
            oracle.bar(c_star)
            guess = adversary.phase2(params, view, st, c_star, k_b, oracle, rng)
            if guess not in (0, 1):
                raise GameRuleError("distinguisher must output a bit")
            ones += guess
        rates.append(ones / config.trials)
    return AdvantageReport("pkind", config.atk, abs(rates[0] - rates[1]),
                           hoeffding_halfwidth(config.trials),
                           _pkind_bound(params, config), config.trials,
                           rates[0], rates[1])


class RandomGuessPkind:
    """Zero-advantage reference: ignores everything, flips a coin."""

    def phase1(self, params, view, oracle, rng):
        return None

    def phase2(self, params, view, st, c_star, k_b, oracle, rng):
        return rng.getrandbits(1)


class CheatingPkind:
    """Calibration fixture: reads Alice's string through the leak and
    recomputes the real key.  Needs GameConfig.leak."""

    def phase1(self, params, view, oracle, rng):
        if view.x is None:
            raise GameRuleError("cheating fixture needs the leak enabled")
        return None

    def phase2(self, params, view, st, c_star, k_b, oracle, rng):
        xp = 0
        for bit in view.x:
            xp = (xp << 1) | bit
        return 0 if _extract(params, xp, c_star.sprime) == k_b.bits else 1


class BayesPkind:
    """Exact-posterior distinguisher: the desk-scale optimal adversary.

    Conditions on everything its oracles reveal: Eve's string, the public
    seed, every query transcript, and the challenge ciphertext.  With
    probe=True and decapsulation budget it additionally spends one query
    on an honest encapsulation of the runner-up candidate and conditions
    on the answer.  The final decision compares the posterior mass of the
    observed key against the uniform benchmark in integer arithmetic.
    """

    def __init__(self, probe: bool = False) -> None:
        self.probe = probe
        self._pair_cache: Dict[Tuple[SourceSpec, Tuple[int, ...]], list] = {}

    def _pairs(self, spec: SourceSpec, z: Tuple[int, ...]):
        key = (spec, z)
        if key not in self._pair_cache:
            self._pair_cache[key] = _enumerate_pairs(spec, z)
        return self._pair_cache[key]

    def phase1(self, params, view, oracle, rng):
        transcript = []
        while oracle.encaps_left > 0:
            transcript.append(oracle.encap())
        return transcript

    def phase2(self, params, view, transcript, c_star, k_b, oracle, rng):
        pairs = self._pairs(params.source, view.z)
        pub = view.public_seed

        def recon_seed(c: IkemCiphertext) -> int:
            return pub if params.mode is Mode.CEA else c.s

        consistent: Dict[int, bool] = {}
        chal_key: Dict[int, int] = {}
        for xp in {p[0] for p in pairs}:
            ok = all(
                _recon_value(params, xp, c.sprime, recon_seed(c)) == c.v
                and _extract(params, xp, c.sprime) == k.bits
                for k, c in transcript)
            ok = ok and _recon_value(
                params, xp, c_star.sprime, recon_seed(c_star)) == c_star.v
            consistent[xp] = ok
            if ok:
                chal_key[xp] = _extract(params, xp, c_star.sprime)
        keep = [p for p in pairs if consistent[p[0]]]
        if self.probe and oracle.decaps_left > 0 and keep:
            keep = self._probe(params, keep, c_star, pub, oracle, rng)
        mass = sum(wt for xp, _, wt in keep if chal_key[xp] == k_b.bits)
        total = sum(wt for _, _, wt in keep)
        return 0 if (mass << params.ell) > total else 1

    def _probe(self, params, keep, c_star, pub, oracle, rng):
        by_x: Dict[int, int] = {}
        for xp, _, wt in keep:
            by_x[xp] = by_x.get(xp, 0) + wt
        ranked = sorted(by_x, key=lambda xp: (-by_x[xp], xp))
        target = ranked[1] if len(ranked) > 1 else ranked[0]
        probe_c = None
        for _ in range(64):
            _, cand = encap(params, unpack_bits(target, params.n), rng, pub)
            if cand != c_star:
                probe_c = cand
                break
        if probe_c is None:
            return keep
        answer = oracle.decap(probe_c)
        verdict = {
            yp: decap(params, unpack_bits(yp, params.n), probe_c, pub)
            for yp in {p[1] for p in keep}
        }
        return [p for p in keep if verdict[p[1]] == answer]


# ---------------------------------------------------------------------------
# ciphertext integrity

def run_kint(config: GameConfig, adversary) -> AdvantageReport:
    """Forgery-rate experiment: single arm, one encapsulation query.

    The adversary's output never wins when it replays an oracle output.
    The reported bound is the closed-form forgery bound of the params'
    declared budgets (None outside the authenticated mode).
    """
    params = _need_params(config)
    if config.atk != "kint":
        raise MalformedError("run_kint needs atk='kint'")
    if config.q_e != 1:
        raise MalformedError(
            "the integrity game is analyzed at exactly one encapsulation query")
    wins = 0
    for i in range(config.trials):
        rng = _trial_rng(config.seed, "kint", i)
        inst = _instance_for_trial(params, config, rng)
        oracle = PkemOracle(params, inst, "kint", config.q_e, config.q_d, rng)
        view = EveView(inst.z, inst.public_seed,
                       inst.x if config.leak else None)
        forged = adversary.forge(params, view, oracle, rng)
        if not isinstance(forged, IkemCiphertext):
            raise GameRuleError("forger must output a ciphertext")
        if any(forged == c for c in oracle.encap_outputs):
            continue
        if decap(params, inst.y, forged, inst.public_seed) is not None:
            wins += 1
    rate = wins / config.trials
    bound = forgery_bound(params) if params.mode is Mode.CCA else None
    return AdvantageReport("kint", "kint", rate,
                           hoeffding_halfwidth(config.trials), bound,
                           config.trials, rate, 0.0)


class RandomCiphertextForger:
    """Submits a fresh uniformly random well-formed ciphertext."""

    def forge(self, params, view, oracle, rng):
        v = rng.getrandbits(params.t)
        sprime = rng.getrandbits(params.w)
        if params.mode is Mode.CEA:
            s = None
        else:
            s = rng.getrandbits(
                params.n + (params.t if params.mode is Mode.BASELINE else 0))
        return IkemCiphertext(v, sprime, s)


class FixedForger:
    """Replays one precomputed forgery every trial (conditional-rate probe)."""

    def __init__(self, ciphertext: IkemCiphertext) -> None:
        self.ciphertext = ciphertext

    def forge(self, params, view, oracle, rng):
        return self.ciphertext


class BruteForceKint:
    """Runs the exhaustive forger on each trial's Eve view.

    Results are memoized per z under a z-derived rng, so the chosen
    forgery for a given view does not depend on trial order.
    """

    def __init__(self, use_query: bool = False) -> None:
        self.use_query = use_query
        self._cache: Dict[Tuple[int, ...], IkemCiphertext] = {}

    def forge(self, params, view, oracle, rng):
        if self.use_query:
            k, c = oracle.encap()
            result = brute_force_forger(params, view.z,
                                        random.Random(f"forge:{view.z}"),
                                        key=k, ciphertext=c,
                                        public_seed=view.public_seed)
            return result.ciphertext
        if view.z not in self._cache:
            result = brute_force_forger(params, view.z,
                                        random.Random(f"forge:{view.z}"),
                                        public_seed=view.public_seed)
            self._cache[view.z] = result.ciphertext
        return self._cache[view.z]


@dataclass(frozen=True)
class ForgeryResult:
    """Chosen forgery plus its exact acceptance probability.

    score_x / score_y are the two guessing strategies' figures of merit
    (joint posterior mass of the acceptance region); p_success is the
    true acceptance probability of the emitted ciphertext against the
    posterior, decided by running the actual decapsulation.
    """

    ciphertext: IkemCiphertext
    p_success: Fraction
    score_x: Fraction
    score_y: Fraction
    strategy: str
    x_forged: Tuple[int, ...]


def brute_force_forger(params: IkemParams, z, rng,
                       key: Optional[IkemKey] = None,
                       ciphertext: Optional[IkemCiphertext] = None,
                       public_seed: Optional[int] = None) -> ForgeryResult:
    """Best forgery under the two exhaustive guessing strategies.

    Strategy one guesses Alice's string outright, weighting each
    candidate by the posterior mass of the receivers that would accept
    it.  Strategy two guesses Bob's string and submits its likeliest
    acceptable candidate.  The emitted ciphertext is an honest
    encapsulation of the winning guess (never equal to a supplied query
    ciphertext), and p_success is its exact acceptance probability.
    """
    spec = params.source
    z = tuple(z)
    if (key is None) != (ciphertext is None):
        raise MalformedError("a query transcript needs both key and ciphertext")
    pairs = _enumerate_pairs(spec, z)
    if key is not None:
        seed = public_seed if params.mode is Mode.CEA else ciphertext.s
        good = {
            xp: (_recon_value(params, xp, ciphertext.sprime, seed)
                 == ciphertext.v
                 and _extract(params, xp, ciphertext.sprime) == key.bits)
            for xp in {p[0] for p in pairs}
        }
        pairs = [p for p in pairs if good[p[0]]]
        if not pairs:
            raise MalformedError("transcript inconsistent with the source")
    total = sum(wt for _, _, wt in pairs)
    members: Dict[int, frozenset] = {}
    for yp in {p[1] for p in pairs}:
        rs = recon_set(spec, unpack_bits(yp, params.n), params.nu, params.cap)
        packed = []
        for m in rs.members:
            v = 0
            for bit in m:
                v = (v << 1) | bit
            packed.append(v)
        members[yp] = frozenset(packed)
    score_x: Dict[int, int] = {xp: 0 for xp in {p[0] for p in pairs}}
    score_y: Dict[int, int] = {yp: 0 for yp in members}
    pair_wt: Dict[Tuple[int, int], int] = {}
    for xp, yp, wt in pairs:
        pair_wt[(xp, yp)] = pair_wt.get((xp, yp), 0) + wt
        if xp in members[yp]:
            score_x[xp] += wt
            score_y[yp] += wt
    x_star = min(score_x, key=lambda xp: (-score_x[xp], xp))
    y_star = min(score_y, key=lambda yp: (-score_y[yp], yp))
    from_y = [xp for xp in members[y_star] if (xp, y_star) in pair_wt]
    if from_y:
        x_from_y = min(from_y, key=lambda xp: (-pair_wt[(xp, y_star)], xp))
    else:
        x_from_y = x_star
    if score_x[x_star] >= score_y[y_star]:
        strategy, x_f = "x", x_star
    else:
        strategy, x_f = "y", x_from_y
    forged = None
    for _ in range(64):
        _, cand = encap(params, unpack_bits(x_f, params.n), rng, public_seed)
        if ciphertext is None or cand != ciphertext:
            forged = cand
            break
    if forged is None:
        raise InfeasibleError("could not draw a forgery distinct from the query")
    accept = {
        yp: decap(params, unpack_bits(yp, params.n), forged, public_seed)
        is not None
        for yp in members
    }
    won = sum(wt for _, yp, wt in pairs if accept[yp])
    return ForgeryResult(forged, Fraction(won, total),
                         Fraction(score_x[x_star], total),
                         Fraction(score_y[y_star], total),
                         strategy, unpack_bits(x_f, params.n))


# ---------------------------------------------------------------------------
# exact key-uniformity distance

def _seed_tables(params: IkemParams):
    """Per-seed hash tables for the passive view.

    Returns (G, NQ, V, K): V[g or sigma][x] the reconciliation value and
    K[sigma][x] the extracted key, with sigma running over the per-query
    seed space (the fresh-seed pair outside the shared-seed mode).
    """
    n = params.n
    X = 1 << n
    if params.mode is Mode.CEA:
        G = 1 << n
        NQ = 1 << params.w
        V = np.empty((G, X), dtype=np.int64)
        for g in range(G):
            for x in range(X):
                V[g, x] = _recon_value(params, x, 0, g)
        K = np.empty((NQ, X), dtype=np.int64)
        for sp in range(NQ):
            for x in range(X):
                K[sp, x] = _extract(params, x, sp)
        return G, NQ, V, K
    s_bits = n + (params.t if params.mode is Mode.BASELINE else 0)
    NQ = (1 << params.w) * (1 << s_bits)
    V = np.empty((NQ, X), dtype=np.int64)
    Ksp = np.empty((1 << params.w, X), dtype=np.int64)
    for sp in range(1 << params.w):
        for x in range(X):
            Ksp[sp, x] = _extract(params, x, sp)
        for s in range(1 << s_bits):
            sigma = sp * (1 << s_bits) + s
            for x in range(X):
                V[sigma, x] = _recon_value(params, x, sp, s)
    K = np.repeat(Ksp, 1 << s_bits, axis=0)
    return 1, NQ, V, K


def exact_distance(params: IkemParams, q_e: int,
                   ell: Optional[int] = None) -> Fraction:
    """Exact statistical distance of the session key from uniform.

    Enumerates the adversary's full passive view after q_e encapsulation
    queries plus the challenge: Eve's string, every seed, every hash
    value and every queried key.  ell optionally truncates the challenge
    key (0 gives the empty key and hence distance zero); query keys are
    always full length.  Arithmetic is integer-scaled end to end.
    """
    if q_e < 0:
        raise MalformedError("q_e must be non-negative")
    ell = params.ell if ell is None else ell
    if not 0 <= ell <= params.ell:
        raise MalformedError("ell must be in 0..params.ell")
    spec = params.source
    denom, scaled = _scaled_table(spec)
    n, t = params.n, params.t
    X, Z = 1 << n, spec.nz ** n
    out = 1 << ell
    shift = params.ell - ell

    # per-symbol (x, z) weights, then the n-fold Kronecker product;
    # first symbol is the most significant index digit on both axes
    sym = np.zeros((2, spec.nz))
    for x in (0, 1):
        for zi in range(spec.nz):
            sym[x, zi] = sum(scaled[(x * spec.ny + y) * spec.nz + zi]
                             for y in range(spec.ny))
    W = np.ones((1, 1))
    for _ in range(n):
        W = np.kron(W, sym)

    per_query = params.ell if params.mode is Mode.CEA else t + params.ell
    cells_cap = min(X, 1 << (t + q_e * per_query))
    # seed-table sizes are implied by params, so the guard can run before
    # the tables are built
    if params.mode is Mode.CEA:
        G, NQ = 1 << n, 1 << params.w
    else:
        G = 1
        NQ = 1 << (params.w + n
                   + (params.t if params.mode is Mode.BASELINE else 0))
    flops = G * NQ ** q_e * NQ * out * X * cells_cap * Z
    if flops > FLOP_MAX:
        raise InfeasibleError("view enumeration exceeds the work ceiling")
    if 2 * out * denom ** n * NQ >= 1 << 52:
        raise InfeasibleError("scaled masses overflow exact float accounting")
    G, NQ, V, K = _seed_tables(params)

    # challenge selector: rows (value, seed) pick x's whose truncated
    # challenge key equals value
    S = np.zeros((out * NQ, X))
    for sigma in range(NQ):
        for val in range(out):
            S[val * NQ + sigma] = (K[sigma] >> shift) == val

    total = 0
    xs = np.arange(X)
    for g in range(G):
        base = V[g] if params.mode is Mode.CEA else np.zeros(X, dtype=np.int64)
        for qseeds in itertools.product(range(NQ), repeat=q_e):
            keyvec = base.copy()
            for sigma in qseeds:
                if params.mode is not Mode.CEA:
                    keyvec = keyvec * (1 << t) + V[sigma]
                keyvec = keyvec * (1 << params.ell) + K[sigma]
            if params.mode is not Mode.CEA:
                # the challenge ciphertext's own hash value is visible too
                keyvec = keyvec[None, :] * (1 << t) + V
                contrib = 0.0
                for sigma in range(NQ):
                    cells, inv = np.unique(keyvec[sigma], return_inverse=True)
                    nc = len(cells)
                    A = np.zeros((X, nc * out))
                    A[xs, inv * out + (K[sigma] >> shift)] = 1.0
                    M = A.T @ W
                    Mr = M.reshape(nc, out, Z)
                    tot = Mr.sum(axis=1, keepdims=True)
                    contrib += np.abs(Mr * out - tot).sum()
                total += int(round(contrib))
                continue
            cells, inv = np.unique(keyvec, return_inverse=True)
            nc = len(cells)
            A = np.zeros((X, nc))
            A[xs, inv] = 1.0
            B = (A[:, :, None] * W[:, None, :]).reshape(X, nc * Z)
            T = (S @ B).reshape(out, NQ, nc, Z)
            tot = T.sum(axis=0, keepdims=True)
            total += int(round(np.abs(T * out - tot).sum()))
    n_seeds = G * NQ ** q_e * NQ
    return Fraction(total, 2 * out * denom ** n * n_seeds)


# ---------------------------------------------------------------------------
# solution counting for the split polynomial hash

def _split_hash(n: int, t: int, pieces: Tuple[int, ...], s2: int, s1: int,
                x: int) -> int:
    sv = PaddedSeedVector(tuple(pieces), n - t, len(pieces) * (n - t))
    return h_cca(x, sv, ReconSeed((s2 << t) | s1, n, t))


def _check_seed_tuple(n: int, t: int, seed) -> Tuple[Tuple[int, ...], int, int]:
    try:
        pieces, s2, s1 = seed
        pieces = tuple(int(p) for p in pieces)
        s2, s1 = int(s2), int(s1)
    except (TypeError, ValueError) as e:
        raise MalformedError(f"seed tuple must be (pieces, s2, s1): {e!r}") from None
    r = len(pieces)
    if r < 2 or r % 2:
        raise MalformedError("piece count must be even and at least 2")
    big, small = 1 << (n - t), 1 << t
    if any(not 0 <= p < big for p in pieces) or not 0 <= s2 < big:
        raise MalformedError("seed piece outside GF(2^(n-t))")
    if not 0 <= s1 < small:
        raise MalformedError("s1 outside GF(2^t)")
    return pieces, s2, s1


def count_solutions_lemma6(n: int, t: int, seed, seed_f, v: int, v_f: int,
                           part: str, e: Optional[int] = None) -> int:
    """Exhaustive count of inputs explaining two hash targets at once.

    part 'i': inputs x with h(x, seed) = v and h(x, seed_f) = v_f, for
    two distinct seed tuples.  part 'ii': inputs x with
    h(x xor e, seed) = v and h(x, seed_f) = v_f for a nonzero offset e,
    where the forged (value, seed) tuple differs from the original.
    Seed tuples are (pieces, s2, s1) with r = len(pieces).
    """
    if part not in ("i", "ii"):
        raise MalformedError("part must be 'i' or 'ii'")
    if not 1 <= t or 2 * t > n:
        raise MalformedError("the split family needs 1 <= t <= n/2")
    if n > COUNT_N_MAX:
        raise InfeasibleError("exhaustive counting capped at n <= 16")
    a = _check_seed_tuple(n, t, seed)
    b = _check_seed_tuple(n, t, seed_f)
    if len(a[0]) != len(b[0]):
        raise MalformedError("seed tuples must share the piece count")
    if not (0 <= v < (1 << t) and 0 <= v_f < (1 << t)):
        raise MalformedError("targets outside GF(2^t)")
    if part == "i":
        if e is not None:
            raise MalformedError("part 'i' takes no offset")
        if a == b:
            raise MalformedError("part 'i' needs distinct seed tuples")
        e = 0
    else:
        if e is None or not 0 < e < (1 << n):
            raise MalformedError("part 'ii' needs a nonzero n-bit offset")
        if (v, a) == (v_f, b):
            raise MalformedError(
                "part 'ii' needs the forged tuple to differ from the original")
    count = 0
    for x in range(1 << n):
        if (_split_hash(n, t, *a, x ^ e) == v
                and _split_hash(n, t, *b, x) == v_f):
            count += 1
    return count


# ---------------------------------------------------------------------------
# DEM indistinguishability

class DemOracle:
    """Decryption oracle for the one-time chosen-ciphertext row."""

    def __init__(self, atk: str, decrypt_fn: Callable, q_d: int,
                 barred: DemCiphertext) -> None:
        self._atk = atk
        self._fn = decrypt_fn
        self.queries_left = q_d if atk == "otcca" else 0
        self._barred = barred

    def decrypt(self, c: DemCiphertext) -> Optional[bytes]:
        if self._atk != "otcca":
            raise GameRuleError(f"no decryption oracle under atk={self._atk}")
        if self.queries_left <= 0:
            raise GameRuleError("decryption budget exhausted")
        if c == self._barred:
            raise GameRuleError("challenge ciphertext is barred from decryption")
        self.queries_left -= 1
        return self._fn(c)


def run_dem_ind(config: GameConfig, adversary,
                encrypt: Optional[Callable] = None,
                decrypt: Optional[Callable] = None) -> AdvantageReport:
    """Two-arm DEM distinguishing experiment (one-time rows only).

    encrypt/decrypt default to the real one-time scheme of the configured
    profile and attack row; injectable stand-ins (such as the identity
    stub) exist for calibrating the harness.  The reported bound is 0 for
    the passive row and the chosen-ciphertext row's forgery bound scaled
    by the query budget otherwise.
    """
    if config.dem is None:
        raise MalformedError("this game needs config.dem")
    profile = config.dem
    if config.atk not in DEM_ATTACKS:
        raise MalformedError(f"dem attack must be one of {DEM_ATTACKS}")
    otcca = config.atk == "otcca"
    key_bits = profile.otcca_key_bits if otcca else profile.ot_key_bits
    if encrypt is None:
        encrypt = ((lambda key, m: encrypt_otcca(key, m, profile)) if otcca
                   else (lambda key, m: encrypt_ot(key, m, profile)))
    if decrypt is None:
        decrypt = ((lambda key, c: decrypt_otcca(key, c, profile)) if otcca
                   else (lambda key, c: decrypt_ot(key, c, profile)))
    rates = []
    longest = 0
    for b in (0, 1):
        ones = 0
        for i in range(config.trials):
            rng = _trial_rng(config.seed, f"dem{b}", i)
            kbits = rng.getrandbits(key_bits)
            m0, m1, st = adversary.choose(profile, rng)
            if not (isinstance(m0, bytes) and isinstance(m1, bytes)
                    and len(m0) == len(m1)):
                raise GameRuleError(
                    "challenge messages must be equal-length byte strings")
            longest = max(longest, len(m0))
            c_star = encrypt(DemKey(kbits, key_bits), (m0, m1)[b])
            oracle = DemOracle(
                config.atk,
                lambda c: decrypt(DemKey(kbits, key_bits), c),
                config.q_d, c_star)
            guess = adversary.distinguish(profile, st, c_star, oracle, rng)
            if guess not in (0, 1):
                raise GameRuleError("distinguisher must output a bit")
            ones += guess
        rates.append(ones / config.trials)
    if otcca:
        bound = min(1.0, config.q_d * mac_forgery_bound(profile, longest))
    else:
        bound = 0.0
    return AdvantageReport("dem-ind", config.atk, abs(rates[0] - rates[1]),
                           hoeffding_halfwidth(config.trials), bound,
                           config.trials, rates[0], rates[1])


class ContrastDemDistinguisher:
    """Submits all-zero vs all-one messages and matches the challenge body."""

    def __init__(self, length: int = 16) -> None:
        self.length = length

    def choose(self, profile, rng):
        return bytes(self.length), b"\xff" * self.length, None

    def distinguish(self, profile, st, c_star, oracle, rng):
        if c_star.body == bytes(self.length):
            return 0
        if c_star.body == b"\xff" * self.length:
            return 1
        return rng.getrandbits(1)


def identity_dem_encrypt(key: DemKey, m: bytes) -> DemCiphertext:
    """Deliberately broken stand-in: the ciphertext is the message."""
    return DemCiphertext(bytes(m), None)


def identity_dem_decrypt(key: DemKey, c: DemCiphertext) -> Optional[bytes]:
    return bytes(c.body)


# ---------------------------------------------------------------------------
# PRF real-vs-random

@dataclass(frozen=True)
class PrfFamily:
    """A keyed function family plus how to draw its key."""

    name: str
    out_bits: int
    sample_key: Callable[[Any], Any]
    evaluate: Callable[[Any, bytes], int]


def it_prf_family(key_bits: int, q_d: int, out_bits: int) -> PrfFamily:
    """Polynomial-evaluation family keyed by a (q_d+2)-way key split."""
    def sample(rng):
        return ItPrfKey.from_kem_key(IkemKey(rng.getrandbits(key_bits),
                                             key_bits), q_d)
    return PrfFamily("prf-it", out_bits, sample,
                     lambda key, x: prf_it(key, x, out_bits))


def comp_prf_family(out_bits: int) -> PrfFamily:
    """Block-cipher MAC family under a 256-bit key."""
    def sample(rng):
        return CompPrfKey.from_kem_key(IkemKey(rng.getrandbits(256), 256))
    return PrfFamily("prf-comp", out_bits, sample,
                     lambda key, x: prf_comp(key, x, out_bits))


class PriOracle:
    """Evaluation oracle with the distinct-query rule and a hard budget."""

    def __init__(self, family: PrfFamily, key, b: int, budget: int, rng) -> None:
        self._family = family
        self._key = key
        self._b = b
        self.queries_left = budget
        self._rng = rng
        self._seen = set()

    def eval(self, x: bytes) -> int:
        if not isinstance(x, bytes):
            raise GameRuleError("queries are byte strings")
        if x in self._seen:
            raise GameRuleError("repeated query")
        if self.queries_left <= 0:
            raise GameRuleError("query budget exhausted")
        self._seen.add(x)
        self.queries_left -= 1
        if self._b == 0:
            return self._family.evaluate(self._key, x)
        return self._rng.getrandbits(self._family.out_bits)


def run_pri(config: GameConfig, family: PrfFamily, adversary,
            bound: Optional[float] = None) -> AdvantageReport:
    """Two-arm real-vs-random experiment; q_e is the evaluation budget."""
    if config.atk != "pri":
        raise MalformedError("run_pri needs atk='pri'")
    rates = []
    for b in (0, 1):
        ones = 0
        for i in range(config.trials):
            rng = _trial_rng(config.seed, f"pri{b}", i)
            key = family.sample_key(rng)
            oracle = PriOracle(family, key, b, config.q_e, rng)
            guess = adversary.distinguish(family, oracle, rng)
            if guess not in (0, 1):
                raise GameRuleError("distinguisher must output a bit")
            ones += guess
        rates.append(ones / config.trials)
    return AdvantageReport("pri", "pri", abs(rates[0] - rates[1]),
                           hoeffding_halfwidth(config.trials), bound,
                           config.trials, rates[0], rates[1])


class RandomGuessPri:
    def distinguish(self, family, oracle, rng):
        return rng.getrandbits(1)


def exact_pri_advantage(keys, evaluate: Callable[[Any, Any], int],
                        queries, out_bits: int) -> Fraction:
    """Optimal distinguishing advantage for a fixed non-adaptive query set.

    Enumerates the whole key space, tabulates the joint output tuple
    distribution, and returns its statistical distance from uniform;
    zero certifies perfect independence at this query count.
    """
    queries = list(queries)
    if not queries:
        raise MalformedError("need at least one query point")
    counts: Dict[Tuple[int, ...], int] = {}
    nkeys = 0
    for key in keys:
        nkeys += 1
        outs = tuple(evaluate(key, x) for x in queries)
        counts[outs] = counts.get(outs, 0) + 1
    if nkeys == 0:
        raise MalformedError("empty key space")
    space = (1 << out_bits) ** len(queries)
    uniform = Fraction(1, space)
    dist = sum(abs(Fraction(c, nkeys) - uniform) for c in counts.values())
    dist += (space - len(counts)) * uniform
    return dist / 2

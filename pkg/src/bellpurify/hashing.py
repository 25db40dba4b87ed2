"""One-way hashing on Bell-label bit strings.

A string of ``n`` pairs is encoded as the integer whose binary digits are
``i_1 i_2 ... i_2n`` (``i_1`` most significant), so pair ``k`` (counted from
the left, starting at 0) occupies bits ``2(n-1-k)+1`` and ``2(n-1-k)``.  The
same encoding is used for parity masks.  Parities are taken over the whole
current string, after which the target pair is discarded and the remaining
pairs keep their order.

Exact paths enumerate all ``4**N`` strings and are capped at
``ENUMERATION_CAP`` pairs.  :func:`simulate_hashing` works on sparse
posteriors over reachable strings and accepts longer strings when the prior
support is small enough.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .bellcore import entropy
from .errors import CapacityError, DegeneratePosteriorError, DomainError
from .priors import Density

ENUMERATION_CAP = 10
SPARSE_SUPPORT_CAP = 1 << 22
MAX_CODE_PAIRS = 31
DEFAULT_SUCCESS_MASS = 0.99
TYPE_ENTROPY_TOL = 1e-12


class ZeroYieldWarning(UserWarning):
    """A hashing plan needs at least as many rounds as there are pairs."""


@dataclass(frozen=True)
class PairString:
    """A sequence of Bell labels (0..3), one per pair."""

    labels: tuple[int, ...]

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        if any(x < 0 or x > 3 for x in labels):
            raise DomainError(f"Bell labels must be in 0..3, got {labels}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "PairString":
        bits = [int(b) for b in bits]
        if len(bits) % 2 or any(b not in (0, 1) for b in bits):
            raise DomainError("a pair string needs an even number of 0/1 bits")
        return cls(tuple(2 * bits[i] + bits[i + 1] for i in range(0, len(bits), 2)))

    @classmethod
    def from_code(cls, code: int, n: int) -> "PairString":
        return cls(tuple((int(code) >> (2 * (n - 1 - k))) & 3 for k in range(n)))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(b for lab in self.labels for b in (lab >> 1, lab & 1))

    @property
    def code(self) -> int:
        c = 0
        for lab in self.labels:
            c = (c << 2) | lab
        return c

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class ParityMask:
    """Subset of the ``n_bits`` bits of the current string, as an integer."""

    value: int
    n_bits: int

    def __post_init__(self):
        if self.n_bits < 0 or self.value < 0 or self.value >> self.n_bits:
            raise DomainError(f"mask {self.value:#x} does not fit in {self.n_bits} bits")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "ParityMask":
        v = 0
        for b in bits:
            v = (v << 1) | int(b)
        return cls(v, len(bits))

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> (self.n_bits - 1 - m)) & 1 for m in range(self.n_bits))

    @property
    def hex(self) -> str:
        return f"{self.value:0{max(1, (self.n_bits + 3) // 4)}x}"

    def pairs(self) -> list[int]:
        """Indices of the pairs with at least one bit in the subset."""
        n = self.n_bits // 2
        return [k for k in range(n) if (self.value >> (2 * (n - 1 - k))) & 3]


def parity(mask: ParityMask, s: PairString) -> int:
    """Parity of the bits of ``s`` selected by ``mask``."""
    if mask.n_bits != 2 * s.n:
        raise DomainError(f"mask has {mask.n_bits} bits but string has {2 * s.n}")
    return (mask.value & s.code).bit_count() & 1


def _parities(codes: np.ndarray, mask: int) -> np.ndarray:
    return (np.bitwise_count(codes & np.int64(mask)) & 1).astype(np.int64)


def _drop_pair(codes, k: int, n: int):
    """Remove pair ``k`` from strings of ``n`` pairs (works on ints and arrays)."""
    shift = 2 * (n - 1 - k)
    low = codes & ((1 << shift) - 1)
    high = codes >> (shift + 2)
    return (high << shift) | low


@dataclass(frozen=True)
class ParityRound:
    mask: ParityMask
    target: int


@dataclass(frozen=True)
class ParityPlan:
    """A sequence of parity checks on a string of ``N`` pairs.

    ``rounds[i]`` acts on the string left after ``i`` earlier rounds, i.e. on
    ``N - i`` pairs.  ``r_required`` records the number of rounds the sizing
    rule asked for; when it reaches ``N`` the plan is a zero-yield plan with
    only ``N`` rounds.
    """

    N: int
    rounds: tuple[ParityRound, ...]
    S0: float | None = None
    delta: float | None = None
    r_required: int | None = None

    def __post_init__(self):
        if len(self.rounds) > self.N:
            raise DomainError("a plan cannot have more rounds than pairs")
        for i, rnd in enumerate(self.rounds):
            n = self.N - i
            if rnd.mask.n_bits != 2 * n:
                raise DomainError(f"round {i}: mask must cover {2 * n} bits")
            if rnd.target not in rnd.mask.pairs():
                raise DomainError(f"round {i}: target pair {rnd.target} has no bit in the mask")

    @property
    def r(self) -> int:
        return len(self.rounds)

    @property
    def yield_pairs(self) -> int:
        return self.N - self.r

    @property
    def zero_yield(self) -> bool:
        r = self.r if self.r_required is None else self.r_required
        return r >= self.N

    @property
    def zeta(self) -> float:
        """Nominal collision bound ``2**(N(S0+delta) - r)``."""
        if self.S0 is None or self.delta is None:
            raise DomainError("plan was not sized from an entropy threshold")
        return 2.0 ** (self.N * (self.S0 + self.delta) - self.r)

    def apply(self, s: PairString) -> tuple[tuple[int, ...], PairString]:
        """Deterministic outcome bits and output substring for input ``s``."""
        if s.n != self.N:
            raise DomainError(f"plan is for {self.N} pairs, string has {s.n}")
        code, n, out = s.code, s.n, []
        for rnd in self.rounds:
            out.append((rnd.mask.value & code).bit_count() & 1)
            code = _drop_pair(code, rnd.target, n)
            n -= 1
        return tuple(out), PairString.from_code(code, n)

    def apply_codes(self, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized :meth:`apply`: outcome strings (first bit most significant) and outputs."""
        codes = np.asarray(codes, dtype=np.int64)
        outcomes = np.zeros_like(codes)
        n = self.N
        for rnd in self.rounds:
            outcomes = (outcomes << 1) | _parities(codes, rnd.mask.value)
            codes = _drop_pair(codes, rnd.target, n)
            n -= 1
        return outcomes, codes


def _random_mask(n_bits: int, rng: np.random.Generator) -> int:
    while True:
        bits = rng.integers(0, 2, size=n_bits)
        value = 0
        for b in bits:
            value = (value << 1) | int(b)
        if value:
            return value


def random_plan(N: int, r: int, rng: np.random.Generator) -> ParityPlan:
    """``r`` rounds of uniformly random nonempty parity subsets.

    The target of each round is the lowest-indexed pair touched by the mask.
    """
    if N < 1:
        raise DomainError("need at least one pair")
    if not 0 <= r <= N:
        raise DomainError(f"round count {r} outside [0, {N}]")
    rounds = []
    for i in range(r):
        n_bits = 2 * (N - i)
        mask = ParityMask(_random_mask(n_bits, rng), n_bits)
        rounds.append(ParityRound(mask, mask.pairs()[0]))
    return ParityPlan(N, tuple(rounds))


def required_rounds(N: int, S0: float, delta: float, zeta_target: float) -> int:
    """Smallest ``r`` with ``2**(N(S0+delta) - r) <= zeta_target``."""
    if zeta_target <= 0:
        raise DomainError("zeta target must be positive")
    x = N * (S0 + delta) - math.log2(zeta_target)
    return max(0, math.ceil(x - 1e-9))


def make_plan(N: int, S0: float, delta: float, zeta_target: float,
              rng: np.random.Generator) -> ParityPlan:
    """Random parity plan sized so the nominal collision bound is ``zeta_target``.

    If the sizing rule needs ``r >= N`` rounds a :class:`ZeroYieldWarning` is
    issued and a plan with ``N`` rounds (no surviving pairs) is returned.
    """
    if not 0 <= S0 <= 2 or delta < 0:
        raise DomainError("need 0 <= S0 <= 2 and delta >= 0")
    r = required_rounds(N, S0, delta, zeta_target)
    if r >= N:
        warnings.warn(f"hashing needs r={r} >= N={N} rounds: no yield", ZeroYieldWarning, stacklevel=2)
    plan = random_plan(N, min(r, N), rng)
    return ParityPlan(N, plan.rounds, S0=S0, delta=delta, r_required=r)


def asymptotic_yield(N: int, S0: float) -> int:
    """Number of pairs ``max(0, floor(N (1 - S0)))`` left by asymptotic hashing."""
    return max(0, math.floor(N * (1.0 - S0) + 1e-9))


# --------------------------------------------------------------------------
# string tables


def _type_counts(codes: np.ndarray, n: int) -> np.ndarray:
    counts = np.zeros((codes.shape[0], 4), dtype=np.int64)
    for k in range(n):
        digit = (codes >> (2 * k)) & 3
        for j in range(4):
            counts[:, j] += digit == j
    return counts


def _table_probs(d: Density, codes: np.ndarray, n: int) -> np.ndarray:
    """Predictive probability of each string, grouped by label type."""
    counts = _type_counts(codes, n)
    key = (counts[:, 0] * (n + 1) + counts[:, 1]) * (n + 1) + counts[:, 2]
    _, first, inverse = np.unique(key, return_index=True, return_inverse=True)
    types = counts[first]
    masses = d.masses / d.total()
    with np.errstate(divide="ignore"):
        logw = np.log(d.grid.points)
    # 0 ** 0 must be 1: mask those terms out of the log sum
    per_type = np.empty(len(types))
    for t, n_t in enumerate(types):
        used = n_t > 0
        lp = (logw[:, used] * n_t[used]).sum(axis=1)
        per_type[t] = np.dot(masses, np.exp(lp))
    return per_type[inverse.reshape(-1)]


def all_codes(n: int) -> np.ndarray:
    if n > ENUMERATION_CAP:
        raise CapacityError(f"exact enumeration is capped at N={ENUMERATION_CAP}, got {n}")
    return np.arange(4 ** n, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class StringPosterior:
    """Probability table over strings of ``n`` pairs (zero entries omitted)."""

    n: int
    codes: np.ndarray
    probs: np.ndarray

    @classmethod
    def from_density(cls, d: Density, N: int) -> "StringPosterior":
        """Predictive distribution over strings of ``N`` pairs.

        Within the enumeration cap every string is tabulated; above it only
        strings over labels that carry weight somewhere in the prior.
        """
        if N <= ENUMERATION_CAP:
            codes = all_codes(N)
        else:
            if N > MAX_CODE_PAIRS:
                raise CapacityError(f"strings longer than {MAX_CODE_PAIRS} pairs are not supported")
            support = [j for j in range(4) if np.any(d.grid.points[d.masses > 0, j] > 0)]
            if len(support) ** N > SPARSE_SUPPORT_CAP:
                raise CapacityError(
                    f"{len(support)}**{N} reachable strings exceed the sparse cap {SPARSE_SUPPORT_CAP}")
            codes = np.array(sorted(PairString(lab).code for lab in product(support, repeat=N)),
                             dtype=np.int64)
        probs = _table_probs(d, codes, N)
        keep = probs > 0
        return cls(N, codes[keep], probs[keep] / probs[keep].sum())

    @classmethod
    def from_dict(cls, table: dict) -> "StringPosterior":
        ns = {s.n for s in table}
        if len(ns) != 1:
            raise DomainError("all strings must have the same length")
        items = sorted((s.code, p) for s, p in table.items() if p > 0)
        codes = np.array([c for c, _ in items], dtype=np.int64)
        probs = np.array([p for _, p in items], dtype=float)
        return cls(ns.pop(), codes, probs / probs.sum())

    def as_dict(self) -> dict[PairString, float]:
        return {PairString.from_code(c, self.n): float(p) for c, p in zip(self.codes, self.probs)}

    def prob(self, s: PairString) -> float:
        i = np.searchsorted(self.codes, s.code)
        if i < len(self.codes) and self.codes[i] == s.code:
            return float(self.probs[i])
        return 0.0

    def dense(self) -> np.ndarray:
        out = np.zeros(4 ** self.n)
        out[self.codes] = self.probs
        return out

    def mode(self) -> tuple[PairString, float]:
        i = int(np.argmax(self.probs))
        return PairString.from_code(int(self.codes[i]), self.n), float(self.probs[i])

    def entropy(self) -> float:
        p = self.probs[self.probs > 0]
        return float(max(0.0, -(p * np.log2(p)).sum()))

    def parity_prob(self, mask: ParityMask, observed: int) -> float:
        return float(self.probs[_parities(self.codes, mask.value) == observed].sum())


def condition_on_parity(post: StringPosterior, mask: ParityMask, target: int,
                        observed: int) -> StringPosterior:
    """Condition on an observed parity and discard the target pair."""
    if mask.n_bits != 2 * post.n:
        raise DomainError(f"mask has {mask.n_bits} bits, posterior strings have {2 * post.n}")
    if not 0 <= target < post.n:
        raise DomainError(f"target pair {target} out of range for {post.n} pairs")
    keep = _parities(post.codes, mask.value) == int(observed)
    ev = post.probs[keep].sum()
    if not ev > 0:
        raise DegeneratePosteriorError(f"parity {observed} has zero probability")
    reduced = _drop_pair(post.codes[keep], target, post.n)
    codes, inverse = np.unique(reduced, return_inverse=True)
    probs = np.bincount(inverse.reshape(-1), weights=post.probs[keep], minlength=len(codes))
    return StringPosterior(post.n - 1, codes, probs / ev)


# --------------------------------------------------------------------------
# typical sets and acceptance


def type_entropy(counts) -> np.ndarray:
    """Entropy in bits of empirical label frequencies (rows of counts)."""
    counts = np.atleast_2d(np.asarray(counts, dtype=float))
    freq = counts / counts.sum(axis=1, keepdims=True)
    return np.atleast_1d(entropy(freq))


def is_typical(s: PairString | Iterable[int], S0: float, delta: float) -> bool:
    """Streaming membership test for the type-class typical set (any length)."""
    labels = list(s)
    counts = np.bincount(labels, minlength=4)
    return bool(type_entropy(counts)[0] <= S0 + delta + TYPE_ENTROPY_TOL)


def _compositions(N: int):
    for a in range(N + 1):
        for b in range(N + 1 - a):
            for c in range(N + 1 - a - b):
                yield (a, b, c, N - a - b - c)


def typical_types(N: int, S0: float, delta: float) -> list[tuple[int, int, int, int]]:
    """Label counts whose empirical entropy is at most ``S0 + delta``."""
    types = list(_compositions(N))
    ent = type_entropy(types)
    return [t for t, s in zip(types, ent) if s <= S0 + delta + TYPE_ENTROPY_TOL]


@dataclass(frozen=True, eq=False)
class TypicalSet:
    """Strings whose empirical pair-type entropy is at most ``S0 + delta``."""

    N: int
    S0: float
    delta: float
    codes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.codes)

    def __contains__(self, s: PairString) -> bool:
        if s.n != self.N:
            return False
        i = np.searchsorted(self.codes, s.code)
        return bool(i < len(self.codes) and self.codes[i] == s.code)

    @property
    def members(self) -> list[PairString]:
        return [PairString.from_code(int(c), self.N) for c in self.codes]

    def coverage(self, w) -> float:
        """Probability ``sum_{i in CK} p(i|w)`` under the i.i.d. source ``w``."""
        return typical_coverage(self.N, self.S0, self.delta, w)


def typical_coverage(N: int, S0: float, delta: float, w) -> float:
    """Coverage of the typical set for source ``w`` via its type classes."""
    w = np.asarray(w, dtype=float)
    total = 0.0
    for t in typical_types(N, S0, delta):
        logc = math.lgamma(N + 1) - sum(math.lgamma(k + 1) for k in t)
        if any(k > 0 and w[j] == 0 for j, k in enumerate(t)):
            continue
        total += math.exp(logc + sum(k * math.log(w[j]) for j, k in enumerate(t) if k > 0))
    return min(1.0, total)


def typical_set(N: int, S0: float, delta: float, cap: int = ENUMERATION_CAP) -> TypicalSet:
    """Enumerate the type-class typical set of ``N``-pair strings.

    Raises
    ------
    CapacityError
        Above ``cap`` pairs; use :func:`is_typical` instead.
    """
    if N > cap:
        raise CapacityError(f"typical set enumeration is capped at N={cap}; use is_typical()")
    codes = all_codes(N)
    ent = type_entropy(_type_counts(codes, N))
    return TypicalSet(N, S0, delta, codes[ent <= S0 + delta + TYPE_ENTROPY_TOL])


@dataclass(frozen=True)
class AcceptReport:
    """Accept/reject decision for every outcome reachable from a typical input.

    ``entries`` maps an outcome string (as an integer, first bit most
    significant) to ``(accepted, output)``; ``output`` is the common output
    substring of accepted outcomes and ``None`` otherwise.
    """

    r: int
    n_out: int
    entries: dict

    def accepted_outcomes(self) -> list[int]:
        return [o for o, (acc, _) in self.entries.items() if acc]

    def output_for(self, outcome: int) -> PairString | None:
        acc, out = self.entries.get(outcome, (False, None))
        return out if acc else None

    def lookup_table(self) -> np.ndarray:
        """Array over all ``2**r`` outcomes: accepted output code, or -1."""
        table = np.full(1 << self.r, -1, dtype=np.int64)
        for o, (acc, out) in self.entries.items():
            if acc:
                table[o] = out.code
        return table


def accept_report(plan: ParityPlan, ck: TypicalSet) -> AcceptReport:
    """Accept an outcome iff all typical inputs producing it share one output."""
    if ck.N != plan.N:
        raise DomainError("typical set and plan disagree on N")
    outcomes, outputs = plan.apply_codes(ck.codes)
    n_out = plan.N - plan.r
    entries = {}
    order = np.lexsort((outputs, outcomes))
    outcomes, outputs = outcomes[order], outputs[order]
    starts = np.flatnonzero(np.r_[True, outcomes[1:] != outcomes[:-1]])
    ends = np.r_[starts[1:], len(outcomes)]
    for a, b in zip(starts, ends):
        unique = outputs[a] == outputs[b - 1]
        out = PairString.from_code(int(outputs[a]), n_out) if unique else None
        entries[int(outcomes[a])] = (bool(unique), out)
    return AcceptReport(plan.r, n_out, entries)


@dataclass(frozen=True)
class HashingStats:
    """Exact quantities for one plan under one prior.

    ``success`` is ``p(success|h)``; ``p_typical`` is the prior mass of the
    typical set; ``zeta_eff`` is the mass-weighted fraction of typical inputs
    that land on a rejected outcome; ``accepted_mass`` is ``p(accept|h)``.
    """

    success: float
    p_typical: float
    zeta_eff: float
    accepted_mass: float
    n_accepted: int


def hashing_stats(d: Density, plan: ParityPlan, ck: TypicalSet,
                  table: StringPosterior | None = None) -> HashingStats:
    if table is None:
        table = StringPosterior.from_density(d, plan.N)
    report = accept_report(plan, ck)
    lookup = report.lookup_table()
    outcomes, outputs = plan.apply_codes(table.codes)
    accepted_out = lookup[outcomes]
    accepted = accepted_out >= 0
    success = float(table.probs[accepted & (accepted_out == outputs)].sum())
    in_ck = np.isin(table.codes, ck.codes, assume_unique=True)
    p_ck = float(table.probs[in_ck].sum())
    typ_acc = float(table.probs[in_ck & accepted].sum())
    zeta_eff = 1.0 - typ_acc / p_ck if p_ck > 0 else 1.0
    return HashingStats(success, p_ck, max(0.0, zeta_eff), float(table.probs[accepted].sum()),
                        len(report.accepted_outcomes()))


def success_probability(d: Density, plan: ParityPlan, ck: TypicalSet,
                        table: StringPosterior | None = None) -> float:
    """Exact ``p(success|h)``: mass of inputs whose outcome is accepted with their own output."""
    return hashing_stats(d, plan, ck, table).success


def epsilon_measured(d: Density, ck: TypicalSet) -> float:
    """Worst typical-set miss probability over supported states with ``S_w < S0``.

    Returns 1.0 when the prior puts no mass below ``S0``.
    """
    g = d.grid
    low = (d.masses > 0) & (g.entropies < ck.S0)
    if not low.any():
        return 1.0
    return max(1.0 - ck.coverage(w) for w in g.points[low])


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass
class HashingRun:
    """One simulated execution of a parity plan."""

    true_string: PairString
    true_output: PairString
    outcomes: tuple[int, ...]
    posterior: StringPosterior
    success: bool
    rounds: list[dict]
    accepted: bool | None = None
    accept_success: bool | None = None

    RECORD_COLUMNS = ("round", "mask_hex", "target_pair", "outcome", "posterior_entropy")

    def rows(self) -> list[list]:
        return [[r[c] for c in self.RECORD_COLUMNS] for r in self.rounds]


def simulate_hashing(d: Density, plan: ParityPlan, rng: np.random.Generator, *,
                     success_mass: float = DEFAULT_SUCCESS_MASS,
                     ck: TypicalSet | None = None,
                     initial: StringPosterior | None = None,
                     report: AcceptReport | None = None) -> HashingRun:
    """Sample a true string from the prior and run ``plan`` on it.

    Success means the final posterior mode is the true remaining substring
    and carries at least ``success_mass``.  When a typical set is given the
    run is also scored by the accept rule (``accept_success``).
    """
    node = d.sample_nodes(rng)
    w = d.grid.points[node]
    true = PairString(tuple(int(x) for x in rng.choice(4, size=plan.N, p=w / w.sum())))
    post = initial if initial is not None else StringPosterior.from_density(d, plan.N)
    code, n = true.code, plan.N
    records, outcomes = [], []
    for i, rnd in enumerate(plan.rounds):
        o = (rnd.mask.value & code).bit_count() & 1
        post = condition_on_parity(post, rnd.mask, rnd.target, o)
        code = _drop_pair(code, rnd.target, n)
        n -= 1
        outcomes.append(o)
        records.append({"round": i, "mask_hex": rnd.mask.hex, "target_pair": rnd.target,
                        "outcome": o, "posterior_entropy": post.entropy()})
    out = PairString.from_code(code, n)
    mode, mass = post.mode()
    run = HashingRun(true, out, tuple(outcomes), post, mode == out and mass >= success_mass, records)
    if ck is not None or report is not None:
        if report is None:
            report = accept_report(plan, ck)
        o_int = 0
        for o in outcomes:
            o_int = (o_int << 1) | o
        acc_out = report.output_for(o_int)
        run.accepted = acc_out is not None
        run.accept_success = acc_out == out
    return run

"""Generalized conjugacy search instances and the length-based attack.

An instance hides ``x`` (a product of ``k`` random subgroup generators
``a_j^{±1}``) behind the conjugates ``c_i = x b_i x⁻¹``.  The attack peels
candidate prefixes ``g`` off every conjugate, scoring ``g⁻¹ c_i g`` with a
length function and keeping the best-ranked candidate.

Spellings are tuples of signed generator indices: ``j`` is ``a_j`` and ``-j``
its inverse.  Candidate order is ``a_1..a_m, a_1⁻¹..a_m⁻¹``, extended
lexicographically to prefixes; that order is also the tie-break.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels
from .braid import BraidWord, BraidParseError, Garside, _check_same, braid_equal, conjugate, format_word, parse_word
from .lengths import LengthFunction
from .orderings import Ordering, RankedCandidates, rank_candidates

Spelling = tuple[int, ...]


@dataclass(frozen=True)
class InstanceParams:
    strands: int = 81
    m: int = 20
    n: int = 20
    gen_len_a: int = 10
    gen_len_b: int = 10
    secret_len: int = 5
    seed: int | None = 0

    def __post_init__(self):
        if self.strands < 2:
            raise ValueError("strands must be at least 2")
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if self.gen_len_a < 1 or self.gen_len_b < 1:
            raise ValueError("generator lengths must be positive")
        if self.secret_len < 0:
            raise ValueError("secret_len must be nonnegative")


@dataclass(frozen=True)
class GcspInstance:
    params: InstanceParams
    generators: tuple[BraidWord, ...]
    bases: tuple[BraidWord, ...]
    conjugates: tuple[BraidWord, ...]
    secret: BraidWord | None = None
    spelling: Spelling | None = None

    @property
    def strands(self) -> int:
        return self.params.strands

    def without_secret(self) -> GcspInstance:
        return replace(self, secret=None, spelling=None)

    def verify(self) -> bool:
        """Check c_i = x b_i x⁻¹ and that the spelling multiplies out to x."""
        if self.secret is None:
            return True
        if self.spelling is not None and spelling_word(self.generators, self.spelling) != self.secret:
            return False
        return all(braid_equal(c, conjugate(self.secret, b)) for b, c in zip(self.bases, self.conjugates))


# -- sampling ------------------------------------------------------------------


def sample_artin_word(n: int, length: int, rng: np.random.Generator) -> BraidWord:
    """``length`` letters drawn uniformly from the 2(N-1) signed Artin generators."""
    idx = rng.integers(0, 2 * (n - 1), size=length)
    letters = np.where(idx < n - 1, idx + 1, -(idx - (n - 1) + 1))
    return BraidWord(n, tuple(int(x) for x in letters))


def symbol_order(m: int) -> list[int]:
    return [*range(1, m + 1), *range(-1, -m - 1, -1)]


def spelling_word(generators: Sequence[BraidWord], spelling: Sequence[int]) -> BraidWord:
    n = generators[0].strands
    letters: list[int] = []
    for s in spelling:
        g = generators[abs(s) - 1].letters
        letters.extend(g if s > 0 else (-x for x in reversed(g)))
    return BraidWord(n, tuple(letters))


def invert_spelling(spelling: Sequence[int]) -> Spelling:
    return tuple(-s for s in reversed(spelling))


def sample_spelling(m: int, k: int, rng: np.random.Generator) -> Spelling:
    symbols = symbol_order(m)
    return tuple(symbols[i] for i in rng.integers(0, 2 * m, size=k))


def sample_secret(generators: Sequence[BraidWord], k: int, rng: np.random.Generator) -> tuple[BraidWord, Spelling]:
    spelling = sample_spelling(len(generators), k, rng)
    if not spelling:
        return BraidWord(generators[0].strands, ()), spelling
    return spelling_word(generators, spelling), spelling


def build_instance(params: InstanceParams, rng: np.random.Generator | None = None) -> GcspInstance:
    if rng is None:
        rng = np.random.default_rng(params.seed)
    n = params.strands
    gens = tuple(sample_artin_word(n, params.gen_len_a, rng) for _ in range(params.m))
    bases = tuple(sample_artin_word(n, params.gen_len_b, rng) for _ in range(params.n))
    x, spelling = sample_secret(gens, params.secret_len, rng)
    conj = tuple(conjugate(x, b) for b in bases)
    return GcspInstance(params, gens, bases, conj, x, spelling)


def candidate_prefixes(m: int, t: int, prune: bool = True) -> list[Spelling]:
    """All length-t symbol sequences; with ``prune`` no symbol is followed by its inverse."""
    if t < 1:
        raise ValueError("look-ahead depth must be at least 1")
    out = []
    for p in itertools.product(symbol_order(m), repeat=t):
        if prune and any(a == -b for a, b in zip(p, p[1:])):
            continue
        out.append(p)
    return out


# -- packed conjugate tuples ---------------------------------------------------


@dataclass(frozen=True)
class Runs:
    """A word split into signed permutation-braid runs, as the kernels consume it."""

    signs: np.ndarray
    perms: np.ndarray

    @classmethod
    def of(cls, w: BraidWord) -> Runs:
        s, p = _kernels.simple_runs(w.as_array(), w.strands)
        return cls(s, p)


def _pack_runs(runs: Sequence[Runs], n: int):
    offsets = np.zeros(len(runs) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(r.signs) for r in runs])
    if runs:
        signs = np.concatenate([r.signs for r in runs])
        perms = np.concatenate([r.perms for r in runs])
    else:
        signs = np.empty(0, np.int64)
        perms = np.empty((0, n), _kernels.DTYPE)
    return offsets, signs, perms


@dataclass(frozen=True, eq=False)
class ConjugateSet:
    """Normal forms of a tuple of braids packed into flat arrays."""

    strands: int
    infs: np.ndarray
    offsets: np.ndarray
    rows: np.ndarray

    @classmethod
    def from_garsides(cls, forms: Sequence[Garside]) -> ConjugateSet:
        n = _check_same(*(f.strands for f in forms))
        offsets = np.zeros(len(forms) + 1, dtype=np.int64)
        offsets[1:] = np.cumsum([f.rows.shape[0] for f in forms])
        rows = np.concatenate([f.rows for f in forms]) if forms else np.empty((0, n), _kernels.DTYPE)
        return cls(n, np.array([f.inf for f in forms], dtype=np.int64), offsets, rows)

    @classmethod
    def from_words(cls, words: Sequence[BraidWord]) -> ConjugateSet:
        return cls.from_garsides([Garside.of(w) for w in words])

    def __len__(self) -> int:
        return len(self.infs)

    def garsides(self) -> list[Garside]:
        return [
            Garside(self.strands, int(self.infs[i]), self.rows[self.offsets[i]:self.offsets[i + 1]])
            for i in range(len(self))
        ]

    def conjugated_by(self, g: Runs) -> ConjugateSet:
        """Every c replaced by g⁻¹·c·g."""
        infs, offsets, rows = _kernels.batch_conjugate(self.infs, self.offsets, self.rows, g.signs, g.perms)
        return ConjugateSet(self.strands, infs, offsets, rows)

    def conjugate_lengths(self, candidates: Sequence[Runs]) -> tuple[np.ndarray, np.ndarray]:
        """(ℓ_G, ℓ_RG) matrices of g⁻¹·c·g, shape (len(candidates), len(self))."""
        offsets, signs, perms = _pack_runs(candidates, self.strands)
        return _kernels.batch_conjugate_lengths(self.infs, self.offsets, self.rows, offsets, signs, perms)

    def lengths(self) -> tuple[np.ndarray, np.ndarray]:
        identity = Runs(np.empty(0, np.int64), np.empty((0, self.strands), _kernels.DTYPE))
        lg, lrg = self.conjugate_lengths([identity])
        return lg[0], lrg[0]

    def state_key(self) -> tuple[bytes, ...]:
        """Order-independent fingerprint of the multiset of normal forms."""
        return tuple(sorted(
            int(self.infs[i]).to_bytes(8, "little", signed=True)
            + self.rows[self.offsets[i]:self.offsets[i + 1]].tobytes()
            for i in range(len(self))
        ))

    def matches(self, others: Sequence[Garside]) -> bool:
        return len(others) == len(self) and all(a == b for a, b in zip(self.garsides(), others))


class SymbolTable:
    """Cached runs for every generator symbol and prefix of an instance."""

    def __init__(self, generators: Sequence[BraidWord]):
        self.generators = tuple(generators)
        self.m = len(generators)
        self.strands = generators[0].strands
        self._cache: dict[Spelling, Runs] = {}

    def runs(self, spelling: Sequence[int]) -> Runs:
        key = tuple(spelling)
        r = self._cache.get(key)
        if r is None:
            if key:
                r = Runs.of(spelling_word(self.generators, key))
            else:
                r = Runs(np.empty(0, np.int64), np.empty((0, self.strands), _kernels.DTYPE))
            self._cache[key] = r
        return r


def score_prefixes(
    cset: ConjugateSet, table: SymbolTable, t: int, prune: bool = True, _last: int | None = None
) -> tuple[list[Spelling], np.ndarray, np.ndarray]:
    """Length matrices for every candidate prefix of depth ``t``, in candidate order.

    Deeper prefixes reuse the conjugates already stripped of their first
    symbol, so depth t costs one conjugation per tree node.
    """
    symbols = [s for s in symbol_order(table.m) if not (prune and _last is not None and s == -_last)]
    if t == 1:
        lg, lrg = cset.conjugate_lengths([table.runs((s,)) for s in symbols])
        return [(s,) for s in symbols], lg, lrg
    prefixes: list[Spelling] = []
    lgs, lrgs = [], []
    for s in symbols:
        sub = cset.conjugated_by(table.runs((s,)))
        p, lg, lrg = score_prefixes(sub, table, t - 1, prune, s)
        prefixes.extend((s, *q) for q in p)
        lgs.append(lg)
        lrgs.append(lrg)
    return prefixes, np.concatenate(lgs), np.concatenate(lrgs)


# -- the attack ----------------------------------------------------------------


class Peel(str, enum.Enum):
    WHOLE = "whole"
    FIRST_LETTER = "first-letter"


class LoopPolicy(str, enum.Enum):
    NONE = "none"
    RESTART = "restart"


@dataclass(frozen=True)
class AttackConfig:
    length_fn: LengthFunction = LengthFunction.REDUCED_GARSIDE
    ordering: Ordering = Ordering.AVERAGE
    lookahead: int = 1
    peel: Peel = Peel.WHOLE
    max_steps: int = 1000
    loop_policy: LoopPolicy = LoopPolicy.NONE
    restart_len: int = 2
    seed: int = 0
    prune: bool = True
    budget: int | None = None  # overrides the instance's secret length

    def __post_init__(self):
        object.__setattr__(self, "length_fn", LengthFunction.parse(self.length_fn))
        object.__setattr__(self, "ordering", Ordering.parse(self.ordering))
        object.__setattr__(self, "peel", Peel(self.peel))
        object.__setattr__(self, "loop_policy", LoopPolicy(self.loop_policy))
        if self.lookahead < 1:
            raise ValueError("lookahead must be at least 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.restart_len < 1:
            raise ValueError("restart_len must be at least 1")


@dataclass(frozen=True)
class StepRecord:
    prefix: Spelling  # top-ranked candidate
    peeled: Spelling  # symbols actually removed this step
    ranking: RankedCandidates
    candidates: list[Spelling] = field(repr=False)
    restart: Spelling | None = None  # y, when a loop triggered a restart after this step


@dataclass(frozen=True)
class AttackResult:
    success: bool
    spelling: Spelling
    word: BraidWord
    trace: list[StepRecord] = field(repr=False)
    steps: int
    restarts: int


def attack_step(
    conjugates: ConjugateSet | Sequence[BraidWord],
    generators: Sequence[BraidWord] | SymbolTable,
    config: AttackConfig,
    depth: int | None = None,
) -> tuple[Spelling, RankedCandidates, list[Spelling]]:
    """Rank all candidate prefixes; return (symbols to peel, ranking, candidates)."""
    cset = conjugates if isinstance(conjugates, ConjugateSet) else ConjugateSet.from_words(conjugates)
    if len(cset) == 0:
        raise ValueError("need at least one conjugate")
    table = generators if isinstance(generators, SymbolTable) else SymbolTable(generators)
    _check_same(cset.strands, table.strands)
    t = config.lookahead if depth is None else depth
    prefixes, lg, lrg = score_prefixes(cset, table, t, config.prune)
    vectors = lrg if config.length_fn is LengthFunction.REDUCED_GARSIDE else lg
    ranking = rank_candidates(vectors, config.ordering)
    top = prefixes[ranking.best]
    chosen = top if config.peel is Peel.WHOLE else top[:1]
    return chosen, ranking, prefixes


def _budget(instance: GcspInstance, config: AttackConfig) -> int:
    if config.budget is not None:
        return config.budget
    if instance.spelling is not None:
        return len(instance.spelling)
    return instance.params.secret_len


def run_attack(instance: GcspInstance, config: AttackConfig) -> AttackResult:
    """Peel prefixes until the known number of generators has been removed."""
    table = SymbolTable(instance.generators)
    cset = ConjugateSet.from_words(instance.conjugates)
    targets = [Garside.of(b) for b in instance.bases]
    needed = _budget(instance, config)
    rng = np.random.default_rng(config.seed)
    recovered: list[int] = []
    trace: list[StepRecord] = []
    seen = {cset.state_key()}
    peeled = steps = restarts = 0

    while peeled < needed and steps < config.max_steps:
        depth = min(config.lookahead, needed - peeled)
        chosen, ranking, prefixes = attack_step(cset, table, config, depth)
        cset = cset.conjugated_by(table.runs(chosen))
        recovered.extend(chosen)
        peeled += len(chosen)
        steps += 1
        restart = None
        key = cset.state_key()
        if config.loop_policy is LoopPolicy.RESTART and key in seen and peeled < needed:
            # y·c·y⁻¹ is g⁻¹·c·g with g = y⁻¹; x̂ absorbs y⁻¹
            restart = sample_spelling(table.m, config.restart_len, rng)
            y_inv = invert_spelling(restart)
            cset = cset.conjugated_by(table.runs(y_inv))
            recovered.extend(y_inv)
            needed += len(restart)
            restarts += 1
            key = cset.state_key()
        seen.add(key)
        trace.append(StepRecord(prefixes[ranking.best], chosen, ranking, prefixes, restart))

    success = peeled >= needed and cset.matches(targets)
    spelling = tuple(recovered)
    word = spelling_word(instance.generators, spelling) if spelling else BraidWord(instance.strands, ())
    return AttackResult(success, spelling, word, trace, steps, restarts)


def correct_generator_rank(instance: GcspInstance, config: AttackConfig) -> int | None:
    """1-based rank of the secret's leading prefix in the first-step ranking.

    Returns None when the secret's prefix is not among the candidates, which
    happens when pruning removed it.
    """
    if instance.spelling is None:
        raise ValueError("instance has no secret spelling")
    t = min(config.lookahead, len(instance.spelling))
    if t == 0:
        raise ValueError("empty secret has no leading generator")
    _, ranking, prefixes = attack_step(instance.conjugates, instance.generators, config, t)
    target = tuple(instance.spelling[:t])
    try:
        idx = prefixes.index(target)
    except ValueError:
        return None
    return ranking.position(idx)


# -- instance files ------------------------------------------------------------


class InstanceFormatError(ValueError):
    pass


_SECTIONS = ("params", "generators", "bases", "conjugates", "secret")


def dump_instance(instance: GcspInstance, include_secret: bool = True) -> str:
    lines = ["[params]"]
    for k, v in asdict(instance.params).items():
        lines.append(f"{k} = {v}")
    for name, words in (("generators", instance.generators), ("bases", instance.bases),
                        ("conjugates", instance.conjugates)):
        lines.append(f"[{name}]")
        lines.extend(format_word(w) for w in words)
    if include_secret and instance.secret is not None:
        lines.append("[secret]")
        lines.append(format_word(instance.secret))
        if instance.spelling is not None:
            lines.append(" ".join(["spelling", *map(str, instance.spelling)]))
    return "\n".join(lines) + "\n"


def load_instance(text: str) -> GcspInstance:
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTIONS:
                raise InstanceFormatError(f"line {lineno}: unknown section [{current}]")
            sections[current] = []
            continue
        if current is None:
            raise InstanceFormatError(f"line {lineno}: content before the first section")
        sections[current].append((lineno, raw))
    for required in ("generators", "bases", "conjugates"):
        if not sections.get(required):
            raise InstanceFormatError(f"missing section [{required}]")

    def words(name):
        return tuple(parse_word(raw, lineno) for lineno, raw in sections[name])

    gens, bases, conj = words("generators"), words("bases"), words("conjugates")
    if len(bases) != len(conj):
        raise InstanceFormatError(f"{len(bases)} bases but {len(conj)} conjugates")
    n = _check_same(*(w.strands for w in gens + bases + conj))

    values = {}
    for lineno, raw in sections.get("params", []):
        key, sep, val = raw.partition("=")
        if not sep:
            raise InstanceFormatError(f"line {lineno}: expected key = value")
        values[key.strip()] = val.strip()

    secret = spelling = None
    for lineno, raw in sections.get("secret", []):
        if raw.strip().startswith("spelling"):
            try:
                spelling = tuple(int(t) for t in raw.split()[1:])
            except ValueError:
                raise InstanceFormatError(f"line {lineno}: bad spelling") from None
            if any(s == 0 or abs(s) > len(gens) for s in spelling):
                raise InstanceFormatError(f"line {lineno}: spelling symbol out of range")
        else:
            secret = parse_word(raw, lineno)

    def intval(key, default):
        v = values.get(key)
        if v is None or v == "None":
            return default
        try:
            return int(v)
        except ValueError:
            raise InstanceFormatError(f"parameter {key} is not an integer: {v!r}") from None

    params = InstanceParams(
        strands=n,
        m=len(gens),
        n=len(bases),
        gen_len_a=intval("gen_len_a", max(len(gens[0]), 1)),
        gen_len_b=intval("gen_len_b", max(len(bases[0]), 1)),
        secret_len=intval("secret_len", len(spelling) if spelling is not None else 0),
        seed=intval("seed", None),
    )
    return GcspInstance(params, gens, bases, conj, secret, spelling)


__all__ = [
    "AttackConfig",
    "AttackResult",
    "BraidParseError",
    "ConjugateSet",
    "GcspInstance",
    "InstanceFormatError",
    "InstanceParams",
    "LoopPolicy",
    "Peel",
    "Runs",
    "StepRecord",
    "SymbolTable",
    "attack_step",
    "build_instance",
    "candidate_prefixes",
    "correct_generator_rank",
    "dump_instance",
    "invert_spelling",
    "load_instance",
    "run_attack",
    "sample_artin_word",
    "sample_secret",
    "sample_spelling",
    "score_prefixes",
    "spelling_word",
    "symbol_order",
]

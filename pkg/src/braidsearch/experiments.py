"""Seeded Monte Carlo experiments with CSV reports.

Every trial draws from its own random stream, derived from the master seed,
a hash of the cell's parameters and the trial index.  Results are merged in
cell order, so reports do not depend on the number of worker processes and a
cell's numbers do not depend on which other cells are in the grid.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from . import __version__
from .braid import BraidWord, Garside
from .gcsp import (
    AttackConfig,
    ConjugateSet,
    InstanceParams,
    SymbolTable,
    build_instance,
    run_attack,
    sample_artin_word,
    sample_spelling,
    score_prefixes,
    spelling_word,
    symbol_order,
)
from .lengths import LengthFunction
from .orderings import Ordering, rank_candidates


class ExperimentKind(str, enum.Enum):
    RANK_PROBABILITY = "rank_probability"
    ASYMMETRIC_LENGTHS = "asymmetric_lengths"
    FIND_X = "find_x"
    GROWTH_CURVES = "growth_curves"
    SEPARATION_STAT = "separation_stat"
    RANK_DISTRIBUTION = "rank_distribution"
    LENGTH_DISTRIBUTION = "length_distribution"
    SAMPLE_CONVERGENCE = "sample_convergence"


INSTANCE_DIMS = ("strands", "m", "n", "gen_len_a", "gen_len_b", "secret_len")


@dataclass(frozen=True)
class ExperimentSpec:
    """What to run: a parameter grid, a trial count per cell and a master seed.

    ``grid`` maps a dimension name to the list of values it takes; cells are
    the cartesian product in the order of ``grid``.  ``options`` holds
    kind-specific scalar settings.
    """

    kind: ExperimentKind
    grid: dict[str, list]
    trials: int
    seed: int = 0
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", ExperimentKind(self.kind))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.grid or any(len(v) == 0 for v in self.grid.values()):
            raise ValueError("grid must be nonempty in every dimension")

    def cells(self) -> list[dict[str, Any]]:
        keys = list(self.grid)
        return [dict(zip(keys, vals)) for vals in itertools.product(*(self.grid[k] for k in keys))]

    def option(self, name: str, default=None):
        return self.options.get(name, default)

    def to_json(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_json(cls, d: dict) -> ExperimentSpec:
        return cls(kind=d["kind"], grid={k: list(v) for k, v in d["grid"].items()},
                   trials=int(d["trials"]), seed=int(d.get("seed", 0)), options=dict(d.get("options", {})))


@dataclass(frozen=True)
class Record:
    cell: dict[str, Any]
    statistic: str
    value: float | None
    count: int | None = None
    trials: int | None = None
    stderr: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    flag: str = ""


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    columns: list[str]
    records: list[Record]
    runtime: float = 0.0

    def select(self, statistic: str, **where) -> list[Record]:
        return [r for r in self.records if r.statistic == statistic
                and all(r.cell.get(k) == v for k, v in where.items())]

    def value(self, statistic: str, **where) -> float | None:
        rows = self.select(statistic, **where)
        if len(rows) != 1:
            raise KeyError(f"{len(rows)} records match {statistic} {where}")
        return rows[0].value

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*self.columns, "statistic", "value", "count", "trials", "stderr", "ci_low", "ci_high", "flag"])
        for r in self.records:
            w.writerow([*(_fmt(r.cell.get(c, "")) for c in self.columns), r.statistic, _fmt(r.value),
                        _fmt(r.count), _fmt(r.trials), _fmt(r.stderr), _fmt(r.ci_low), _fmt(r.ci_high), r.flag])
        return buf.getvalue()

    def metadata(self, extra: dict | None = None) -> dict:
        meta = {"spec": self.spec.to_json(), "seed": self.spec.seed, "version": version_string(),
                "wall_clock_seconds": round(self.runtime, 3)}
        if extra:
            meta.update(extra)
        return meta

    def write(self, out_dir: str | Path, name: str, extra_meta: dict | None = None) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{name}.csv"
        meta_path = out / f"{name}.meta.json"
        csv_path.write_text(self.to_csv())
        meta_path.write_text(json.dumps(self.metadata(extra_meta), indent=2, sort_keys=True) + "\n")
        return csv_path, meta_path


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return "nan"
        return f"{float(v):.6g}"
    return str(v)


def version_string() -> str:
    import subprocess

    try:
        rev = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
                             cwd=Path(__file__).resolve().parent, timeout=5)
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{__version__}+g{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


# -- statistics ----------------------------------------------------------------


def wilson_interval(count: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    p = count / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def proportion(cell: dict, statistic: str, count: int, trials: int) -> Record:
    """Estimate with binomial standard error; Wilson interval for rare events."""
    p = count / trials
    se = math.sqrt(p * (1 - p) / trials)
    if min(count, trials - count) < 10:
        lo, hi = wilson_interval(count, trials)
        flag = "wilson"
    else:
        lo, hi = max(0.0, p - 1.96 * se), min(1.0, p + 1.96 * se)
        flag = "normal"
    return Record(cell, statistic, p, count, trials, se, lo, hi, flag)


def mean_record(cell: dict, statistic: str, values: Sequence[float]) -> Record:
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else None
    return Record(cell, statistic, float(v.mean()), None, len(v), se)


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    if len(set(x)) < 2 or len(set(y)) < 2:
        return float("nan")
    # rank correlations on small grids are short rationals; drop float noise like 0.8999999999999998
    return round(float(stats.spearmanr(x, y).statistic), 12)


def stabilization_index(values: Sequence[float], band: float) -> int:
    """Smallest n after which the running mean stays within ``band`` (relative) of the final mean."""
    v = np.asarray(values, dtype=float)
    running = np.cumsum(v) / np.arange(1, len(v) + 1)
    final = running[-1]
    outside = np.abs(running - final) > band * abs(final)
    bad = np.flatnonzero(outside)
    return 1 if len(bad) == 0 else int(bad[-1]) + 2


def first_increase(means: Sequence[float], stderrs: Sequence[float | None], base: float, z: float = 3.0) -> int | None:
    """First abscissa (1-based position in ``means``) whose mean exceeds ``base`` by z standard errors."""
    for j, (mu, se) in enumerate(zip(means, stderrs), start=1):
        if mu - base > z * (se or 0.0):
            return j
    return None


# -- random streams and parallel map -------------------------------------------


def cell_key(cell: dict[str, Any]) -> int:
    blob = json.dumps({k: cell[k] for k in sorted(cell)}, sort_keys=True, default=str).encode()
    return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "little")


def trial_rng(seed: int, cell: dict[str, Any], trial: int | str) -> np.random.Generator:
    if isinstance(trial, str):
        trial = int.from_bytes(hashlib.blake2b(trial.encode(), digest_size=8).digest(), "little")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(cell_key(cell), trial)))


def _parallel_map(fn: Callable, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _instance_params(cell: dict, **defaults) -> InstanceParams:
    base = dict(strands=81, m=20, n=20, gen_len_a=10, gen_len_b=10, secret_len=5)
    base.update(defaults)
    base.update({k: cell[k] for k in INSTANCE_DIMS if k in cell})
    return InstanceParams(**base, seed=None)


def _setup_cell(cell: dict) -> dict:
    """The part of a cell that fixes a shared subgroup (everything but |x| and n)."""
    return {k: v for k, v in cell.items() if k not in ("secret_len", "n")}


def _configs(spec: ExperimentSpec) -> list[tuple[LengthFunction, Ordering]]:
    fns = [LengthFunction.parse(f) for f in spec.option("length_fns", ["g", "rg"])]
    ords = [Ordering.parse(o) for o in spec.option("orderings", ["avg", "maj"])]
    return [(f, o) for f in fns for o in ords]


# -- rank probability (table 1) and asymmetric lengths (table 2) ---------------


def _rank_trial(task) -> dict:
    seed, cell, trial, configs, prune = task
    params = _instance_params(cell)
    inst = build_instance(params, trial_rng(seed, cell, trial))
    t = int(cell.get("lookahead", 1))
    if len(inst.spelling) < t:
        raise ValueError("look-ahead deeper than the secret")
    table = SymbolTable(inst.generators)
    cset = ConjugateSet.from_words(inst.conjugates)
    prefixes, lg, lrg = score_prefixes(cset, table, t, prune)
    target = tuple(inst.spelling[:t])
    idx = prefixes.index(target) if target in prefixes else None
    out = {}
    for fn, order in configs:
        if idx is None:
            out[(fn.value, order.value)] = None
            continue
        ranking = rank_candidates(lrg if fn is LengthFunction.REDUCED_GARSIDE else lg, order)
        out[(fn.value, order.value)] = ranking.position(idx)
    return out


def _rank_report(spec: ExperimentSpec, workers: int) -> ExperimentReport:
    configs = [(f, o) for f, o in _configs(spec)]
    prune = bool(spec.option("prune", True))
    cells = spec.cells()
    tasks = [(spec.seed, cell, i, configs, prune) for cell in cells for i in range(spec.trials)]
    results = _parallel_map(_rank_trial, tasks, workers)
    columns = [*spec.grid, "length_fn", "ordering"]
    records = []
    for ci, cell in enumerate(cells):
        chunk = results[ci * spec.trials:(ci + 1) * spec.trials]
        for fn, order in configs:
            ranks = [r[(fn.value, order.value)] for r in chunk]
            c = {**cell, "length_fn": fn.value, "ordering": order.value}
            records.append(proportion(c, "rank1", sum(1 for r in ranks if r == 1), spec.trials))
            records.append(proportion(c, "rank2", sum(1 for r in ranks if r == 2), spec.trials))
    return ExperimentReport(spec, columns, records)


def exp_rank_probability(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Frequency with which the secret's leading prefix is ranked first and second."""
    _require(spec, ExperimentKind.RANK_PROBABILITY)
    return _timed(lambda: _rank_report(spec, workers))


def exp_asymmetric(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Rank-1 success counts over a grid of generator and base lengths."""
    _require(spec, ExperimentKind.ASYMMETRIC_LENGTHS)

    def run():
        report = _rank_report(spec, workers)
        report.records.extend(_trend_records(spec, report))
        return report

    return _timed(run)


def _trend_records(spec: ExperimentSpec, report: ExperimentReport) -> list[Record]:
    """Spearman ρ of successes against gen_len_a within each gen_len_b row, and of row totals against gen_len_b."""
    out = []
    a_vals = sorted(spec.grid.get("gen_len_a", []))
    b_vals = sorted(spec.grid.get("gen_len_b", []))
    if len(a_vals) < 2:
        return out
    others = [k for k in spec.grid if k not in ("gen_len_a", "gen_len_b")]
    for fn, order in _configs(spec):
        for rest in itertools.product(*(spec.grid[k] for k in others)):
            fixed = dict(zip(others, rest), length_fn=fn.value, ordering=order.value)
            totals = []
            for b in b_vals:
                counts = [report.select("rank1", gen_len_a=a, gen_len_b=b, **fixed)[0].count for a in a_vals]
                totals.append(sum(counts))
                c = {**fixed, "gen_len_a": "", "gen_len_b": b}
                out.append(Record(c, "row_spearman", spearman(a_vals, counts)))
            if len(b_vals) >= 2:
                c = {**fixed, "gen_len_a": "", "gen_len_b": ""}
                out.append(Record(c, "column_spearman", spearman(b_vals, totals)))
    return out


# -- finding x (table 3) -------------------------------------------------------


def _find_x_trial(task) -> tuple[bool, int, int]:
    seed, cell, trial, config = task
    inst = build_instance(_instance_params(cell), trial_rng(seed, cell, trial))
    cfg = AttackConfig(**{**config, "seed": int(trial_rng(seed, cell, f"restart-{trial}").integers(2**31))})
    res = run_attack(inst, cfg)
    return res.success, res.steps, res.restarts


def exp_find_x(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """run_attack success counts per cell."""
    _require(spec, ExperimentKind.FIND_X)
    config = dict(length_fn="rg", ordering="avg", lookahead=1, peel="whole", loop_policy="none")
    config.update(spec.option("attack", {}))

    def run():
        cells = spec.cells()
        tasks = [(spec.seed, cell, i, config) for cell in cells for i in range(spec.trials)]
        results = _parallel_map(_find_x_trial, tasks, workers)
        records = []
        for ci, cell in enumerate(cells):
            chunk = results[ci * spec.trials:(ci + 1) * spec.trials]
            records.append(proportion(cell, "success", sum(s for s, _, _ in chunk), spec.trials))
            records.append(mean_record(cell, "mean_restarts", [r for _, _, r in chunk]))
        return ExperimentReport(spec, list(spec.grid), records)

    return _timed(run)


# -- growth curves (figures 1-2) -----------------------------------------------


def _growth_setup(seed: int, cell: dict):
    rng = trial_rng(seed, _setup_cell(cell), "setup")
    params = _instance_params(cell)
    gens = [sample_artin_word(params.strands, params.gen_len_a, rng) for _ in range(params.m)]
    b = sample_artin_word(params.strands, params.gen_len_b, rng)
    return params, gens, b


def _conj_lengths(gens: list[BraidWord], spelling, b: BraidWord) -> tuple[int, int]:
    x = spelling_word(gens, spelling) if spelling else BraidWord(b.strands, ())
    return Garside.of(b).multiply(x, x.inverse()).lengths()


def _growth_task(task):
    seed, cell, length, samples, mode = task
    params, gens, b = _growth_setup(seed, cell)
    if mode == "walk":
        # one task per walk: prepend symbols so every prefix length comes from the same walk
        rng = trial_rng(seed, cell, f"walk-{length}")
        spelling = sample_spelling(params.m, samples, rng)
        table = SymbolTable(gens)
        cset = ConjugateSet.from_words([b])
        out = [tuple(int(v[0]) for v in cset.lengths())]
        for s in spelling:
            cset = cset.conjugated_by(table.runs((-s,)))
            out.append(tuple(int(v[0]) for v in cset.lengths()))
        return out
    out = []
    for s in range(samples):
        rng = trial_rng(seed, cell, length * 1_000_003 + s)
        out.append(_conj_lengths(gens, sample_spelling(params.m, length, rng), b))
    return out


def stat_growth_curves(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """ℓ(x·b·x⁻¹) against |x|: one fixed walk, and means over random x per abscissa.

    Also reports, per length function, the mean over independent walks of the
    first |x| at which the length rises above ℓ(b) (the initial plateau).
    """
    _require(spec, ExperimentKind.GROWTH_CURVES)
    max_len = int(spec.option("max_len", 40))
    mode = spec.option("mode", "abscissa")
    if mode not in ("abscissa", "walk"):
        raise ValueError("mode must be 'abscissa' or 'walk'")
    samples = spec.trials

    def run():
        records = []
        columns = [*spec.grid, "x_len"]
        for cell in spec.cells():
            params, gens, b = _growth_setup(spec.seed, cell)
            base = Garside.of(b).lengths()
            specific = _growth_task((spec.seed, cell, 0, max_len, "walk"))
            walk_tasks = [(spec.seed, cell, w + 1, max_len, "walk") for w in range(samples)]
            if mode == "abscissa":
                tasks = [(spec.seed, cell, j, samples, mode) for j in range(max_len + 1)]
                per_len, walks = _parallel_map(_growth_task, tasks, workers), None
            else:
                walks = _parallel_map(_growth_task, walk_tasks, workers)
                per_len = [[w[j] for w in walks] for j in range(max_len + 1)]
            means = {0: [], 1: []}
            ses = {0: [], 1: []}
            for j in range(max_len + 1):
                c = {**cell, "x_len": j}
                vals = np.array(per_len[j], dtype=float).reshape(-1, 2)
                for li, name in ((0, "l_G"), (1, "l_RG")):
                    records.append(Record(c, f"specific_{name}", float(specific[j][li])))
                    rec = mean_record(c, f"mean_{name}", vals[:, li])
                    records.append(rec)
                    means[li].append(rec.value)
                    ses[li].append(rec.stderr)
                    same = int(np.sum(vals[:, li] == base[li]))
                    records.append(proportion(c, f"unchanged_{name}", same, len(vals)))
            if walks is None:
                walks = _parallel_map(_growth_task, walk_tasks, workers)
            xs = list(range(1, max_len + 1))
            for li, name in ((0, "l_G"), (1, "l_RG")):
                c = {**cell, "x_len": ""}
                records.append(mean_record(c, f"plateau_{name}", [_plateau(w, li) for w in walks]))
                records.append(Record(c, f"spearman_{name}", spearman(xs, means[li][1:])))
                fi = first_increase(means[li][1:], ses[li][1:], float(base[li]))
                records.append(Record(c, f"first_increase_{name}", None if fi is None else float(fi)))
        return ExperimentReport(spec, columns, records)

    return _timed(run)


def _plateau(walk: list[tuple[int, int]], li: int) -> int:
    """First step of a walk at which the length exceeds its starting value (len(walk) if never)."""
    start = walk[0][li]
    for j in range(1, len(walk)):
        if walk[j][li] > start:
            return j
    return len(walk)


# -- separation statistic (figure 3) -------------------------------------------


def _separation_task(task):
    seed, cell, trial = task
    params, gens, _ = _growth_setup(seed, cell)
    rng = trial_rng(seed, cell, trial)
    x = sample_spelling(params.m, params.secret_len, rng)
    ext = sample_spelling(params.m, 2, rng)
    xw = spelling_word(gens, x) if x else BraidWord(params.strands, ())
    g = Garside.of(xw)
    before = g.lengths()
    after = g.multiply(left=spelling_word(gens, ext)).lengths()
    return after[0] - before[0], after[1] - before[1]


def stat_separation(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """E(ℓ(X')−ℓ(X))/√V(ℓ(X')−ℓ(X)) with X' = X prefixed by two random generators."""
    _require(spec, ExperimentKind.SEPARATION_STAT)

    def run():
        cells = spec.cells()
        tasks = [(spec.seed, cell, i) for cell in cells for i in range(spec.trials)]
        results = _parallel_map(_separation_task, tasks, workers)
        records = []
        wins = valid = 0
        for ci, cell in enumerate(cells):
            d = np.array(results[ci * spec.trials:(ci + 1) * spec.trials], dtype=float).reshape(-1, 2)
            scores = []
            for li, name in ((0, "l_G"), (1, "l_RG")):
                sd = d[:, li].std(ddof=1) if len(d) > 1 else float("nan")
                if len(d) < 2 or not sd > 0:
                    records.append(Record(cell, f"score_{name}", None, None, len(d), flag="invalid"))
                    scores.append(None)
                    continue
                score = float(d[:, li].mean() / sd)
                records.append(Record(cell, f"score_{name}", score, None, len(d)))
                scores.append(score)
            if None not in scores:
                valid += 1
                wins += scores[1] > scores[0]
        summary = {k: "" for k in spec.grid}
        if valid:
            records.append(proportion(summary, "fraction_rg_above_g", wins, valid))
        return ExperimentReport(spec, list(spec.grid), records)

    return _timed(run)


# -- rank distribution (figure 4) ----------------------------------------------


def _free_reduce(word) -> tuple[int, ...]:
    stack: list[int] = []
    for s in word:
        if stack and stack[-1] == -s:
            stack.pop()
        else:
            stack.append(s)
    return tuple(stack)


def _ideal_rank(spelling: tuple[int, ...], m: int) -> int:
    """Rank of the leading symbol of the freely reduced secret when candidates are scored by exact spelled length.

    A secret that reduces to nothing has no leading symbol; it counts as rank 1.
    """
    target = _free_reduce(spelling)
    if not target:
        return 1
    symbols = symbol_order(m)
    scores = np.array([len(_free_reduce((-g, *target))) for g in symbols])
    return rank_candidates(scores[:, None], Ordering.AVERAGE).position(symbols.index(target[0]))


def _rank_dist_task(task):
    seed, cell, trial, fns = task
    params = _instance_params(cell)
    rng = trial_rng(seed, _setup_cell(cell), "setup")
    gens = [sample_artin_word(params.strands, params.gen_len_a, rng) for _ in range(params.m)]
    rng = trial_rng(seed, cell, trial)
    spelling = sample_spelling(params.m, params.secret_len, rng)
    x = spelling_word(gens, spelling)
    table = SymbolTable(gens)
    bases = [sample_artin_word(params.strands, params.gen_len_b, rng) for _ in range(params.n)]
    cset = ConjugateSet.from_garsides([Garside.of(b).multiply(x, x.inverse()) for b in bases])
    prefixes, lg, lrg = score_prefixes(cset, table, 1)
    idx = prefixes.index(spelling[:1])
    out = {}
    for fn in fns:
        vec = lrg if fn is LengthFunction.REDUCED_GARSIDE else lg
        out[fn.value] = rank_candidates(vec, Ordering.AVERAGE).position(idx)
    out["ideal"] = _ideal_rank(spelling, params.m)
    return out


def stat_rank_distribution(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Distribution of the correct generator's rank over repeated secrets in a fixed subgroup."""
    _require(spec, ExperimentKind.RANK_DISTRIBUTION)
    fns = [LengthFunction.parse(f) for f in spec.option("length_fns", ["g", "rg"])]

    def run():
        cells = spec.cells()
        tasks = [(spec.seed, cell, i, fns) for cell in cells for i in range(spec.trials)]
        results = _parallel_map(_rank_dist_task, tasks, workers)
        records = []
        for ci, cell in enumerate(cells):
            m = _instance_params(cell).m
            chunk = results[ci * spec.trials:(ci + 1) * spec.trials]
            for name in [f.value for f in fns] + ["ideal"]:
                ranks = np.array([r[name] for r in chunk])
                cum = 0
                for rank in range(1, 2 * m + 1):
                    cnt = int(np.sum(ranks == rank))
                    cum += cnt
                    c = {**cell, "length_fn": name, "rank": rank}
                    records.append(proportion(c, "pmf", cnt, len(ranks)))
                    records.append(proportion(c, "cdf", cum, len(ranks)))
        return ExperimentReport(spec, [*spec.grid, "length_fn", "rank"], records)

    return _timed(run)


# -- length distribution (figure 5) --------------------------------------------


def _length_dist_task(task):
    seed, cell, trial, wrong, fn = task
    inst = build_instance(_instance_params(cell), trial_rng(seed, cell, trial))
    table = SymbolTable(inst.generators)
    cset = ConjugateSet.from_words(inst.conjugates)
    prefixes, lg, lrg = score_prefixes(cset, table, 1)
    vec = lrg if fn is LengthFunction.REDUCED_GARSIDE else lg
    correct = prefixes.index(inst.spelling[:1])
    others = [i for i in range(len(prefixes)) if i != correct]
    pick = trial_rng(seed, cell, f"pick-{trial}").choice(others, size=min(wrong, len(others)), replace=False)
    return correct, sorted(int(i) for i in pick), [p[0] for p in prefixes], vec


def stat_length_distribution(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Empirical distribution of ℓ(g⁻¹·c·g) for the correct and some wrong generators."""
    _require(spec, ExperimentKind.LENGTH_DISTRIBUTION)
    wrong = int(spec.option("wrong", 7))
    fn = LengthFunction.parse(spec.option("length_fn", "rg"))

    def run():
        cells = spec.cells()
        tasks = [(spec.seed, cell, i, wrong, fn) for cell in cells for i in range(spec.trials)]
        results = _parallel_map(_length_dist_task, tasks, workers)
        columns = [*spec.grid, "trial", "generator", "correct", "length"]
        records = []
        for ci, cell in enumerate(cells):
            for trial in range(spec.trials):
                correct, pick, symbols, vec = results[ci * spec.trials + trial]
                for g in [correct, *pick]:
                    vals, counts = np.unique(vec[g], return_counts=True)
                    base = {**cell, "trial": trial, "generator": symbols[g], "correct": int(g == correct)}
                    for v, cnt in zip(vals, counts):
                        records.append(Record({**base, "length": int(v)}, "mass", cnt / vec.shape[1],
                                              int(cnt), vec.shape[1]))
                    records.append(mean_record({**base, "length": ""}, "mean", vec[g]))
                wrong_rows = np.delete(vec, correct, axis=0)
                summary = {**cell, "trial": trial, "generator": "", "correct": "", "length": ""}
                records.append(mean_record(summary, "pooled_wrong_mean", wrong_rows.ravel()))
                picked = set(np.unique(vec[pick]).tolist()) if pick else set()
                overlap = bool(set(np.unique(vec[correct]).tolist()) & picked)
                records.append(Record(summary, "overlap", float(overlap)))
        return ExperimentReport(spec, columns, records)

    return _timed(run)


# -- sample convergence ----------------------------------------------------------


def _convergence_task(task):
    seed, cell, trial, fn, band, checkpoint = task
    inst = build_instance(_instance_params(cell), trial_rng(seed, cell, trial))
    table = SymbolTable(inst.generators)
    cset = ConjugateSet.from_words(inst.conjugates)
    prefixes, lg, lrg = score_prefixes(cset, table, 1)
    vec = lrg if fn is LengthFunction.REDUCED_GARSIDE else lg
    stab = [stabilization_index(row, band) for row in vec]
    early = rank_candidates(vec[:, :checkpoint], Ordering.AVERAGE).best
    late = rank_candidates(vec, Ordering.AVERAGE).best
    correct = prefixes.index(inst.spelling[:1])
    return float(np.median(stab)), early == late, late == correct, early == correct


def sample_convergence(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """How many conjugates it takes for running mean lengths and the ≼_Av winner to settle."""
    _require(spec, ExperimentKind.SAMPLE_CONVERGENCE)
    fn = LengthFunction.parse(spec.option("length_fn", "rg"))
    band = float(spec.option("band", 0.05))
    checkpoint = int(spec.option("checkpoint", 15))

    def run():
        cells = spec.cells()
        for cell in cells:
            if _instance_params(cell).n < checkpoint:
                raise ValueError("n must be at least the checkpoint")
        tasks = [(spec.seed, cell, i, fn, band, checkpoint) for cell in cells for i in range(spec.trials)]
        results = _parallel_map(_convergence_task, tasks, workers)
        records = []
        for ci, cell in enumerate(cells):
            chunk = results[ci * spec.trials:(ci + 1) * spec.trials]
            stab = [s for s, *_ in chunk]
            records.append(Record(cell, "median_stabilization", float(np.median(stab)), None, len(stab)))
            records.append(mean_record(cell, "mean_stabilization", stab))
            records.append(proportion(cell, "winner_unchanged", sum(1 for c in chunk if c[1]), len(chunk)))
            records.append(proportion(cell, "winner_correct", sum(1 for c in chunk if c[2]), len(chunk)))
            records.append(proportion(cell, "winner_correct_at_checkpoint", sum(1 for c in chunk if c[3]),
                                      len(chunk)))
        return ExperimentReport(spec, list(spec.grid), records)

    return _timed(run)


# -- dispatch and presets --------------------------------------------------------


def _require(spec: ExperimentSpec, kind: ExperimentKind) -> None:
    if spec.kind is not kind:
        raise ValueError(f"expected a {kind.value} spec, got {spec.kind.value}")


def _timed(fn: Callable[[], ExperimentReport]) -> ExperimentReport:
    start = time.perf_counter()
    report = fn()
    report.runtime = time.perf_counter() - start
    return report


RUNNERS: dict[ExperimentKind, Callable[..., ExperimentReport]] = {
    ExperimentKind.RANK_PROBABILITY: exp_rank_probability,
    ExperimentKind.ASYMMETRIC_LENGTHS: exp_asymmetric,
    ExperimentKind.FIND_X: exp_find_x,
    ExperimentKind.GROWTH_CURVES: stat_growth_curves,
    ExperimentKind.SEPARATION_STAT: stat_separation,
    ExperimentKind.RANK_DISTRIBUTION: stat_rank_distribution,
    ExperimentKind.LENGTH_DISTRIBUTION: stat_length_distribution,
    ExperimentKind.SAMPLE_CONVERGENCE: sample_convergence,
}


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    return RUNNERS[spec.kind](spec, workers)


def _spec(kind, trials, options=None, **grid) -> dict:
    return {"kind": kind, "trials": trials, "options": options or {}, "grid": grid}


_ALL_CONFIGS = {"length_fns": ["g", "rg"], "orderings": ["avg", "maj"]}

PRESETS: dict[str, dict[str, dict]] = {
    "table1": {
        "paper": _spec("rank_probability", 200, _ALL_CONFIGS, strands=[81], m=[20], n=[20], gen_len_a=[10],
                       gen_len_b=[10], secret_len=[5, 10, 20, 40, 60, 100], lookahead=[1, 2]),
        "desk": _spec("rank_probability", 100, _ALL_CONFIGS, strands=[41], m=[20], n=[20], gen_len_a=[10],
                      gen_len_b=[10], secret_len=[5, 10, 20], lookahead=[1]),
    },
    "table2": {
        "paper": _spec("asymmetric_lengths", 200, _ALL_CONFIGS, strands=[81], m=[20], n=[20], secret_len=[30],
                       lookahead=[2], gen_len_b=[5, 10, 15, 20, 25], gen_len_a=[5, 10, 15, 20, 25]),
        "desk": _spec("asymmetric_lengths", 100, {"length_fns": ["rg"], "orderings": ["avg"]}, strands=[41],
                      m=[20], n=[20], secret_len=[10], lookahead=[1], gen_len_b=[5, 10, 15, 20, 25],
                      gen_len_a=[5, 10, 15, 20, 25]),
    },
    "table3": {
        "paper": _spec("find_x", 500, {}, m=[20], n=[20], gen_len_a=[10], gen_len_b=[10],
                       strands=[4, 5, 6, 7, 8, 9, 10, 14, 17, 20], secret_len=list(range(2, 19))),
        "desk": _spec("find_x", 100, {}, m=[20], n=[20], gen_len_a=[10], gen_len_b=[10],
                      strands=[4, 9, 20], secret_len=[2, 4, 6, 8]),
    },
    "fig-growth": {
        "paper": _spec("growth_curves", 1200, {"max_len": 60}, strands=[81], m=[20], gen_len_a=[10],
                       gen_len_b=[10]),
        "desk": _spec("growth_curves", 100, {"max_len": 40}, strands=[20], m=[20], gen_len_a=[10],
                      gen_len_b=[10]),
    },
    "fig-separation": {
        "paper": _spec("separation_stat", 1000, {}, strands=[81], m=[20], gen_len_a=[10],
                       secret_len=list(range(1, 101))),
        "desk": _spec("separation_stat", 200, {}, strands=[41], m=[20], gen_len_a=[10],
                      secret_len=[1, *range(10, 101, 10)]),
    },
    "fig-rank": {
        "paper": _spec("rank_distribution", 138, {}, strands=[81], m=[20], n=[200], gen_len_a=[10],
                       gen_len_b=[10], secret_len=[40, 100]),
        "desk": _spec("rank_distribution", 40, {}, strands=[41], m=[20], n=[50], gen_len_a=[10],
                      gen_len_b=[10], secret_len=[10, 40]),
    },
    "fig-dist": {
        "paper": _spec("length_distribution", 1, {"wrong": 7}, strands=[81], m=[20], n=[200], gen_len_a=[10],
                       gen_len_b=[10], secret_len=[40]),
        "desk": _spec("length_distribution", 5, {"wrong": 7}, strands=[41], m=[20], n=[200], gen_len_a=[10],
                      gen_len_b=[10], secret_len=[10]),
    },
    "convergence": {
        "paper": _spec("sample_convergence", 50, {"checkpoint": 15, "band": 0.05}, strands=[81], m=[20],
                       n=[3000], gen_len_a=[10], gen_len_b=[10], secret_len=[10]),
        "desk": _spec("sample_convergence", 30, {"checkpoint": 15, "band": 0.05}, strands=[81], m=[20],
                      n=[200], gen_len_a=[10], gen_len_b=[10], secret_len=[10]),
    },
}

EXPERIMENT_NAMES = tuple(PRESETS)


def preset_spec(name: str, preset: str = "desk", seed: int = 0, overrides: dict | None = None) -> ExperimentSpec:
    """Build a spec from a named preset, with optional overrides of trials, seed, grid or options."""
    if name not in PRESETS:
        raise KeyError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENT_NAMES)}")
    if preset not in PRESETS[name]:
        raise KeyError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS[name])}")
    base = json.loads(json.dumps(PRESETS[name][preset]))
    base["seed"] = seed
    for key, val in (overrides or {}).items():
        if key in ("grid", "options"):
            base[key].update(val)
        else:
            base[key] = val
    return ExperimentSpec.from_json(base)

"""Command-line front end.

Exit status: 0 on success, 1 when an attack or experiment produced a negative
result, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import secrets
import sys
from dataclasses import replace
from pathlib import Path

from .braid import BraidParseError, StrandMismatch, parse_word
from .experiments import EXPERIMENT_NAMES, PRESETS, ExperimentKind, ExperimentSpec, preset_spec, run_experiment
from .gcsp import (
    AttackConfig,
    InstanceFormatError,
    InstanceParams,
    build_instance,
    dump_instance,
    load_instance,
    run_attack,
)

OUT_ENV = "BRAIDSEARCH_OUT"
EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2

_RANK_KINDS = (ExperimentKind.RANK_PROBABILITY, ExperimentKind.ASYMMETRIC_LENGTHS)


class UsageError(Exception):
    pass


def _seed(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbits(31)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _read_words(args) -> list[tuple[int, str]]:
    if args.file:
        try:
            text = Path(args.file).read_text()
        except OSError as e:
            raise UsageError(f"cannot read {args.file}: {e.strerror}") from None
        return [(i, ln) for i, ln in enumerate(text.splitlines(), start=1) if ln.strip()]
    if not args.word:
        raise UsageError("give a word inline (N=<int> i j ...) or --file")
    return [(1, " ".join(args.word))]


def _perm_text(p) -> str:
    return "[" + ",".join(map(str, p.perm.images)) + "]"


def cmd_nf(args) -> int:
    from .lengths import garside_length, reduced_garside_length
    from .braid import left_normal_form

    for i, (line, text) in enumerate(_read_words(args)):
        nf = left_normal_form(parse_word(text, line))
        if i:
            print()
        print(f"strands: {nf.strands}")
        print(f"r: {nf.r}")
        print("factors: " + (" ".join(_perm_text(p) for p in nf.factors) or "-"))
        print(f"l_G: {garside_length(nf)}")
        print(f"l_RG: {reduced_garside_length(nf)}")
    return EXIT_OK


def cmd_len(args) -> int:
    from .lengths import LengthFunction, lengths_of

    for line, text in _read_words(args):
        g, rg = lengths_of(parse_word(text, line))
        if args.length_fn is None:
            print(f"l_G: {g}  l_RG: {rg}")
        else:
            print(g if LengthFunction.parse(args.length_fn) is LengthFunction.GARSIDE else rg)
    return EXIT_OK


def cmd_gen(args) -> int:
    seed = _seed(args)
    params = InstanceParams(strands=args.strands, m=args.m, n=args.n, gen_len_a=args.gen_len_a,
                            gen_len_b=args.gen_len_b, secret_len=args.secret_len, seed=seed)
    text = dump_instance(build_instance(params), include_secret=not args.no_secret)
    if args.output:
        try:
            Path(args.output).write_text(text)
        except OSError as e:
            raise UsageError(f"cannot write {args.output}: {e.strerror}") from None
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _attack_config(args, seed: int) -> AttackConfig:
    kw = dict(seed=seed, prune=not args.no_prune, max_steps=args.max_steps)
    for name in ("length_fn", "ordering", "lookahead", "peel", "loop_policy", "budget"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return AttackConfig(**kw)


def cmd_attack(args) -> int:
    seed = _seed(args)
    try:
        text = Path(args.instance).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {args.instance}: {e.strerror}") from None
    instance = load_instance(text)
    result = run_attack(instance, _attack_config(args, seed))
    print(f"success: {'yes' if result.success else 'no'}")
    print("spelling: " + (" ".join(map(str, result.spelling)) or "-"))
    print(f"steps: {result.steps}")
    print(f"restarts: {result.restarts}")
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "top_prefix", "peeled", "score", "candidates", "restart"])
            for i, st in enumerate(result.trace, start=1):
                best = st.ranking.best
                w.writerow([i, " ".join(map(str, st.prefix)), " ".join(map(str, st.peeled)),
                            int(st.ranking.scores[best]), len(st.candidates),
                            "" if st.restart is None else " ".join(map(str, st.restart))])
    return EXIT_OK if result.success else EXIT_NEGATIVE


def _apply_flags(spec: ExperimentSpec, args) -> ExperimentSpec:
    """Command-line overrides on top of the preset and spec file."""
    grid = dict(spec.grid)
    options = dict(spec.options)
    attack = dict(options.get("attack", {}))
    if args.length_fn is not None:
        options["length_fns"] = [args.length_fn]
        options["length_fn"] = args.length_fn
        attack["length_fn"] = args.length_fn
    if args.ordering is not None:
        options["orderings"] = [args.ordering]
        attack["ordering"] = args.ordering
    if args.lookahead is not None:
        if spec.kind in _RANK_KINDS:
            grid["lookahead"] = [args.lookahead]
        attack["lookahead"] = args.lookahead
    if args.peel is not None:
        attack["peel"] = args.peel
    if args.loop_policy is not None:
        attack["loop_policy"] = args.loop_policy
    if args.no_prune:
        options["prune"] = False
        attack["prune"] = False
    if spec.kind is ExperimentKind.FIND_X and attack:
        options["attack"] = attack
    trials = args.trials if args.trials is not None else spec.trials
    return replace(spec, grid=grid, options=options, trials=trials)


def cmd_experiment(args) -> int:
    overrides = {}
    if args.spec:
        try:
            overrides = json.loads(Path(args.spec).read_text())
        except OSError as e:
            raise UsageError(f"cannot read {args.spec}: {e.strerror}") from None
        except json.JSONDecodeError as e:
            raise UsageError(f"{args.spec}: line {e.lineno}, column {e.colno}: {e.msg}") from None
        if not isinstance(overrides, dict):
            raise UsageError(f"{args.spec}: expected a JSON object")
    file_seed = overrides.pop("seed", None)
    if args.seed is None and file_seed is not None:
        args.seed = int(file_seed)
    seed = _seed(args)
    spec = _apply_flags(preset_spec(args.name, args.preset, seed, overrides), args)
    workers = args.workers if args.workers is not None else _available_workers()
    if workers < 1:
        raise UsageError("--workers must be at least 1")
    report = run_experiment(spec, workers)
    out = args.out or os.environ.get(OUT_ENV) or "results"
    meta = {"experiment": args.name, "preset": args.preset, "spec_file": args.spec,
            "effective_config": spec.to_json(), "workers": workers}
    csv_path, meta_path = report.write(out, args.name, meta)
    print(f"wrote {csv_path} and {meta_path} in {report.runtime:.1f}s")
    invalid = any(r.flag == "invalid" for r in report.records)
    return EXIT_NEGATIVE if invalid else EXIT_OK


def _available_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def _add_word_input(p):
    p.add_argument("word", nargs="*", help="inline word, e.g. N=3 1 -2")
    p.add_argument("--file", help="file with one word per line")


def _add_attack_flags(p):
    p.add_argument("--length-fn", choices=["g", "rg"], default=None)
    p.add_argument("--ordering", choices=["avg", "maj"], default=None)
    p.add_argument("--lookahead", type=int, default=None, metavar="T")
    p.add_argument("--peel", choices=["whole", "first-letter"], default=None)
    p.add_argument("--loop-policy", choices=["none", "restart"], default=None)
    p.add_argument("--no-prune", action="store_true", help="keep prefixes that contain g·g⁻¹")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="braidsearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nf", help="left normal form and lengths of a word")
    _add_word_input(p)
    p.set_defaults(func=cmd_nf)

    p = sub.add_parser("len", help="Garside and reduced Garside lengths")
    _add_word_input(p)
    p.add_argument("--length-fn", choices=["g", "rg"], default=None)
    p.set_defaults(func=cmd_len)

    p = sub.add_parser("gen", help="generate a conjugacy search instance")
    d = InstanceParams()
    p.add_argument("--strands", type=int, default=d.strands)
    p.add_argument("--m", type=int, default=d.m, help="number of generators a_i")
    p.add_argument("--n", type=int, default=d.n, help="number of base elements b_i")
    p.add_argument("--gen-len-a", type=int, default=d.gen_len_a)
    p.add_argument("--gen-len-b", type=int, default=d.gen_len_b)
    p.add_argument("--secret-len", type=int, default=d.secret_len)
    p.add_argument("--no-secret", action="store_true", help="omit the [secret] section")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", help="write here instead of stdout")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("attack", help="run the length-based attack on an instance file")
    p.add_argument("instance")
    _add_attack_flags(p)
    p.add_argument("--max-steps", type=int, default=AttackConfig.max_steps)
    p.add_argument("--budget", type=int, default=None, help="number of symbols to peel")
    p.add_argument("--seed", type=int, default=None, help="seed for restart words")
    p.add_argument("--trace", help="write a per-step trace CSV here")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment and write CSV")
    p.add_argument("name", choices=EXPERIMENT_NAMES)
    p.add_argument("--preset", choices=sorted({k for v in PRESETS.values() for k in v}), default="desk")
    p.add_argument("--spec", help="JSON file overriding grid, trials, options or seed")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./results)")
    _add_attack_flags(p)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, BraidParseError, StrandMismatch, InstanceFormatError, KeyError, ValueError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

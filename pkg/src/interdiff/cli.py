"""Command-line driver.

Subcommands:

    run      matched interdependent/independent batch, per-step means
    sweep    popular-belief clustering across popularity thresholds
    toy      influence-matrix and triangle-closure toy models
    shuffle  margin-preserving shuffle of a binary CSV matrix

Options may also come from ``--config FILE``, a flat ``key=value`` file whose
keys are the long flag names (``sims=500``, ``t-match=9``); flags on the
command line win.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .batch import BatchError, emit, run_batch
from .dynamics import SimConfig
from .graphs import ConfigError, EdgelistError
from .measures import (
    degree_preserving_shuffle,
    popular_clustering,
    similarity_percentiles,
)
from .seeding import child_seed
from .toymodels import influence_matrix_converge, random_logic, triangle_rule_converge, format_report

log = logging.getLogger("interdiff")


def _percentiles(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}") from None
    if lo > 1 or hi > 1:
        lo, hi = lo / 100, hi / 100
    return lo, hi


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def read_config_file(path: str | Path) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {text!r}")
        key, value = (s.strip() for s in text.split("=", 1))
        values[key.lstrip("-")] = value
    return values


def _sim_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("simulation")
    g.add_argument("--sims", type=int, default=100, help="matched pairs to run (default 100)")
    g.add_argument("--seed", type=int, default=0, help="master seed")
    g.add_argument("--agents", type=int, default=60)
    g.add_argument("--degree", type=float, default=3.0, help="mean social-network degree")
    g.add_argument("--concepts", type=int, default=25)
    g.add_argument("--beliefs", type=int, default=25, help="initial beliefs per agent")
    g.add_argument("--steps", type=int, default=10)
    g.add_argument("--t-match", type=int, default=0, help="step whose susceptibility the independent run matches")
    g.add_argument("--network", choices=["gnm", "dodecahedron", "caveman", "edgelist"], default="gnm")
    g.add_argument("--edgelist", metavar="PATH", help="social network edgelist (implies --network edgelist)")
    g.add_argument("--threshold", type=float, default=0.1, help="popular-belief fraction (default 0.1)")
    g.add_argument("--percentiles", type=_percentiles, default=(0.05, 0.95), metavar="LO,HI",
                   help="similarity percentiles, as fractions or percents (default 0.05,0.95)")
    g.add_argument("--workers", type=int, default=1)


def _out_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interdiff", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", metavar="FILE", help="key=value defaults file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="matched batch, per-step means")
    _sim_options(run)
    _out_options(run)
    run.add_argument("--dump-runs", metavar="DIR", help="also write one CSV per replication")

    sweep = sub.add_parser("sweep", help="popular-belief clustering across thresholds")
    _sim_options(sweep)
    _out_options(sweep)
    sweep.add_argument("--thresholds", type=_floats, default=[0.05, 0.1, 0.2, 0.3, 0.4])

    toy = sub.add_parser("toy", help="influence-matrix and triangle toy models")
    toy.add_argument("--seed", type=int, default=0, help="seed for the random influence matrices")
    toy.add_argument("--n-logics", type=int, default=2)
    toy.add_argument("--n-beliefs", type=int, default=6)
    toy.add_argument("--ties-adopt", action="store_true", help="adopt on a zero vote sum")
    toy.add_argument("--show-subsets", action="store_true")

    sh = sub.add_parser("shuffle", help="margin-preserving shuffle of a binary CSV matrix")
    sh.add_argument("matrix", help="CSV of 0/1 values, rows are agents; a non-numeric first row is a header")
    sh.add_argument("--seed", type=int, default=0)
    sh.add_argument("--swaps", type=int, default=None, help="successful swaps (default 10 x number of ones)")
    sh.add_argument("--percentiles", type=_percentiles, default=(0.05, 0.95), metavar="LO,HI")
    sh.add_argument("--out", default=None, help="write the shuffled matrix here")
    return parser


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if args.config:
        # file entries go straight after the subcommand so later command-line flags override them
        extra = []
        for key, value in read_config_file(args.config).items():
            flag = f"--{key}"
            if value.lower() in ("true", "yes", "on"):
                extra.append(flag)
            elif value.lower() not in ("false", "no", "off"):
                extra += [flag, value]
        at = argv.index(args.command) + 1
        args = parser.parse_args(argv[:at] + extra + argv[at:])
    return args


def config_from_args(args: argparse.Namespace) -> SimConfig:
    network = "edgelist" if args.edgelist else args.network
    return SimConfig(
        n_agents=args.agents,
        degree_avg=args.degree,
        n_concepts=args.concepts,
        n_beliefs_per_agent=args.beliefs,
        n_steps=args.steps,
        t_match=args.t_match,
        network_kind=network,
        edgelist=args.edgelist,
        seed=args.seed,
        threshold=args.threshold,
        percentiles=tuple(args.percentiles),
    )


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_run(args) -> None:
    config = config_from_args(args)
    result = run_batch(config, args.sims, args.workers, dump_dir=args.dump_runs)
    text = emit(result, args.format, args.out)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        log.info("wrote %s", args.out)


def threshold_table(result, thresholds) -> list[dict]:
    """Mean final-step popular-belief clustering per threshold and condition over ``result.runs``.

    Each run and threshold gets its own tiebreak stream derived from the run seed.
    """
    rows = []
    for th in thresholds:
        vals = {"inter": [], "indep": []}
        for r in result.runs:
            rng = np.random.default_rng(child_seed(r.seed, int(round(th * 1e6))))
            for cond in vals:
                counts = getattr(r, f"{cond}_counts")
                vals[cond].append(popular_clustering(counts.final_popularity, r.universe, th, rng))
        rows.append({"threshold": th,
                     "popular belief clustering (inter)": float(np.mean(vals["inter"])),
                     "popular belief clustering (indep)": float(np.mean(vals["indep"])),
                     "n": len(result.runs)})
    return rows


def cmd_sweep(args) -> None:
    import json

    config = config_from_args(args)
    result = run_batch(config, args.sims, args.workers, keep_runs=True)
    rows = threshold_table(result, args.thresholds)
    if args.format == "json":
        text = json.dumps(rows, indent=1) + "\n"
    else:
        lines = [",".join(rows[0].keys())]
        for row in rows:
            vals = [f"{row['threshold']:g}"]
            vals += [f"{v:.17g}" if isinstance(v, float) else str(v) for k, v in row.items() if k != "threshold"]
            lines.append(",".join(vals))
        text = "\n".join(lines) + "\n"
    _write(text, args.out)


def cmd_toy(args) -> None:
    letters = [chr(ord("A") + i) for i in range(args.n_beliefs)]
    rng = np.random.default_rng(args.seed)
    for k in range(args.n_logics):
        logic = random_logic(args.n_beliefs, rng)
        res = influence_matrix_converge(logic, tie_adopts=args.ties_adopt)
        print(format_report(f"logic {k + 1}", res, letters, args.show_subsets))
        signs = "\n".join("    " + " ".join("+" if v > 0 else "-" if v < 0 else "." for v in row) for row in logic)
        print("  matrix [candidate row, held column]:\n" + signs)
    tri = triangle_rule_converge(4)
    concepts = "PQRS"
    labels = [concepts[a] + concepts[b] for a in range(4) for b in range(a + 1, 4)]
    print(format_report("triangle rule", tri, labels, args.show_subsets))


def read_matrix(path: str | Path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    try:
        mat = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if mat.ndim != 2 or mat.size == 0:
        raise ConfigError(f"{path}: expected a non-empty rectangular matrix")
    if not np.isin(mat, (0, 1)).all():
        raise ConfigError(f"{path}: matrix must contain only 0 and 1")
    return mat.astype(np.bool_)


def cmd_shuffle(args) -> None:
    mat = read_matrix(args.matrix)
    rng = np.random.default_rng(args.seed)
    shuffled = degree_preserving_shuffle(mat, rng, args.swaps)
    if args.out:
        np.savetxt(args.out, shuffled.astype(int), fmt="%d", delimiter=",")
    lo_q, hi_q = args.percentiles
    raw = similarity_percentiles(mat, lo_q, hi_q)
    base = similarity_percentiles(shuffled, lo_q, hi_q)
    print("percentile,observed,shuffled,corrected")
    print(f"{lo_q:g},{raw[0]:.17g},{base[0]:.17g},{raw[0] - base[0]:.17g}")
    print(f"{hi_q:g},{raw[1]:.17g},{base[1]:.17g},{raw[1] - base[1]:.17g}")


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "toy": cmd_toy, "shuffle": cmd_shuffle}


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
    except (ConfigError, OSError) as exc:
        print(f"interdiff: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ConfigError, EdgelistError, BatchError, OSError, ValueError) as exc:
        print(f"interdiff: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

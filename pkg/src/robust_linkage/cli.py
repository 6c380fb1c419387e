"""
Command-line interface for robust-linkage.

Subcommands generate instances, inject noise, build hierarchies, run the
inductive protocol, score results, check similarity properties and run
noise sweeps. Results go to files or stdout; logs and errors go to stderr.
"""

import argparse
import logging
import shlex
import sys
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from . import __version__
from .baseline import linkage_cluster, linkage_from_similarity
from .config import ClusteringConfig, ConfigManager, configure_logging
from .errors import ErrorFactory, LinkageError
from .evaluation import FAMILY_LEVELS, RUNNERS, aistat_family, best_pruning_error, classification_error, noise_sweep
from .formats import (
    Provenance,
    read_dissimilarity,
    read_labeling,
    read_point_set,
    read_similarity,
    read_subsets,
    read_table,
    read_tree,
    write_dissimilarity,
    write_error_table,
    write_labeling,
    write_point_set,
    write_similarity,
    write_subsets,
    write_table,
    write_tree,
)
from .inductive import MatrixOracle, evaluate_inductive, required_sample_size, run_inductive
from .models import AIStatSpec, AttributeTable, LinkageMethod, NoiseKind, NoiseParams
from .properties import check_good_neighborhood, check_neighbor_fact, check_strict_separation, check_weak_good_neighborhood, implication_suite
from .rmnl import rmnl_cluster
from .synth import generate_aistat, generate_matched_pairs, generate_planted_good_neighborhood, generate_ward_counterexample, inject_noise

logger = logging.getLogger(__name__)

PROGRAM = "robust-linkage"


def _int_list(value: str) -> List[int]:
    return [int(part) for part in value.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one sub-parser per command."""
    parser = argparse.ArgumentParser(prog=PROGRAM, description="Robust hierarchical clustering toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON configuration file")
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="Generate a synthetic instance")
    generate.add_argument("--kind", required=True, choices=["aistat", "matched-pairs", "planted", "ward"])
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--out", required=True, help="Output directory")
    generate.add_argument("--n", type=int, help="Number of points (aistat: 512, matched-pairs: 64)")
    generate.add_argument("--extra-alpha", type=float, default=0.0)
    generate.add_argument("--extra-nu", type=float, default=0.0)
    generate.add_argument("--boundary-link", choices=["all", "boundary"], default="boundary")
    generate.add_argument("--m", type=int, default=5, help="Ward instance scale")
    generate.add_argument("--k", type=int, default=2)
    generate.add_argument("--sizes", type=_int_list, default=[30, 30], help="Comma-separated cluster sizes")
    generate.add_argument("--alpha", type=float, default=0.0)
    generate.add_argument("--nu", type=float, default=0.0)

    noise = commands.add_parser("noise", help="Inject noise into a similarity matrix or attribute table")
    source = noise.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", help="Similarity matrix file")
    source.add_argument("--table", help="Attribute table file")
    noise.add_argument("--kind", required=True, choices=[kind.value for kind in NoiseKind])
    noise.add_argument("--p", type=float, required=True)
    noise.add_argument("--seed", type=int, default=0)
    noise.add_argument("--out", required=True)

    cluster = commands.add_parser("cluster", help="Build a merge tree")
    cluster.add_argument("--input", required=True)
    cluster.add_argument("--input-kind", choices=["similarity", "dissimilarity"], default=None, help="Defaults to dissimilarity for ward, similarity otherwise")
    cluster.add_argument("--algo", required=True, choices=["rmnl"] + [method.value for method in LinkageMethod])
    cluster.add_argument("--alpha", type=float, default=0.0)
    cluster.add_argument("--nu", type=float, default=0.0)
    cluster.add_argument("--merge-order", choices=["best_first", "component"])
    cluster.add_argument("--out", required=True)

    inductive = commands.add_parser("inductive", help="Cluster a sample and extend to all points")
    inductive.add_argument("--input", required=True)
    inductive.add_argument("--target", required=True, help="Target labeling used to choose the pruning")
    inductive.add_argument("--sample-n", type=int, help="Number of draws (derived from --delta when omitted)")
    inductive.add_argument("--alpha", type=float, required=True)
    inductive.add_argument("--nu", type=float, required=True)
    inductive.add_argument("--delta", type=float, default=0.2)
    inductive.add_argument("--seed", type=int, default=0)
    inductive.add_argument("--repeats", type=int, default=1)
    inductive.add_argument("--out", required=True, help="Output directory")

    evaluate = commands.add_parser("eval", help="Score a tree or a flat clustering")
    evaluate.add_argument("--target", required=True)
    scored = evaluate.add_mutually_exclusive_group(required=True)
    scored.add_argument("--tree")
    scored.add_argument("--pred")
    evaluate.add_argument("--k", type=int, help="Pruning size (defaults to the target's cluster count)")

    check = commands.add_parser("check", help="Check a similarity property")
    check.add_argument("--property", required=True, choices=["strict", "good", "weak", "implications", "neighbor-fact"])
    check.add_argument("--input", required=True)
    check.add_argument("--target", required=True)
    check.add_argument("--alpha", type=float, default=0.0)
    check.add_argument("--beta", type=float, default=1.0)
    check.add_argument("--nu", type=float)
    check.add_argument("--bad", help="Point set file with the bad set")
    check.add_argument("--subsets", help="Subset family file (weak property)")

    sweep = commands.add_parser("sweep", help="Run an AIStat noise sweep")
    sweep.add_argument("--family", required=True, choices=["a", "b", "c"])
    sweep.add_argument("--seeds", type=int, default=10, help="Number of seeds, starting at 0")
    sweep.add_argument("--algos", default=",".join(RUNNERS), help="Comma-separated algorithms")
    sweep.add_argument("--n", type=int, default=512)
    sweep.add_argument("--out", help="Error table file (stdout when omitted)")
    return parser


class Commands:
    """Handlers for every subcommand; each returns an exit status."""

    def __init__(self, config: ClusteringConfig, argv: Sequence[str]):
        self.config = config
        self.command_line = " ".join([PROGRAM, *(shlex.quote(arg) for arg in argv)])

    def _provenance(self, args: argparse.Namespace, seed: Optional[int] = None, **extra: Any) -> Provenance:
        params = {key: value for key, value in vars(args).items() if key not in ("command", "config", "out") and value is not None}
        return Provenance(format_version=self.config.format_version, command=self.command_line, params=params, seed=seed, **extra)

    def generate(self, args: argparse.Namespace) -> int:
        out = Path(args.out)
        provenance = self._provenance(args, seed=args.seed)
        if args.kind == "aistat":
            spec = AIStatSpec(n=args.n or 512, extra_alpha=args.extra_alpha, extra_nu=args.extra_nu, boundary_link=args.boundary_link, seed=args.seed)
            instance = generate_aistat(spec)
            write_similarity(out / "similarity.txt", instance.similarity, provenance)
            for name, target in instance.targets.items():
                write_labeling(out / f"target_{name}.txt", target, provenance)
            write_subsets(out / "subsets.txt", spec.n, instance.subsets, provenance)
            write_point_set(out / "bad.txt", instance.bad_set, provenance)
        elif args.kind == "matched-pairs":
            sim, target = generate_matched_pairs(args.n or 64)
            write_similarity(out / "similarity.txt", sim, provenance)
            write_labeling(out / "target.txt", target, provenance)
        elif args.kind == "planted":
            sim, target, bad = generate_planted_good_neighborhood(args.k, args.sizes, args.alpha, args.nu, args.seed)
            write_similarity(out / "similarity.txt", sim, provenance)
            write_labeling(out / "target.txt", target, provenance)
            write_point_set(out / "bad.txt", bad, provenance)
        else:
            coords, d, target = generate_ward_counterexample(args.m)
            write_table(out / "coordinates.txt", AttributeTable(values=coords[:, None]), provenance)
            write_dissimilarity(out / "dissimilarity.txt", d, provenance.model_copy(update={"similarity_transform": "squared_euclidean"}))
            write_labeling(out / "target.txt", target, provenance)
        print(f"wrote {args.kind} instance to {out}")
        return 0

    def noise(self, args: argparse.Namespace) -> int:
        data = read_similarity(args.input) if args.input else read_table(args.table)
        noisy = inject_noise(data, args.kind, args.p, args.seed)
        provenance = self._provenance(args, seed=args.seed)
        if isinstance(noisy, AttributeTable):
            write_table(args.out, noisy, provenance)
        else:
            write_similarity(args.out, noisy, provenance)
        return 0

    def cluster(self, args: argparse.Namespace) -> int:
        kind = args.input_kind or ("dissimilarity" if args.algo == LinkageMethod.WARD.value else "similarity")
        config = self.config.model_copy(update={"merge_order": args.merge_order}) if args.merge_order else self.config
        if args.algo == "rmnl":
            if kind != "similarity":
                raise ErrorFactory.validation_error("input_kind", kind, "rmnl needs a similarity matrix")
            tree = rmnl_cluster(read_similarity(args.input), NoiseParams(alpha=args.alpha, nu=args.nu), config)
        elif kind == "similarity":
            tree = linkage_from_similarity(read_similarity(args.input), args.algo)
        else:
            tree = linkage_cluster(read_dissimilarity(args.input), args.algo)
        write_tree(args.out, tree, self._provenance(args))
        print(f"wrote {tree.algorithm} tree with {len(tree.merges)} merges to {args.out}")
        return 0

    def inductive(self, args: argparse.Namespace) -> int:
        sim = read_similarity(args.input)
        target = read_labeling(args.target)
        n = args.sample_n or required_sample_size(args.alpha, args.nu, args.delta, self.config.sample_size_constant)
        out = Path(args.out)
        oracle = MatrixOracle(sim)
        first, model, extended = run_inductive(oracle, target, n, args.alpha, args.nu, args.seed, self.config)
        provenance = self._provenance(args, seed=args.seed)
        write_tree(out / "tree.txt", model.tree, provenance)
        write_point_set(out / "sample.txt", model.sample_ids.tolist(), provenance)
        write_labeling(out / "labels.txt", extended, provenance)

        # Files hold the first seed only; further seeds are summarized
        seeds = range(args.seed + 1, args.seed + max(1, args.repeats))
        runs = [first, *evaluate_inductive(oracle, target, n, args.alpha, args.nu, seeds, self.config)]
        for run in runs:
            print(
                f"seed={run.seed} sample={run.sample_size} sample_error={run.sample_error:.4f} "
                f"extended_error={run.extended_error:.4f} evaluations={run.similarity_evaluations} fraction={run.evaluated_fraction:.4f}"
            )
        print(f"mean_extended_error={float(np.mean([run.extended_error for run in runs])):.4f}")
        return 0

    def eval(self, args: argparse.Namespace) -> int:
        target = read_labeling(args.target)
        if args.tree:
            error, pruning = best_pruning_error(read_tree(args.tree), target, args.k or target.k)
            logger.info(f"best pruning: {pruning}")
        else:
            error = classification_error(read_labeling(args.pred), target)
        print(f"{error:.4f}")
        return 0

    def check(self, args: argparse.Namespace) -> int:
        sim = read_similarity(args.input)
        target = read_labeling(args.target)
        bad = read_point_set(args.bad) if args.bad else []
        if args.property == "strict":
            report = check_strict_separation(sim, target, bad)
        elif args.property == "good":
            report = check_good_neighborhood(sim, target, args.alpha, bad)
        elif args.property == "weak":
            if not args.subsets:
                raise ErrorFactory.validation_error("subsets", None, "the weak property needs --subsets")
            report = check_weak_good_neighborhood(sim, target, args.alpha, args.beta, bad, read_subsets(args.subsets), nu=args.nu)
        elif args.property == "neighbor-fact":
            report = check_neighbor_fact(sim, target, args.alpha, args.nu if args.nu is not None else len(bad) / sim.n, bad)
        else:
            suite = implication_suite(sim, target)
            for arrow in suite.arrows:
                print(f"{'pass' if arrow.passed else 'FAIL'}: {arrow.name} (premise {arrow.premise_holds}, conclusion {arrow.conclusion_holds})")
            return 0
        print(report.model_dump_json(indent=2))
        return 0

    def sweep(self, args: argparse.Namespace) -> int:
        algorithms = [name.strip() for name in args.algos.split(",") if name.strip()]
        table = noise_sweep(algorithms, aistat_family(args.family, args.n), FAMILY_LEVELS, list(range(args.seeds)), self.config)
        if args.out:
            write_error_table(args.out, table, self._provenance(args))
        else:
            print(",".join(table.columns))
            for row in table.rows:
                print(",".join(f"{value:.6f}" for value in row))
        return 0


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one subcommand and map failures to exit statuses.

    Args:
        argv: Arguments without the program name (sys.argv[1:] when omitted)

    Returns:
        0 on success, 2 on invalid input, 1 on internal errors
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config = ConfigManager(args.config).get_config() if args.config else ConfigManager().get_config()
        configure_logging(config)
        handler: Callable[[argparse.Namespace], int] = getattr(Commands(config, argv), args.command)
        return handler(args)
    except ValidationError as e:
        print(f"error: {e.errors()[0]['msg']}", file=sys.stderr)
        return 2
    except LinkageError as e:
        logger.debug(f"{args.command} failed: {e.to_dict()}")
        print(f"error: {e.message}", file=sys.stderr)
        return e.exit_status
    except Exception as e:
        logger.exception(f"{args.command} failed unexpectedly")
        print(f"error: {e}", file=sys.stderr)
        return 1

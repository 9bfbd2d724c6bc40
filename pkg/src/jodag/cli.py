"""Command-line interface: simulate, fit, diagnose, oracle.

Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .analysis import (
    average_hamming,
    gelman_rubin_summary,
    mean_rank_correlation,
    point_estimate,
    tpr_fdr,
)
from .dag import Dag
from .errors import DegenerateVariance, JodagError, OracleLimitError, SingularDesign
from .fileio import (
    load_config,
    read_dataset_csv,
    read_edge_list,
    read_manifest,
    read_trace,
    write_dataset_csv,
    write_edge_list,
    write_manifest,
    write_matrix_csv,
    write_trace,
)
from .oracle import (
    equivalence_class,
    joint_argmax,
    order_forcing_edges,
)
from .ordering import Ordering
from .sampler import ChainConfig, equalized_iterations, run_ensemble
from .scoring import ScoreParams
from .synth import (
    common_private_collection,
    default_edge_probability,
    random_ordered_dag,
    sample_weights,
    similar_orderings,
    simulate,
    triangles,
    unfaithful_scm,
)
from .validation import check_ordering, spawn_seeds

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


class ValidationFailure(ValueError):
    pass


def _preset_path(name: str) -> Path:
    base = resources.files("jodag") / "presets" / f"{name}.toml"
    if not base.is_file():
        available = sorted(
            item.name.removesuffix(".toml")
            for item in (resources.files("jodag") / "presets").iterdir()
            if item.name.endswith(".toml")
        )
        raise ValidationFailure(
            f"unknown preset {name!r}; available: {', '.join(available)}"
        )
    return Path(str(base))


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _resolve_sample_sizes(cfg: dict, n_datasets: int) -> list[int]:
    given = [key for key in ("n", "n_list", "n_total") if key in cfg]
    if len(given) != 1:
        raise ValidationFailure("config must set exactly one of n, n_list, n_total")
    if "n" in cfg:
        sizes = [int(cfg["n"])] * n_datasets
    elif "n_total" in cfg:
        sizes = [int(cfg["n_total"]) // n_datasets] * n_datasets
    else:
        sizes = [int(v) for v in cfg["n_list"]]
        if len(sizes) != n_datasets:
            raise ValidationFailure("n_list must have one entry per dataset")
    if any(n < 2 for n in sizes):
        raise ValidationFailure("sample sizes must be at least 2")
    return sizes


def cmd_simulate(args) -> int:
    if args.config:
        cfg = load_config(Path(args.config))
    else:
        cfg = load_config(_preset_path(args.preset))
    if args.outdir:
        cfg["outdir"] = args.outdir
    if args.seed is not None:
        cfg["seed"] = args.seed

    p = int(cfg.get("p", 0))
    n_datasets = int(cfg.get("K", 0))
    if p < 2 or n_datasets < 1:
        raise ValidationFailure("config must set p >= 2 and K >= 1")
    seed = int(cfg.get("seed", 0))
    sizes = _resolve_sample_sizes(cfg, n_datasets)
    sigma_star = check_ordering(cfg.get("sigma_star", list(range(1, p + 1))), p)
    weight_low = float(cfg.get("weight_low", 0.5))
    weight_high = float(cfg.get("weight_high", 1.0))
    p_edge = cfg.get("p_edge")
    if p_edge is not None and not 0.0 <= float(p_edge) <= 1.0:
        raise ValidationFailure(f"p_edge={p_edge} must lie in [0, 1]")
    motifs = int(cfg.get("unfaithful_motifs", 0))
    common_private = "n_common" in cfg or "n_private" in cfg
    if common_private and motifs:
        raise ValidationFailure("unfaithful_motifs requires random graphs, not common/private")
    if common_private and "target_u" in cfg:
        raise ValidationFailure("target_u requires per-dataset graphs, not common/private")
    outdir = Path(cfg.get("outdir") or ".")

    seeds = spawn_seeds(seed, 2 * n_datasets + 1)
    struct_rng = np.random.default_rng(seeds[0])

    realized_u = None
    if "target_u" in cfg:
        sampled = similar_orderings(
            p, n_datasets, float(cfg["target_u"]), rng=struct_rng
        )
        orderings = sampled.orderings
        realized_u = sampled.pairwise_mean
    else:
        orderings = [sigma_star] * n_datasets

    if common_private:
        graphs = common_private_collection(
            p,
            n_datasets,
            int(cfg.get("n_common", 0)),
            int(cfg.get("n_private", 0)),
            sigma_star,
            rng=struct_rng,
        )
    else:
        graphs = []
        for k in range(n_datasets):
            rng_k = np.random.default_rng(seeds[1 + k])
            edge_prob = float(p_edge) if p_edge is not None else default_edge_probability(p)
            g = random_ordered_dag(p, edge_prob, orderings[k], rng=rng_k)
            if motifs:
                attempts = 0
                while len({tri[2] for tri in triangles(g)}) < motifs:
                    attempts += 1
                    if attempts > 1000:
                        raise ValidationFailure(
                            "could not draw a graph with enough triangular motifs"
                        )
                    g = random_ordered_dag(p, edge_prob, orderings[k], rng=rng_k)
            graphs.append(g)

    outdir.mkdir(parents=True, exist_ok=True)
    files = {"data": [], "truth": []}
    for k, g in enumerate(graphs):
        rng_k = np.random.default_rng(seeds[1 + n_datasets + k])
        if motifs:
            scm = unfaithful_scm(g, motifs, rng=rng_k, low=weight_low, high=weight_high)
        else:
            scm = sample_weights(g, low=weight_low, high=weight_high, rng=rng_k)
        ds = simulate(scm, sizes[k], rng=rng_k)
        data_name = f"data_k{k + 1}.csv"
        truth_name = f"truth_k{k + 1}.csv"
        write_dataset_csv(outdir / data_name, ds.data)
        write_edge_list(outdir / truth_name, g)
        files["data"].append(data_name)
        files["truth"].append(truth_name)

    manifest = {
        "p": p,
        "K": n_datasets,
        "seed": seed,
        "sigma_star": sigma_star.to_string(),
        "orderings": [s.to_string() for s in orderings],
        "n_list": sizes,
        "settings": {k: v for k, v in sorted(cfg.items()) if k != "outdir"},
        "files": files,
    }
    if realized_u is not None:
        manifest["realized_pairwise_u"] = realized_u
    write_manifest(outdir / "manifest.json", manifest)
    print(f"wrote {n_datasets} datasets to {outdir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------


def _load_sources(sources: list[str]):
    first = Path(sources[0])
    if len(sources) == 1 and first.suffix == ".json":
        manifest = read_manifest(first)
        base = first.parent
        datasets = [read_dataset_csv(base / name) for name in manifest["files"]["data"]]
        return datasets, str(first)
    datasets = [read_dataset_csv(Path(path)) for path in sources]
    return datasets, None


def cmd_fit(args) -> int:
    datasets, manifest_path = _load_sources(args.source)
    p = datasets[0].p
    if any(ds.p != p for ds in datasets):
        raise ValidationFailure("datasets disagree on the number of columns")
    params = ScoreParams(
        alpha=args.alpha,
        gamma=args.gamma,
        kappa=args.kappa,
        c0=args.c0,
        max_indegree=args.d,
    )
    iterations = args.iters if args.iters is not None else 20 * p * p
    if args.equalize_budget:
        iterations = equalized_iterations(iterations, p, args.neighborhood)
    burn_in = args.burn_in
    if burn_in is not None and burn_in >= iterations:
        raise ValidationFailure("burn-in must be smaller than the iteration count")
    seeds = spawn_seeds(args.seed, args.chains)
    configs = [
        ChainConfig(
            iterations=iterations,
            burn_in=burn_in,
            neighborhood=args.neighborhood,
            seed=chain_seed,
            thin=args.thin,
        )
        for chain_seed in seeds
    ]
    traces = run_ensemble(configs, datasets, params, threads=args.threads)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    prefixes = []
    for c, trace in enumerate(traces):
        prefix = outdir / f"chain{c + 1}"
        write_trace(prefix, trace)
        prefixes.append(prefix.name)
    write_manifest(
        outdir / "fit.json",
        {
            "p": p,
            "K": len(datasets),
            "iterations": iterations,
            "burn_in": configs[0].resolved_burn_in(),
            "thin": args.thin,
            "neighborhood": args.neighborhood,
            "seed": args.seed,
            "chains": prefixes,
            "params": {
                "alpha": args.alpha,
                "gamma": args.gamma,
                "kappa": args.kappa,
                "c0": args.c0,
                "d": args.d,
            },
            "source_manifest": manifest_path,
            "sources": list(args.source),
        },
    )
    print(f"wrote {len(traces)} chain traces to {outdir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# diagnose
# ---------------------------------------------------------------------------


def cmd_diagnose(args) -> int:
    rundir = Path(args.run)
    fit_info = read_manifest(rundir / "fit.json")
    p = fit_info["p"]
    n_datasets = fit_info["K"]
    chains = [read_trace(rundir / name, n_datasets) for name in fit_info["chains"]]
    if args.gr and len(chains) < 2:
        raise ValidationFailure("gelman-rubin diagnostics require >= 2 chains")

    # Pooled edge inclusion across chains, per dataset.
    inclusion = []
    for k in range(n_datasets):
        counts = np.zeros((p, p))
        total = 0
        for chain in chains:
            for sample in chain["map_edges"]:
                for i, j in sample[k]:
                    counts[i - 1, j - 1] += 1
            total += len(chain["map_edges"])
        inclusion.append(counts / total)

    outdir = Path(args.out) if args.out else rundir
    outdir.mkdir(parents=True, exist_ok=True)
    for k, mat in enumerate(inclusion):
        write_matrix_csv(outdir / f"edge_probability_k{k + 1}.csv", mat)

    summary: dict = {"delta": None, "tau_star": None, "tpr": None, "fdr": None, "gr": None}

    truth_manifest = args.truth or fit_info.get("source_manifest")
    if truth_manifest:
        sim = read_manifest(Path(truth_manifest))
        base = Path(truth_manifest).parent
        truths = [read_edge_list(base / name) for name in sim["files"]["truth"]]
        sigma_star = Ordering.from_string(sim["sigma_star"])
        summary["delta"] = average_hamming(truths, inclusion)
        taus = [
            _kendall(sigma_star, sigma)
            for chain in chains
            for sigma in chain["orderings"]
        ]
        summary["tau_star"] = float(np.mean(taus))
        points = [point_estimate(mat, args.threshold) for mat in inclusion]
        pairs = [tpr_fdr(truth, est) for truth, est in zip(truths, points)]
        summary["tpr"] = float(np.mean([pr[0] for pr in pairs]))
        summary["fdr"] = float(np.mean([pr[1] for pr in pairs]))

    if args.gr:
        from .analysis import gelman_rubin_from_edge_samples

        rhat = gelman_rubin_from_edge_samples(
            [chain["map_edges"] for chain in chains], p
        )
        summary["gr"] = gelman_rubin_summary(rhat)

    text = json.dumps(summary, indent=2, sort_keys=True)
    (outdir / "diagnose.json").write_text(text + "\n")
    print(text)
    return EXIT_OK


def _kendall(a: Ordering, b: Ordering) -> float:
    from .ordering import kendall_tau

    return kendall_tau(a, b)


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


def cmd_oracle(args) -> int:
    payload = json.loads(Path(args.collection).read_text())
    p = int(payload["p"])
    dags = [Dag(p, [tuple(edge) for edge in edges]) for edges in payload["dags"]]
    if not dags:
        raise ValidationFailure("collection contains no graphs")
    sigma_star = check_ordering(payload.get("sigma_star", list(range(1, p + 1))), p)

    classes = [equivalence_class(g) for g in dags]
    essential_union = sorted(set().union(*(cls.essential for cls in classes)))
    emax_satisfied = order_forcing_edges(sigma_star) <= set(essential_union)

    rng = np.random.default_rng(args.seed)
    scms = [sample_weights(g, rng=rng) for g in dags]
    result = joint_argmax(scms, tol=args.tol)

    from .ordering import swap_first_two

    expected_pair = {sigma_star, swap_first_two(sigma_star)}
    report = {
        "p": p,
        "K": len(dags),
        "argmax": sorted(s.to_string() for s in result.argmax),
        "essential_union": [list(edge) for edge in essential_union],
        "emax_satisfied": bool(emax_satisfied),
        "argmax_matches_class_intersection": result.argmax == result.consistent_orderings,
        "two_orderings_identified": (
            result.argmax == frozenset(expected_pair) if emax_satisfied else None
        ),
        "best_score": result.best_score,
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jodag",
        description="Joint Bayesian structure learning of multiple Gaussian DAGs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate synthetic dataset bundles")
    group = sim.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", help="TOML or JSON configuration file")
    group.add_argument("--preset", help="named built-in configuration")
    sim.add_argument("--outdir", help="output directory (overrides config)")
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="run the ordering sampler on datasets")
    fit.add_argument("source", nargs="+", help="simulate manifest.json or data CSV files")
    fit.add_argument("--alpha", type=float, default=0.99)
    fit.add_argument("--gamma", type=float, default=0.01)
    fit.add_argument("--kappa", type=float, default=0.0)
    fit.add_argument("--c0", type=float, default=3.0)
    fit.add_argument("--d", type=int, default=None, help="max in-degree (default: unbounded)")
    fit.add_argument("--iters", type=int, default=None, help="iterations (default 20*p^2)")
    fit.add_argument("--burn-in", type=int, default=None, dest="burn_in")
    fit.add_argument("--thin", type=int, default=1)
    fit.add_argument("--chains", type=int, default=1)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--neighborhood", choices=["r2r", "adj", "rts"], default="r2r")
    fit.add_argument("--threads", type=int, default=None)
    fit.add_argument(
        "--equalize-budget",
        action="store_true",
        help="rescale iterations so per-neighborhood total work matches r2r",
    )
    fit.add_argument("--outdir", required=True)
    fit.set_defaults(func=cmd_fit)

    diag = sub.add_parser("diagnose", help="summarize fitted traces")
    diag.add_argument("--run", required=True, help="directory written by fit")
    diag.add_argument("--truth", default=None, help="simulate manifest for truth metrics")
    diag.add_argument("--gr", action="store_true", help="per-edge Gelman-Rubin diagnostics")
    diag.add_argument("--threshold", type=float, default=0.5)
    diag.add_argument("--out", default=None, help="output directory (default: run dir)")
    diag.set_defaults(func=cmd_diagnose)

    orc = sub.add_parser("oracle", help="verify identifiability claims on a graph collection")
    orc.add_argument("collection", help="JSON file: {p, dags: [[...edges]], sigma_star?}")
    orc.add_argument("--seed", type=int, default=0, help="seed for the faithful weights")
    orc.add_argument("--tol", type=float, default=1e-9)
    orc.add_argument("--out", default=None)
    orc.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationFailure, ValueError, KeyError, OracleLimitError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SingularDesign, DegenerateVariance, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except JodagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: fit, simulate, evaluate and select subcommands.

Configuration may come from a JSON file (--config); explicit flags override
file values.  Exit codes: 0 success, 2 configuration error, 3 data error,
4 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io as gpio
from .core import Hyperparameters
from .engine import ChainConfig, run_chain
from .graph import build_knn_graph, build_temperature_grid, correlation_distance_matrix
from .selection import (aic, biclusters_from_labels, dic_c, f1_average,
                        map_estimate, relative_redundancy, threshold_memberships)
from .simulate import ScenarioSpec, generate_dataset, planted_gene_distances

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


def _merge(args: argparse.Namespace, key: str, default=None):
    """Flag value if given, else config-file value, else default."""
    val = getattr(args, key, None)
    if val is not None:
        return val
    cfg = getattr(args, "_config", {})
    return cfg.get(key, default)


def _load_config(args: argparse.Namespace) -> None:
    cfg = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
    args._config = cfg


def _hyper_from_config(args) -> Hyperparameters:
    payload = getattr(args, "_config", {}).get("hyper", {})
    try:
        return Hyperparameters(**payload)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad hyperparameters: {exc}") from exc


def _require_file(path, what: str) -> Path:
    if path is None:
        raise ConfigError(f"missing required input: {what}")
    p = Path(path)
    if not p.exists():
        raise DataError(f"{what} file not found: {p}")
    return p


def _load_data(args):
    path = _require_file(_merge(args, "data"), "--data")
    try:
        return gpio.load_expression_csv(path)
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def _build_graphs(args, y):
    gene_graph = cond_graph = None
    r_gene = int(_merge(args, "knn_r", 15))
    r_cond = int(_merge(args, "cond_knn_r", 3))
    try:
        gd = _merge(args, "gene_distances")
        ge = _merge(args, "gene_edges")
        if gd is not None and ge is not None:
            raise ConfigError("give only one of gene_distances / gene_edges")
        if gd is not None:
            ids, D = gpio.load_distance_csv(_require_file(gd, "gene distances"))
            if len(ids) != y.p:
                raise DataError(f"gene distance matrix is {len(ids)}x{len(ids)}, data has p={y.p}")
            gene_graph = build_knn_graph(D, min(r_gene, y.p - 1))
        elif ge is not None:
            pairs = gpio.load_edge_list(_require_file(ge, "gene edge list"))
            gene_graph = gpio.graph_from_edge_list(pairs, y.p, r=None)
        cd = _merge(args, "cond_distances")
        xi = _merge(args, "cond_xi")
        if cd is not None and xi is not None:
            raise ConfigError("give only one of cond_distances / cond_xi")
        if cd is not None:
            ids, D = gpio.load_distance_csv(_require_file(cd, "condition distances"))
            if len(ids) != y.q:
                raise DataError(f"condition distance matrix is {len(ids)}x{len(ids)}, data has q={y.q}")
            cond_graph = build_knn_graph(D, min(r_cond, y.q - 1))
        elif xi is not None:
            D, mask = correlation_distance_matrix(y.q, float(xi))
            cond_graph = build_knn_graph(D, min(r_cond, y.q - 1), mask=mask)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    return gene_graph, cond_graph


def _chain_config(args, K: int, seed: int) -> ChainConfig:
    t_min = float(_merge(args, "t_min", 0.5))
    t_max = float(_merge(args, "t_max", 5.0))
    t_count = int(_merge(args, "t_count", 10))
    spacing = _merge(args, "t_spacing", "geometric")
    try:
        grid = build_temperature_grid(t_min, t_max, t_count, spacing)
        return ChainConfig(
            K=K,
            max_iters=int(_merge(args, "iters", 20000)),
            burn_in=int(_merge(args, "burn_in", 10000)),
            thin=int(_merge(args, "thin", 10)),
            rng_seed=seed,
            hyper=_hyper_from_config(args),
            grid_rho=grid,
            grid_kappa=grid,
            flatness_fraction=float(_merge(args, "flatness_fraction", 0.8)),
            flatness_min_mean=float(_merge(args, "flatness_min_mean", 20.0)),
            gamma_floor_coef=float(_merge(args, "gamma_floor_coef", 0.0001)),
            gamma_floor_exp=float(_merge(args, "gamma_floor_exp", 0.7)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _progress_printer(quiet: bool):
    if quiet:
        return None

    def report(t, total):
        print(f"iteration {t}/{total}", file=sys.stderr)

    return report


def _summarize(trace, config: ChainConfig, threshold: float = 0.5) -> dict:
    rec = map_estimate(trace)
    dic, p_c = dic_c(trace)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        bics = threshold_memberships(trace.rho_marginal, trace.kappa_marginal, threshold)
    return {
        "seed": config.rng_seed,
        "K": config.K,
        "iters": config.max_iters,
        "burn_in": config.burn_in,
        "thin": config.thin,
        "criteria": {
            "dic_c": dic,
            "p_c": p_c,
            "aic": aic(rec),
            "mean_loglik": float(trace.logliks().mean()),
            "map_loglik": rec.loglik,
        },
        "map": {
            "iteration": rec.iteration,
            "mu0": rec.mu0,
            "mu": rec.mu,
            "sigma2": rec.sigma2,
            "rho": rec.rho,
            "kappa": rec.kappa,
            "logpost": rec.logpost,
        },
        "grid_rho": trace.grid_rho.values,
        "grid_kappa": trace.grid_kappa.values,
        "log_psi": trace.log_psi,
        "visits_total": trace.visits_total,
        "visits_second_half": trace.visits_second_half,
        "n_marginal_samples": trace.n_marginal_samples,
        **gpio.biclusters_payload(bics),
    }


def cmd_fit(args) -> int:
    y = _load_data(args)
    gene_graph, cond_graph = _build_graphs(args, y)
    K = _merge(args, "K")
    if K is None:
        raise ConfigError("missing required option: -K/--K")
    seed = int(_merge(args, "seed", 0))
    config = _chain_config(args, int(K), seed)
    out = Path(_merge(args, "out", "gibbsplaid-out"))
    trace = run_chain(y, config, gene_graph, cond_graph,
                      progress=_progress_printer(args.quiet))
    gpio.write_trace_jsonl(out / "trace.jsonl", trace)
    gpio.dump_json(out / "summary.json", _summarize(trace, config))
    gpio.write_memberships_csv(out / "memberships_rows.csv", y.row_ids, trace.rho_marginal)
    gpio.write_memberships_csv(out / "memberships_cols.csv", y.col_ids, trace.kappa_marginal)
    if not args.quiet:
        print(f"wrote {out}/summary.json", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    try:
        blocks = getattr(args, "_config", {}).get("blocks")
        if blocks is not None:
            blocks = [((int(b["rows"][0]), int(b["rows"][1])),
                       (int(b["cols"][0]), int(b["cols"][1]))) for b in blocks]
        spec = ScenarioSpec(
            p=int(_merge(args, "p", 100)),
            q=int(_merge(args, "q", 17)),
            K=int(_merge(args, "K", 2)),
            mean_rule=_merge(args, "rule", "yeast"),
            xi=float(_merge(args, "xi", 0.8)),
            overlap=float(_merge(args, "overlap", 0.0)),
            blocks=blocks,
            rng_seed=int(_merge(args, "seed", 0)),
        )
        y, state, params = generate_dataset(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(_merge(args, "out", "gibbsplaid-sim"))
    gpio.write_expression_csv(out / "dataset.csv", y)
    gpio.write_distance_csv(out / "gene_distances.csv", y.row_ids,
                            planted_gene_distances(state))
    D_cond, _ = correlation_distance_matrix(spec.q, spec.xi)
    gpio.write_distance_csv(out / "cond_distances.csv", y.col_ids, D_cond)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        bics = biclusters_from_labels(state.rho, state.kappa)
    gpio.dump_json(out / "truth.json", {
        "seed": spec.rng_seed,
        "spec": {"p": spec.p, "q": spec.q, "K": spec.K, "mean_rule": spec.mean_rule,
                 "xi": spec.xi, "overlap": spec.overlap},
        "rho": state.rho,
        "kappa": state.kappa,
        "params": {"mu0": params.mu0, "mu": params.mu, "sigma2": params.sigma2,
                   "a": params.raw_gene_effects, "b": params.raw_cond_effects},
        **gpio.biclusters_payload(bics),
    })
    if not args.quiet:
        print(f"wrote {out}/dataset.csv and truth.json", file=sys.stderr)
    return 0


def _read_biclusters(path, what: str):
    payload = gpio.load_json(_require_file(path, what))
    if "biclusters" not in payload:
        raise DataError(f"{path}: no 'biclusters' key")
    try:
        return gpio.biclusters_from_payload(payload)
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: bad bicluster payload: {exc}") from exc


def cmd_evaluate(args) -> int:
    est = _read_biclusters(_merge(args, "estimated"), "--estimated")
    tru = _read_biclusters(_merge(args, "truth"), "--truth")
    if not est:
        raise DataError("estimated bicluster set is empty")
    if not tru:
        raise DataError("truth bicluster set is empty")
    out = Path(_merge(args, "out", "gibbsplaid-eval"))
    from .selection import f1_pair
    lines = ["est,truth,recall,precision,f1,redundancy_rows,redundancy_cols"]
    for i, a in enumerate(est):
        for j, b in enumerate(tru):
            rec, prec, f1 = f1_pair(a, b)
            lines.append(f"{i},{j},{rec!r},{prec!r},{f1!r},"
                         f"{relative_redundancy(a, b, 'rows')!r},"
                         f"{relative_redundancy(a, b, 'columns')!r}")
    gpio._atomic_write_text(out / "f1_pairs.csv", "\n".join(lines) + "\n")
    report = {
        "f1_est_vs_truth": f1_average(est, tru),
        "f1_truth_vs_est": f1_average(tru, est),
        "n_estimated": len(est),
        "n_truth": len(tru),
    }
    gpio.dump_json(out / "evaluation.json", report)
    print(json.dumps(gpio._jsonable(report), sort_keys=True))
    return 0


def _select_cell(payload: dict) -> dict:
    """Run one (K, seed) chain; used directly or via worker processes."""
    ns = argparse.Namespace(**payload["args"])
    ns._config = payload["config"]
    y = _load_data(ns)
    gene_graph, cond_graph = _build_graphs(ns, y)
    config = _chain_config(ns, payload["K"], payload["seed"])
    trace = run_chain(y, config, gene_graph, cond_graph)
    rec = map_estimate(trace)
    dic, p_c = dic_c(trace)
    return {"K": payload["K"], "seed": payload["seed"], "dic_c": dic, "p_c": p_c,
            "aic": aic(rec), "mean_loglik": float(trace.logliks().mean()),
            "map_loglik": rec.loglik}


def cmd_select(args) -> int:
    k_list = _merge(args, "k_list")
    if not k_list:
        raise ConfigError("missing required option: --k-list")
    try:
        ks = sorted({int(k) for k in str(k_list).split(",")})
        seeds = [int(s) for s in str(_merge(args, "seeds", "0")).split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --k-list/--seeds: {exc}") from exc
    _load_data(args)  # fail early on data problems
    arg_keys = ("data", "gene_distances", "gene_edges", "cond_distances", "cond_xi",
                "knn_r", "cond_knn_r", "iters", "burn_in", "thin", "t_min", "t_max",
                "t_count", "t_spacing")
    plain = {k: getattr(args, k, None) for k in arg_keys}
    jobs = [{"args": plain, "config": getattr(args, "_config", {}), "K": K, "seed": s}
            for K in ks for s in seeds]
    workers = int(_merge(args, "workers", 1))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_select_cell, jobs))
    else:
        cells = [_select_cell(job) for job in jobs]
    out = Path(_merge(args, "out", "gibbsplaid-select"))
    run_lines = ["K,seed,dic_c,p_c,aic,mean_loglik,map_loglik"]
    for c in cells:
        run_lines.append(f"{c['K']},{c['seed']},{c['dic_c']!r},{c['p_c']!r},"
                         f"{c['aic']!r},{c['mean_loglik']!r},{c['map_loglik']!r}")
    gpio._atomic_write_text(out / "runs.csv", "\n".join(run_lines) + "\n")
    agg_lines = ["K,n_replicates,dic_c_mean,dic_c_se,aic_mean,aic_se,p_c_mean"]
    for K in ks:
        sub = [c for c in cells if c["K"] == K]
        n = len(sub)
        dics = np.array([c["dic_c"] for c in sub])
        aics = np.array([c["aic"] for c in sub])
        pcs = np.array([c["p_c"] for c in sub])
        se_d = repr(float(dics.std(ddof=1) / np.sqrt(n))) if n >= 2 else ""
        se_a = repr(float(aics.std(ddof=1) / np.sqrt(n))) if n >= 2 else ""
        agg_lines.append(f"{K},{n},{dics.mean()!r},{se_d},{aics.mean()!r},{se_a},{pcs.mean()!r}")
    gpio._atomic_write_text(out / "criteria.csv", "\n".join(agg_lines) + "\n")
    if not args.quiet:
        print(f"wrote {out}/criteria.csv", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gibbsplaid",
                                     description="Graph-prior plaid biclustering")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file; flags override")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--quiet", action="store_true")

    def chain_opts(sp):
        sp.add_argument("--data", help="expression CSV/TSV")
        sp.add_argument("--gene-distances", dest="gene_distances")
        sp.add_argument("--gene-edges", dest="gene_edges")
        sp.add_argument("--cond-distances", dest="cond_distances")
        sp.add_argument("--cond-xi", dest="cond_xi", type=float,
                        help="build the lag-correlation condition graph")
        sp.add_argument("--knn-r", dest="knn_r", type=int)
        sp.add_argument("--cond-knn-r", dest="cond_knn_r", type=int)
        sp.add_argument("--iters", type=int)
        sp.add_argument("--burn-in", dest="burn_in", type=int)
        sp.add_argument("--thin", type=int)
        sp.add_argument("--t-min", dest="t_min", type=float)
        sp.add_argument("--t-max", dest="t_max", type=float)
        sp.add_argument("--t-count", dest="t_count", type=int)
        sp.add_argument("--t-spacing", dest="t_spacing", choices=["linear", "geometric"])

    sp = sub.add_parser("fit", help="run one chain and write its outputs")
    common(sp)
    chain_opts(sp)
    sp.add_argument("-K", "--K", type=int)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("simulate", help="generate a synthetic dataset")
    common(sp)
    sp.add_argument("--p", type=int)
    sp.add_argument("--q", type=int)
    sp.add_argument("-K", "--K", type=int)
    sp.add_argument("--rule", choices=["yeast", "rd", "custom"])
    sp.add_argument("--xi", type=float)
    sp.add_argument("--overlap", type=float)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("evaluate", help="score estimated biclusters against truth")
    common(sp)
    sp.add_argument("--estimated")
    sp.add_argument("--truth")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("select", help="K-sweep with replicate seeds")
    common(sp)
    chain_opts(sp)
    sp.add_argument("--k-list", dest="k_list")
    sp.add_argument("--seeds")
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_select)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _load_config(args)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

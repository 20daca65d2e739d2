"""Command-line surface: distances, plans, benchmarks, two-sample tests and
retrieval evaluation.

Exit codes: 0 success, 1 input/usage error, 2 solver did not converge (the
value is still printed).
"""

from __future__ import annotations

import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import graphs as graphmod
from . import io as iomod
from . import report as reportmod
from .core import validate_mmset
from .errors import AnchorError
from .stats import permutation_test
from .sweep import anchor_energy
from .transport import SolverConfig, aep, anchor_wasserstein, entropic_gw

DEFAULT_EPS_AW = 1e-5
DEFAULT_EPS_GW = 10.0
THREADS_ENV = "ANCHOROT_THREADS"


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load_input(path, weights_path, rank, as_graph):
    if as_graph:
        g = graphmod.read_edgelist(path)
        costs = graphmod.geodesic_cost(g)
        weights = iomod.load_weights(weights_path) if weights_path else None
        S = validate_mmset(costs, weights)
        if rank:
            from .core import rank_transform

            S = validate_mmset(rank_transform(S.costs), S.weights)
        return S
    return iomod.load_mmset(path, weights_path, rank=rank)


def _thread_count(threads) -> int:
    if threads:
        return threads
    env = os.environ.get(THREADS_ENV)
    return int(env) if env else 1


@click.group()
def main():
    """Anchor-based distances, plans and tests for measured metric sets."""


@main.command()
@click.argument("metric", type=click.Choice(["ae", "ae-naive", "aw", "gw"]))
@click.argument("cost1", type=click.Path(exists=True))
@click.argument("cost2", type=click.Path(exists=True))
@click.option("--weights1", type=click.Path(exists=True), default=None)
@click.option("--weights2", type=click.Path(exists=True), default=None)
@click.option("--p", default=1, show_default=True, help="Ground-cost exponent (1 or 2).")
@click.option("--eps", type=float, default=None, help="Entropic regularization (aw/gw).")
@click.option("--rank", is_flag=True, help="Rank-transform costs before comparing.")
@click.option("--graph", "as_graph", is_flag=True, help="Inputs are edge lists; use geodesic costs.")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON run record instead of a bare value.")
def dist(metric, cost1, cost2, weights1, weights2, p, eps, rank, as_graph, as_json):
    """Distance between two MMSets given as cost-matrix or edge-list files."""
    if metric in ("aw", "gw") and eps is None:
        _fail(f"--eps is required for metric {metric!r}")
    try:
        S1 = _load_input(cost1, weights1, rank, as_graph)
        S2 = _load_input(cost2, weights2, rank, as_graph)
    except AnchorError as exc:
        _fail(str(exc))

    converged = True
    started = time.perf_counter()
    try:
        if metric == "ae":
            method = "sweep" if p == 1 else "naive"
            value = anchor_energy(S1, S2, p, method=method)
            results = {"distance": value}
        elif metric == "ae-naive":
            value = anchor_energy(S1, S2, p, method="naive")
            results = {"distance": value}
        elif metric == "aw":
            res = anchor_wasserstein(S1, S2, p, SolverConfig(epsilon=eps))
            value = res.distance_cost
            converged = res.converged
            results = {
                "distance": res.distance_cost,
                "regularized_objective": res.regularized_objective,
                "iterations": res.iterations,
                "converged": res.converged,
            }
        else:
            res = entropic_gw(S1, S2, SolverConfig(epsilon=eps))
            value = res.gw_objective
            converged = res.converged
            results = {
                "distance": res.gw_objective,
                "outer_iterations": res.outer_iterations,
                "converged": res.converged,
            }
    except AnchorError as exc:
        _fail(str(exc))
    elapsed = time.perf_counter() - started

    if as_json:
        params = {
            "metric": metric, "cost1": cost1, "cost2": cost2, "p": p,
            "eps": eps, "rank": rank, "graph": as_graph,
        }
        click.echo(iomod.run_record("dist", params, elapsed, results))
    elif metric == "aw":
        click.echo(f"{results['distance']:.12g} {results['regularized_objective']:.12g}")
    else:
        click.echo(f"{value:.12g}")
    if not converged:
        sys.exit(2)


@main.command()
@click.argument("kind", type=click.Choice(["aep", "aw", "gw"]))
@click.argument("input1", type=click.Path(exists=True))
@click.argument("input2", type=click.Path(exists=True))
@click.option("-o", "--out", "out_path", type=click.Path(), required=True)
@click.option("--weights1", type=click.Path(exists=True), default=None)
@click.option("--weights2", type=click.Path(exists=True), default=None)
@click.option("--p", default=1, show_default=True)
@click.option("--eps", type=float, default=None)
@click.option("--rank", is_flag=True)
@click.option("--graph", "as_graph", is_flag=True)
@click.option("--match", "match_path", type=click.Path(), default=None,
              help="Also write the row-argmax matching and print its order correlation.")
@click.option("--order-file", type=click.Path(exists=True), default=None,
              help="True role order per row node; defaults to node index.")
def plan(kind, input1, input2, out_path, weights1, weights2, p, eps, rank, as_graph,
         match_path, order_file):
    """Compute a transport plan and write it as CSV."""
    if kind in ("aw", "gw") and eps is None:
        _fail(f"--eps is required for kind {kind!r}")
    try:
        S1 = _load_input(input1, weights1, rank, as_graph)
        S2 = _load_input(input2, weights2, rank, as_graph)
    except AnchorError as exc:
        _fail(str(exc))

    converged = True
    try:
        if kind == "aep":
            tplan = aep(S1, S2, p)
        elif kind == "aw":
            res = anchor_wasserstein(S1, S2, p, SolverConfig(epsilon=eps))
            tplan = res.plan
            converged = res.converged
        else:
            res = entropic_gw(S1, S2, SolverConfig(epsilon=eps))
            tplan = res.plan
            converged = res.converged
    except AnchorError as exc:
        _fail(str(exc))

    iomod.save_matrix(out_path, tplan.matrix, fmt="csv")
    if match_path:
        match = graphmod.extract_matching(tplan)
        np.savetxt(match_path, match.assignment, fmt="%d")
        try:
            if order_file:
                order = np.loadtxt(order_file).reshape(-1)
                corr = float(np.corrcoef(order, match.assignment.astype(float))[0, 1])
            else:
                corr = graphmod.order_correlation(match)
            click.echo(f"order_correlation {corr:.12g}")
        except AnchorError as exc:
            click.echo(f"order_correlation undefined ({exc})")
    if not converged:
        sys.exit(2)


def _synthetic_mmset(n, rng):
    C = rng.random((n, n))
    C = (C + C.T) / 2.0
    np.fill_diagonal(C, 0.0)
    return validate_mmset(C)


def _subsample(costs, n, rng):
    idx = rng.choice(costs.shape[0], size=n, replace=False)
    return validate_mmset(costs[np.ix_(idx, idx)])


@main.command()
@click.option("--sizes", default="128,256,512,1024,2048", show_default=True)
@click.option("--repeats", default=1, show_default=True)
@click.option("-o", "--out", "out_path", type=click.Path(), required=True)
@click.option("--methods", default="ae,ae-naive", show_default=True,
              help="Comma list from ae, ae-naive, aw, gw.")
@click.option("--cost1", type=click.Path(exists=True), default=None,
              help="Subsample this cost matrix instead of synthetic data.")
@click.option("--cost2", type=click.Path(exists=True), default=None)
@click.option("--naive-max", default=1024, show_default=True,
              help="Skip ae-naive above this size.")
@click.option("--eps-aw", default=DEFAULT_EPS_AW, show_default=True)
@click.option("--eps-gw", default=DEFAULT_EPS_GW, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--plot", "plot_path", type=click.Path(), default=None,
              help="Also render a log-log timing figure.")
def bench(sizes, repeats, out_path, methods, cost1, cost2, naive_max, eps_aw, eps_gw,
          seed, plot_path):
    """Time the distance evaluators on growing problem sizes.

    Ingestion and subsampling are excluded from the timings; each row is
    the best of the requested repeats on a single worker.
    """
    try:
        size_list = [int(s) for s in sizes.split(",") if s]
    except ValueError:
        _fail(f"bad --sizes {sizes!r}")
    if any(s < 32 for s in size_list):
        _fail("sizes must be >= 32")
    method_list = [m for m in methods.split(",") if m]
    for m in method_list:
        if m not in ("ae", "ae-naive", "aw", "gw"):
            _fail(f"unknown method {m!r}")
    rng = np.random.default_rng(seed)
    base1 = iomod.load_matrix(cost1) if cost1 else None
    base2 = iomod.load_matrix(cost2) if cost2 else None

    def evaluate(method, S1, S2):
        if method == "ae":
            return anchor_energy(S1, S2, 1, method="sweep")
        if method == "ae-naive":
            return anchor_energy(S1, S2, 1, method="naive")
        if method == "aw":
            return anchor_wasserstein(S1, S2, 1, SolverConfig(epsilon=eps_aw)).distance_cost
        return entropic_gw(S1, S2, SolverConfig(epsilon=eps_gw)).gw_objective

    # warm the JIT kernels so compilation does not pollute the first row
    warm = _synthetic_mmset(32, rng)
    anchor_energy(warm, warm, 1, method="sweep")
    anchor_energy(warm, warm, 1, method="naive")

    rows = []
    for n in size_list:
        if base1 is not None:
            S1 = _subsample(base1, n, rng)
            S2 = _subsample(base2 if base2 is not None else base1, n, rng)
        else:
            S1 = _synthetic_mmset(n, rng)
            S2 = _synthetic_mmset(n, rng)
        for method in method_list:
            if method == "ae-naive" and n > naive_max:
                continue
            best = None
            for _ in range(max(1, repeats)):
                started = time.perf_counter()
                evaluate(method, S1, S2)
                elapsed = time.perf_counter() - started
                best = elapsed if best is None else min(best, elapsed)
            rows.append({"method": method, "n": n, "seconds": best})

    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "n", "seconds"])
        for r in rows:
            writer.writerow([r["method"], r["n"], f"{r['seconds']:.6g}"])
    if plot_path:
        reportmod.bench_figure(rows, plot_path)


def _family_from_dir(path, feature):
    from .core import AnchorFamily

    files = sorted(Path(path).iterdir())
    dists = []
    for f in files:
        if f.is_file():
            dists.append(graphmod.graph_feature(graphmod.read_edgelist(f), feature))
    if len(dists) < 2:
        _fail(f"{path}: need at least two graphs")
    return AnchorFamily.from_distributions(dists)


@main.command()
@click.argument("dir1", type=click.Path(exists=True, file_okay=False))
@click.argument("dir2", type=click.Path(exists=True, file_okay=False))
@click.option("--feature", type=click.Choice(["degree", "clustering"]), default="degree",
              show_default=True)
@click.option("--n-perm", default=199, show_default=True)
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--seed", default=0, show_default=True)
def test2(dir1, dir2, feature, n_perm, alpha, seed):
    """Energy-distance permutation test between two directories of graphs."""
    try:
        F1 = _family_from_dir(dir1, feature)
        F2 = _family_from_dir(dir2, feature)
        rep = permutation_test(F1, F2, n_perm=n_perm, alpha=alpha, seed=seed)
    except AnchorError as exc:
        _fail(str(exc))
    click.echo(json.dumps({
        "statistic": rep.statistic,
        "p_value": rep.p_value,
        "permutations": rep.permutations,
        "alpha": rep.alpha,
        "reject": rep.reject,
    }))


def _pair_distance(metric, p, eps, S1, S2):
    if metric == "ae":
        method = "sweep" if p == 1 else "naive"
        return anchor_energy(S1, S2, p, method=method)
    if metric == "aw":
        return anchor_wasserstein(S1, S2, p, SolverConfig(epsilon=eps)).distance_cost
    return entropic_gw(S1, S2, SolverConfig(epsilon=eps)).gw_objective


@main.command()
@click.argument("corpus", type=click.Path(exists=True, file_okay=False))
@click.argument("labels", type=click.Path(exists=True))
@click.option("--metric", type=click.Choice(["ae", "aw", "gw"]), default="ae", show_default=True)
@click.option("--p", default=1, show_default=True)
@click.option("--eps", type=float, default=None)
@click.option("--rank", is_flag=True)
@click.option("--graph", "as_graph", is_flag=True)
@click.option("-o", "--out", "out_path", type=click.Path(), required=True,
              help="CSV of pairwise distances and per-pair seconds.")
@click.option("--summary", "summary_path", type=click.Path(), default=None)
@click.option("--threads", type=int, default=None,
              help=f"Worker threads (default 1, or ${THREADS_ENV}).")
@click.option("--plot", "plot_path", type=click.Path(), default=None)
def knn(corpus, labels, metric, p, eps, rank, as_graph, out_path, summary_path, threads,
        plot_path):
    """Leave-one-out 1-NN (plus top-3/top-5) retrieval over a corpus."""
    if metric in ("aw", "gw") and eps is None:
        _fail(f"--eps is required for metric {metric!r}")
    label_map = {}
    with open(labels) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, label = [t.strip() for t in line.split(",", 1)]
            label_map[name] = label
    names = sorted(label_map)
    try:
        sets = [_load_input(str(Path(corpus) / name), None, rank, as_graph) for name in names]
    except AnchorError as exc:
        _fail(str(exc))
    if len(sets) < 2:
        _fail("corpus must contain at least two items")

    k = len(sets)
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    D = np.zeros((k, k))
    secs = np.zeros((k, k))

    def work(pair):
        i, j = pair
        started = time.perf_counter()
        d = _pair_distance(metric, p, eps, sets[i], sets[j])
        return i, j, d, time.perf_counter() - started

    started_all = time.perf_counter()
    n_workers = _thread_count(threads)
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(work, pairs))
    else:
        results = [work(pr) for pr in pairs]
    total = time.perf_counter() - started_all
    for i, j, d, s in results:
        D[i, j] = D[j, i] = d
        secs[i, j] = s

    y = np.array([label_map[n] for n in names])
    hits = {1: 0, 3: 0, 5: 0}
    for i in range(k):
        order = np.argsort(np.delete(D[i], i), kind="stable")
        others = np.delete(np.arange(k), i)
        ranked = y[others[order]]
        for kk in hits:
            if y[i] in ranked[:kk]:
                hits[kk] += 1

    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item1", "item2", "distance", "seconds"])
        for i, j in pairs:
            writer.writerow([names[i], names[j], f"{D[i, j]:.12g}", f"{secs[i, j]:.6g}"])
    summary = {
        "metric": metric,
        "items": k,
        "top1": hits[1] / k,
        "top3": hits[3] / k,
        "top5": hits[5] / k,
        "seconds_total": total,
    }
    click.echo(json.dumps(summary))
    if summary_path:
        with open(summary_path, "w") as fh:
            json.dump(summary, fh, indent=2)
    if plot_path:
        reportmod.knn_figure(summary, plot_path)


if __name__ == "__main__":
    main()

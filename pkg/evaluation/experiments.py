# ================== EXPERIMENTS ==================
"""
Deney protokollerini çalıştırıp rapor satırlarına dönüştür
"""

from collections import defaultdict
from typing import Dict, List

import numpy as np

from config.settings import PROTOCOLS, RunConfig
from evaluation.protocols import ablation_table, run_ablation, run_groups, run_noise, run_sweep
from evaluation.reports import ReportRow
from graph.interactions import InteractionGraph
from utils.errors import ConfigurationError
from utils.helpers import log


def _ablation_rows(graph: InteractionGraph, run: RunConfig, verbose: bool) -> List[ReportRow]:
    outcomes = run_ablation(graph, run.train, run.variants, run.seeds, run.test_fraction, run.workers, verbose)
    table = ablation_table(outcomes)
    return [ReportRow("ablation", variant, "all", metric, float(value))
            for variant, row in table.iterrows() for metric, value in row.items()]


def _noise_rows(graph: InteractionGraph, run: RunConfig, verbose: bool) -> List[ReportRow]:
    outcomes = run_noise(graph, run.train, run.noise_ratios, run.noise_variants, run.seeds,
                         run.test_fraction, run.workers, verbose)
    drops: Dict[tuple, List[float]] = defaultdict(list)
    for o in outcomes:
        drops[(o.variant, o.ratio)].append(o.drop)
    return [ReportRow("noise", variant, f"noise={ratio:g}", "recall@20_drop", float(np.mean(values)))
            for (variant, ratio), values in drops.items()]


def _group_rows(graph: InteractionGraph, run: RunConfig, verbose: bool) -> List[ReportRow]:
    results = run_groups(graph, run.train, run.group_axis, run.group_boundaries, run.seeds,
                         run.test_fraction, run.workers, verbose)
    values: Dict[tuple, List[float]] = defaultdict(list)
    for result in results:
        for label, report in result.groups.items():
            for metric, value in report.metrics().items():
                values[(label, metric)].append(value)
    group = f"{run.group_axis}:"
    return [ReportRow("groups", run.train.variant, group + label, metric, float(np.mean(v)))
            for (label, metric), v in values.items()]


def _sweep_rows(graph: InteractionGraph, run: RunConfig, verbose: bool) -> List[ReportRow]:
    results = run_sweep(graph, run.train, run.sweep_param, run.sweep_values, run.seeds,
                        run.test_fraction, run.workers, verbose)
    recalls: Dict[str, List[float]] = defaultdict(list)
    for result in results:
        recalls[result.label].append(result.report.recall[20])
    return [ReportRow("hyperparam-sweep", run.train.variant, label, "recall@20", float(np.mean(v)))
            for label, v in recalls.items()]


_RUNNERS = {
    "ablation": _ablation_rows,
    "noise": _noise_rows,
    "groups": _group_rows,
    "hyperparam-sweep": _sweep_rows,
}


def run_protocol(protocol: str, graph: InteractionGraph, run: RunConfig, verbose: bool = False) -> List[ReportRow]:
    """Protokol hücrelerini çalıştır

    noise: |oranlar| x |varyantlar| satır; hyperparam-sweep: değer başına bir satır.
    """
    if protocol not in PROTOCOLS:
        raise ConfigurationError(f"bilinmeyen protokol: {protocol} (seçenekler: {', '.join(PROTOCOLS)})")
    log(f"🔬 Protokol: {protocol} | seeds={list(run.seeds)} workers={run.workers}")
    rows = _RUNNERS[protocol](graph, run, verbose)
    log(f"📝 {len(rows)} rapor satırı üretildi")
    return rows

# ================== EVALUATION PROTOCOLS ==================
"""
Değerlendirme protokolleri - sıralama metrikleri, seyreklik grupları, gürültü
enjeksiyonu, ablation varyantları ve hiperparametre taraması
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd

from config.settings import (NOISE_MAX_ATTEMPTS, SWEEP_GRIDS, TOP_KS, VARIANT_CONFIGS, VERBOSE_TRAIN,
                             TrainConfig)
from graph.adjacency import normalize_adjacency
from graph.interactions import InteractionGraph, TestMap, split
from metrics.ranking import RankingReport, rank_embeddings
from metrics.smoothing import mad
from training.trainer import EpochRecord, ModelParams, train
from utils.errors import ConfigurationError, ContractViolation, NoiseInjectionError
from utils.helpers import log, rng_stream


# ================== SIRALAMA ==================
def rank_metrics(model: ModelParams, train_graph: InteractionGraph, test: TestMap,
                 ks: Iterable[int] = TOP_KS, keep_per_user: bool = False) -> RankingReport:
    """Eğitim grafı üzerinde kodlanmış gömülerle Recall/NDCG"""
    users, items = model.user_item_embeddings(normalize_adjacency(train_graph))
    return rank_embeddings(users, items, train_graph, test, ks, keep_per_user=keep_per_user)


# ================== GRUPLAR ==================
def bucket_labels(boundaries: Sequence[int]) -> List[str]:
    return [f"{lo}-{hi}" for lo, hi in zip(boundaries[:-1], boundaries[1:])]


def degree_buckets(degrees: np.ndarray, boundaries: Sequence[int]) -> pd.Series:
    """Sol-kapalı, sağ-açık aralıklar: [lo, hi)"""
    boundaries = [int(b) for b in boundaries]
    if len(boundaries) < 2 or any(b >= c for b, c in zip(boundaries[:-1], boundaries[1:])):
        raise ContractViolation(f"sınırlar kesin artan olmalı: {boundaries}")
    return pd.cut(pd.Series(degrees), bins=boundaries, right=False, labels=bucket_labels(boundaries))


def group_eval_embeddings(user_emb: np.ndarray, item_emb: np.ndarray, train_graph: InteractionGraph,
                          test: TestMap, axis: str, boundaries: Sequence[int],
                          ks: Iterable[int] = TOP_KS) -> Dict[str, RankingReport]:
    """Etkileşim sayısı kovalarına göre rapor; boş kovalar sonuçta yer almaz

    axis="item": her kullanıcının test kümesi kovadaki ürünlerle sınırlanır,
    isabetler ürünün kovasına yazılır.
    """
    if axis == "user":
        buckets = degree_buckets(train_graph.user_degrees(), boundaries)
    elif axis == "item":
        buckets = degree_buckets(train_graph.item_degrees(), boundaries)
    else:
        raise ConfigurationError(f"grup ekseni 'user' veya 'item' olmalı: {axis}")

    reports: Dict[str, RankingReport] = {}
    for label in bucket_labels(boundaries):
        members = np.flatnonzero((buckets == label).to_numpy())
        if axis == "user":
            users = [u for u in members if u in test and len(test[u])]
            if not users:
                continue
            reports[label] = rank_embeddings(user_emb, item_emb, train_graph, test, ks, users=users)
        else:
            restricted = {u: t[np.isin(t, members)] for u, t in test.items()}
            restricted = {u: t for u, t in restricted.items() if t.size}
            if not restricted:
                continue
            reports[label] = rank_embeddings(user_emb, item_emb, train_graph, restricted, ks)
    return reports


def group_eval(model: ModelParams, train_graph: InteractionGraph, test: TestMap, axis: str,
               boundaries: Sequence[int], ks: Iterable[int] = TOP_KS) -> Dict[str, RankingReport]:
    users, items = model.user_item_embeddings(normalize_adjacency(train_graph))
    return group_eval_embeddings(users, items, train_graph, test, axis, boundaries, ks)


# ================== GÜRÜLTÜ ==================
def inject_noise(g: InteractionGraph, ratio: float, seed: int,
                 exclude: Optional[Set[Tuple[int, int]]] = None) -> InteractionGraph:
    """⌊ratio·E⌋ adet grafta olmayan rastgele kullanıcı-ürün çifti ekle

    exclude: eklenmemesi gereken ek çiftler (ör. test kenarları).
    """
    if not 0.0 <= ratio < 1.0:
        raise ContractViolation(f"gürültü oranı [0,1) aralığında olmalı: {ratio}")
    n_add = int(np.floor(ratio * g.n_edges + 1e-9))
    if n_add == 0:
        return g

    taken = g.edge_set()
    if exclude:
        taken |= set(exclude)
    if len(taken) + n_add > g.n_users * g.n_items:
        raise NoiseInjectionError(f"{n_add} sahte kenar için yer yok (graf neredeyse tam)")

    rng = rng_stream(seed, "noise")
    users, items = [], []
    for _ in range(n_add):
        for _attempt in range(NOISE_MAX_ATTEMPTS):
            pair = (int(rng.integers(0, g.n_users)), int(rng.integers(0, g.n_items)))
            if pair not in taken:
                break
        else:
            raise NoiseInjectionError(f"{NOISE_MAX_ATTEMPTS} denemede boş çift bulunamadı")
        taken.add(pair)
        users.append(pair[0])
        items.append(pair[1])
    return g.with_edges(users, items)


def relative_drop(clean: float, noisy: float) -> float:
    """(temiz - gürültülü) / temiz; temiz 0 ise 0"""
    if clean == 0.0:
        return 0.0
    return (clean - noisy) / clean


def held_out_pairs(test: TestMap) -> Set[Tuple[int, int]]:
    return {(int(u), int(v)) for u, items in test.items() for v in items}


# ================== VARYANTLAR ==================
@dataclass(frozen=True)
class AblationVariant:
    tag: str
    config: TrainConfig


def make_variant(tag: str, base: TrainConfig) -> AblationVariant:
    """w/o-mixhop: M={1}; w/o-gib: β₁=0; w/o-cl: β₂=0"""
    if tag not in VARIANT_CONFIGS:
        raise ConfigurationError(f"geçersiz varyant: {tag}")
    config = base.replace(**VARIANT_CONFIGS[tag], variant=tag).validate()
    return AblationVariant(tag, config)


def sweep_config(base: TrainConfig, param: str, value: float) -> TrainConfig:
    """Taranan parametreyi ayarla (tam sayı parametreleri dönüştürülür)"""
    if param not in SWEEP_GRIDS:
        raise ConfigurationError(f"taranamayan parametre: {param}")
    if param in ("dim", "layers"):
        value = int(value)
    return base.replace(**{param: value}).validate()


# ================== HÜCRELER ==================
@dataclass
class CellTask:
    """Bağımsız bir eğitim + değerlendirme birimi (ayrı süreçte çalışabilir)"""
    label: str
    train_graph: InteractionGraph
    test: TestMap
    config: TrainConfig
    ks: Tuple[int, ...] = TOP_KS
    group_axis: Optional[str] = None
    group_boundaries: Tuple[int, ...] = ()
    verbose: bool = VERBOSE_TRAIN


@dataclass
class CellResult:
    label: str
    seed: int
    report: RankingReport
    mad: float
    history: List[EpochRecord]
    groups: Dict[str, RankingReport] = field(default_factory=dict)


def run_cell(task: CellTask) -> CellResult:
    """Eğit, sırala, kullanıcı gömülerinin MAD'ini ölç"""
    try:
        result = train(task.train_graph, task.config, task.verbose)
        users, items = result.model.user_item_embeddings(result.adjacency)
        report = rank_embeddings(users, items, task.train_graph, task.test, task.ks)
        groups = {}
        if task.group_axis is not None:
            groups = group_eval_embeddings(users, items, task.train_graph, task.test,
                                           task.group_axis, task.group_boundaries, task.ks)
        return CellResult(task.label, task.config.seed, report, mad(users), result.history, groups)
    except Exception as e:
        log(f"❌ Hücre hatası ({task.label}, seed={task.config.seed}): {e}")
        raise


def run_cells(tasks: Sequence[CellTask], workers: int = 1) -> List[CellResult]:
    """Hücreleri sırayla veya süreç havuzunda çalıştır (sonuç sırası sabit)"""
    if workers <= 1 or len(tasks) <= 1:
        return [run_cell(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_cell, tasks))


# ================== PROTOKOLLER ==================
@dataclass
class VariantOutcome:
    variant: str
    seed: int
    report: RankingReport
    mad: float
    history: List[EpochRecord]


@dataclass
class NoiseOutcome:
    variant: str
    ratio: float
    seed: int
    clean: float
    noisy: float

    @property
    def drop(self) -> float:
        return relative_drop(self.clean, self.noisy)


def _splits(g: InteractionGraph, seeds: Sequence[int], test_fraction: float):
    return {seed: split(g, test_fraction, seed) for seed in seeds}


def run_ablation(g: InteractionGraph, base: TrainConfig, variants: Sequence[str], seeds: Sequence[int],
                 test_fraction: float, workers: int = 1, verbose: bool = VERBOSE_TRAIN) -> List[VariantOutcome]:
    """Her varyantı aynı tohum/bölmelerle eğit"""
    splits = _splits(g, seeds, test_fraction)
    tasks = []
    for tag in variants:
        variant = make_variant(tag, base)
        for seed in seeds:
            train_graph, test = splits[seed]
            tasks.append(CellTask(tag, train_graph, test, variant.config.replace(seed=seed), verbose=verbose))
    results = run_cells(tasks, workers)
    return [VariantOutcome(r.label, r.seed, r.report, r.mad, r.history) for r in results]


def ablation_table(outcomes: Sequence[VariantOutcome]) -> pd.DataFrame:
    """Varyant başına tohum ortalaması"""
    rows = []
    for o in outcomes:
        row = {"variant": o.variant, "seed": o.seed, "mad": o.mad}
        row.update(o.report.metrics())
        rows.append(row)
    frame = pd.DataFrame(rows)
    order = list(dict.fromkeys(frame["variant"]))
    return frame.drop(columns="seed").groupby("variant", sort=False).mean().loc[order]


def run_noise(g: InteractionGraph, base: TrainConfig, ratios: Sequence[float], variants: Sequence[str],
              seeds: Sequence[int], test_fraction: float, workers: int = 1,
              verbose: bool = VERBOSE_TRAIN, k: int = 20) -> List[NoiseOutcome]:
    """Yalnızca eğitim grafına sahte kenar ekle; test kümesi temiz kalır"""
    splits = _splits(g, seeds, test_fraction)
    tasks = []
    for tag in variants:
        variant = make_variant(tag, base)
        for seed in seeds:
            train_graph, test = splits[seed]
            config = variant.config.replace(seed=seed)
            tasks.append(CellTask(f"{tag}|clean", train_graph, test, config, verbose=verbose))
            exclude = held_out_pairs(test)
            for ratio in ratios:
                noisy = inject_noise(train_graph, ratio, seed, exclude=exclude)
                tasks.append(CellTask(f"{tag}|{ratio}", noisy, test, config, verbose=verbose))

    results = iter(run_cells(tasks, workers))
    outcomes = []
    for tag in variants:
        for seed in seeds:
            clean = next(results).report.recall[k]
            for ratio in ratios:
                noisy = next(results).report.recall[k]
                outcomes.append(NoiseOutcome(tag, float(ratio), seed, clean, noisy))
    return outcomes


def run_groups(g: InteractionGraph, base: TrainConfig, axis: str, boundaries: Sequence[int],
               seeds: Sequence[int], test_fraction: float, workers: int = 1,
               verbose: bool = VERBOSE_TRAIN) -> List[CellResult]:
    splits = _splits(g, seeds, test_fraction)
    tasks = [CellTask(base.variant, splits[s][0], splits[s][1], base.replace(seed=s),
                      group_axis=axis, group_boundaries=tuple(boundaries), verbose=verbose)
             for s in seeds]
    return run_cells(tasks, workers)


def run_sweep(g: InteractionGraph, base: TrainConfig, param: str, values: Sequence[float],
              seeds: Sequence[int], test_fraction: float, workers: int = 1,
              verbose: bool = VERBOSE_TRAIN) -> List[CellResult]:
    """Her değer için aynı bölmelerle eğit; etiket 'param=değer'"""
    splits = _splits(g, seeds, test_fraction)
    tasks = []
    for value in values:
        config = sweep_config(base, param, value)
        for seed in seeds:
            train_graph, test = splits[seed]
            tasks.append(CellTask(f"{param}={value}", train_graph, test, config.replace(seed=seed), verbose=verbose))
    return run_cells(tasks, workers)

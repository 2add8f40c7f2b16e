# ================== TRAINER ==================
"""
Eğitim döngüsü - orijinal grafı kodla, iki görünüm örnekle, görünümleri kodla,
GIB + kontrastif + BPR kayıplarını birleştirip tek adımda güncelle
"""

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from config.settings import LOG_EVERY, VERBOSE_TRAIN, TrainConfig
from engine.optim import Optimizer, create_optimizer
from engine.tensor import ComputationRecord, Parameter, backward
from graph.adjacency import NormalizedAdjacency, normalize_adjacency
from graph.interactions import InteractionGraph
from models.augmentor import CandidateEdges, EdgeAugmentor, candidate_edges
from models.base import uniform_init
from models.gib import GibConfig, gib_objective
from models.mixhop import EncodedViews, MixhopEncoder
from training.objectives import bpr, contrastive_loss, joint_loss, score_triplets
from training.sampling import TripletBatch, sample_triplets
from utils.errors import ContractViolation, NumericError, TrainingAborted
from utils.helpers import fmt, log, rng_stream

EPOCH_COLUMNS = ["epoch", "l_bpr", "l_kl", "l_cl", "l_total", "lr"]


# ================== MODEL PARAMETRELERİ ==================
class ModelParams:
    """Θ: H⁰ gömü tablosu + encoder + artırıcı + optimizer durumu"""

    def __init__(self, config: TrainConfig, n_users: int, n_items: int):
        config.validate()
        self.config = config
        self.n_users = n_users
        self.n_items = n_items

        rng = rng_stream(config.seed, "init", 0)
        n_nodes = n_users + n_items
        self.embeddings = Parameter(uniform_init(rng, (n_nodes, config.dim), config.dim), "embeddings")
        self.encoder = MixhopEncoder(config.dim, config.layers, config.hops, config.slope,
                                     config.readout, seed=config.seed)
        self.augmentor = EdgeAugmentor(config.dim, config.mask_keep, config.tau1, config.xi,
                                       config.slope, seed=config.seed)
        self.optimizer: Optimizer = create_optimizer(config.optimizer, self.parameters(),
                                                     config.lr, config.lr_decay)

    def parameters(self) -> List[Parameter]:
        return [self.embeddings] + self.encoder.parameters() + self.augmentor.parameters()

    def embed(self, adj: NormalizedAdjacency) -> EncodedViews:
        """Kayıt dışında Ĥ (değerlendirme için)"""
        return self.encoder.encode(adj, self.embeddings.value)

    def user_item_embeddings(self, adj: NormalizedAdjacency):
        values = self.embed(adj).values
        return values[:self.n_users], values[self.n_users:]

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {p.name: p.value.copy() for p in self.parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        self.embeddings.value = np.asarray(state["embeddings"], dtype=np.float64).copy()
        if self.embeddings.shape != (self.n_users + self.n_items, self.config.dim):
            raise ContractViolation(f"gömü şekli uyumsuz: {self.embeddings.shape}")
        self.encoder.load_state_dict(state)
        self.augmentor.load_state_dict(state)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p.value)) for p in self.parameters())


@dataclass
class EpochRecord:
    epoch: int
    l_bpr: float
    l_kl: float
    l_cl: float
    l_total: float
    lr: float


@dataclass
class TrainResult:
    model: ModelParams
    history: List[EpochRecord]
    seconds: float
    adjacency: Optional[NormalizedAdjacency] = field(default=None, repr=False)

    def history_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(r) for r in self.history], columns=EPOCH_COLUMNS)


@dataclass
class StepLosses:
    l_bpr: float
    l_kl: float
    l_cl: float
    l_total: float


# ================== TRAINER ==================
class Trainer:
    """Epoch/adım döngüsü

    Her adımın rastgeleliği (seed, akış, epoch, adım) ile belirlenir; aynı
    ayar ve tohum bit düzeyinde aynı yörüngeyi üretir.
    """

    def __init__(self, train: InteractionGraph, config: TrainConfig, verbose: bool = VERBOSE_TRAIN,
                 model: Optional[ModelParams] = None):
        if train.n_edges == 0:
            raise ContractViolation("eğitim kümesi boş")
        self.train = train
        self.config = config.validate()
        self.gib = GibConfig.from_train_config(self.config)
        self.verbose = verbose
        self.model = model or ModelParams(config, train.n_users, train.n_items)
        self.adjacency = normalize_adjacency(train)
        self.candidates: CandidateEdges = candidate_edges(
            train, config.candidate_policy, config.candidate_budget,
            rng_stream(config.seed, "candidates"))
        self.steps_per_epoch = max(1, math.ceil(train.n_edges / config.batch_size))
        self.history: List[EpochRecord] = []

    @property
    def uses_views(self) -> bool:
        return self.config.beta1 > 0 or self.config.beta2 > 0

    def _contrast_nodes(self, batch: TripletBatch):
        if self.config.negatives == "all":
            return np.arange(self.train.n_users), self.train.n_users + np.arange(self.train.n_items)
        return batch.user_nodes(), batch.item_nodes(self.train.n_users)

    def _train_step(self, epoch: int, step: int) -> StepLosses:
        """Tek optimizasyon adımı"""
        cfg, model = self.config, self.model
        n_users = self.train.n_users
        batch = sample_triplets(self.train, cfg.batch_size, rng_stream(cfg.seed, "triplets", epoch, step))

        with ComputationRecord() as record:
            h0 = model.embeddings.leaf()
            hbar = model.encoder.encode(self.adjacency, h0)
            pos, neg = score_triplets(hbar, batch, n_users)
            l_bpr = bpr(pos, neg, cfg.loss_reduction)
            l_kl = l_gib = l_cl = None

            if self.uses_views:
                views = []
                for k in (1, 2):
                    probs = model.augmentor.edge_probability(
                        hbar, self.candidates, rng_stream(cfg.seed, "masks", epoch, step, k))
                    view = model.augmentor.sample_view(
                        probs, self.candidates, rng_stream(cfg.seed, "gumbel", epoch, step, k))
                    views.append(model.encoder.encode(view, h0))
                z1, z2 = views

                if cfg.beta1 > 0:
                    l_gib, l_kl = gib_objective(hbar, z1, z2, batch, self.gib, n_users)
                if cfg.beta2 > 0:
                    user_nodes, item_nodes = self._contrast_nodes(batch)
                    l_cl = contrastive_loss(z1, z2, user_nodes, item_nodes, cfg.tau, cfg.loss_reduction)

            total = joint_loss(l_bpr, l_gib, l_cl, model.parameters(), cfg.beta1, cfg.beta2, cfg.beta3)

        value = total.item()
        if not np.isfinite(value):
            raise TrainingAborted(epoch, step, f"sonlu olmayan kayıp: {value}")
        try:
            grads = backward(record, total)
            model.optimizer.step(grads)
        except NumericError as e:
            raise TrainingAborted(epoch, step, str(e), cause=e) from e

        return StepLosses(
            l_bpr=l_bpr.item(),
            l_kl=l_kl.item() if l_kl is not None else 0.0,
            l_cl=l_cl.item() if l_cl is not None else 0.0,
            l_total=value,
        )

    def run_epoch(self, epoch: int) -> EpochRecord:
        lr = self.model.optimizer.lr
        losses = [self._train_step(epoch, step) for step in range(self.steps_per_epoch)]
        record = EpochRecord(
            epoch=epoch,
            l_bpr=float(np.mean([l.l_bpr for l in losses])),
            l_kl=float(np.mean([l.l_kl for l in losses])),
            l_cl=float(np.mean([l.l_cl for l in losses])),
            l_total=float(np.mean([l.l_total for l in losses])),
            lr=lr,
        )
        self.model.optimizer.decay()
        return record

    def run(self) -> TrainResult:
        """Tüm epoch'ları çalıştır"""
        started = time.perf_counter()
        cfg = self.config
        if self.verbose:
            log(f"🚀 Eğitim başladı: variant={cfg.variant} d={cfg.dim} L={cfg.layers} M={list(cfg.hops)} "
                f"E={self.train.n_edges} adım/epoch={self.steps_per_epoch}")

        for epoch in range(cfg.epochs):
            record = self.run_epoch(epoch)
            self.history.append(record)
            if self.verbose and (epoch % LOG_EVERY == 0 or epoch == cfg.epochs - 1):
                log(f"📈 epoch {epoch:3d} | bpr={fmt(record.l_bpr)} kl={fmt(record.l_kl)} "
                    f"cl={fmt(record.l_cl)} toplam={fmt(record.l_total)} lr={record.lr:.6g}")

        seconds = time.perf_counter() - started
        if self.verbose:
            log(f"✅ Eğitim bitti ({seconds:.1f} sn)")
        return TrainResult(self.model, self.history, seconds, self.adjacency)


def train(graph: InteractionGraph, config: TrainConfig, verbose: bool = VERBOSE_TRAIN) -> TrainResult:
    """Eğitim grafı üzerinde modeli eğit"""
    return Trainer(graph, config, verbose).run()

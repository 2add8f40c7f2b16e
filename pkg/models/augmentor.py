# ================== GRAPH AUGMENTOR ==================
"""
Öğrenilebilir, gürültüye dayanıklı graf artırıcı

1) Aday kenarlar: gözlenen kenarlar (+ isteğe bağlı 2-hop çiftleri)
2) Kenar olasılığı: maskeli/gürültülü gömüler üzerinde MLP -> sigmoid
3) Görünüm örnekleme: lojistik gürültü ile soft-Bernoulli, ξ eşiği
4) Görünüm yayılımı: tutulan kenarların soft ağırlıklarıyla normalize komşuluk
"""

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.special import expit, logit as _logit

from config.settings import (CANDIDATE_BUDGET, CANDIDATE_POLICY, EDGE_THRESHOLD, GUMBEL_TAU,
                             LEAKY_SLOPE, MASK_KEEP_PROB, NOISE_MAX_ATTEMPTS, UNIFORM_EPS)
from engine.tensor import (ArrayLike, Parameter, Tensor, add, as_tensor, concat, constant, exp,
                           gather, leaky_relu, log, matmul, mul, sigmoid, spmm, sub)
from graph.interactions import InteractionGraph
from models.base import BaseModule, uniform_init
from utils.errors import ConfigurationError, ContractViolation
from utils.helpers import log as log_msg, rng_stream

SeedLike = Union[int, np.random.Generator]


def _rng(seed: SeedLike, name: str) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_stream(seed, name)


# ================== ADAY KENARLAR ==================
@dataclass(frozen=True)
class CandidateEdges:
    """Artırıcının üretebileceği kenarlar; ilk n_observed tanesi gözlenen kenarlar"""
    users: np.ndarray
    items: np.ndarray
    n_users: int
    n_items: int
    n_observed: int

    @property
    def size(self) -> int:
        return int(self.users.size)

    @property
    def n_nodes(self) -> int:
        return self.n_users + self.n_items

    @property
    def extras(self) -> np.ndarray:
        """Sonradan eklenen (gözlenmeyen) adaylar, (k, 2)"""
        return np.stack([self.users[self.n_observed:], self.items[self.n_observed:]], axis=1)


def sample_two_hop_pairs(g: InteractionGraph, count: int, seed: SeedLike = 0,
                         max_rounds: int = NOISE_MAX_ATTEMPTS) -> np.ndarray:
    """u -> v' -> u' -> v yürüyüşüyle gözlenmeyen çiftler örnekle, (k, 2)

    Yürüyüş rastgele bir kenardan başlar; gözlenen veya tekrar eden çiftler
    reddedilir; I x J erişim matrisi oluşturulmaz.
    """
    if count <= 0:
        return np.empty((0, 2), dtype=np.int64)
    if g.n_edges == 0:
        raise ContractViolation("boş grafta 2-hop çifti yok")
    rng = _rng(seed, "candidates")
    by_item = g.csr.tocsc()
    by_item.sort_indices()
    item_degree = np.diff(by_item.indptr)
    user_degree = np.diff(g.csr.indptr)
    observed = np.sort(g.users * g.n_items + g.items)

    chosen = np.empty(0, dtype=np.int64)
    for _ in range(max_rounds):
        need = count - chosen.size
        if need <= 0:
            break
        start = rng.integers(0, g.n_edges, size=2 * need)
        via_item = g.items[start]
        other = by_item.indices[by_item.indptr[via_item] +
                                (rng.random(start.size) * item_degree[via_item]).astype(np.int64)]
        item = g.csr.indices[g.csr.indptr[other] +
                             (rng.random(start.size) * user_degree[other]).astype(np.int64)]
        codes = g.users[start] * g.n_items + item

        at = np.minimum(np.searchsorted(observed, codes), observed.size - 1)
        fresh = codes[(observed[at] != codes) & ~np.isin(codes, chosen)]
        _, first = np.unique(fresh, return_index=True)
        chosen = np.concatenate([chosen, fresh[np.sort(first)][:need]])

    if chosen.size < count:
        log_msg(f"⚠️ 2-hop örneklemesi {chosen.size} çift buldu, istenen {count}")
    return np.stack([chosen // g.n_items, chosen % g.n_items], axis=1)


def candidate_edges(g: InteractionGraph, policy: str = CANDIDATE_POLICY,
                    budget: float = CANDIDATE_BUDGET, seed: SeedLike = 0) -> CandidateEdges:
    """Aday kenar listesi

    "observed": tam olarak gözlenen kenarlar.
    "two_hop": gözlenenler + en fazla ⌊budget·E⌋ adet yürüyüşle örneklenmiş 2-hop çifti.
    """
    if g.n_edges == 0:
        raise ContractViolation("boş grafta aday kenar yok")
    if not 0.0 <= budget <= 1.0:
        raise ConfigurationError(f"aday bütçesi [0,1] aralığında olmalı: {budget}")

    users, items = g.users.copy(), g.items.copy()
    if policy == "observed":
        return CandidateEdges(users, items, g.n_users, g.n_items, g.n_edges)
    if policy != "two_hop":
        raise ConfigurationError(f"bilinmeyen aday politikası: {policy}")

    wanted = int(np.floor(budget * g.n_edges + 1e-9))
    extras = sample_two_hop_pairs(g, wanted, seed)
    users = np.concatenate([users, extras[:, 0]])
    items = np.concatenate([items, extras[:, 1]])
    return CandidateEdges(users, items, g.n_users, g.n_items, g.n_edges)


# ================== ARTIRILMIŞ GÖRÜNÜM ==================
@dataclass
class AugmentedView:
    """Örneklenmiş görünüm G′ / G″

    soft: tüm adaylar için ā′ (E x 1, kayıtta); kept: ā′ > ξ maskesi.
    Yayılım tutulan kenarların ā′ ağırlıkları + self-loop ile simetrik
    normalize edilir; dereceler de kayıt üzerinden hesaplanır.
    """
    candidates: CandidateEdges
    soft: Tensor
    kept: np.ndarray
    xi: float
    noise: np.ndarray
    structure: sp.csr_matrix = field(repr=False)
    edge_of_slot: np.ndarray = field(repr=False)
    _inv_sqrt_degree: Optional[Tensor] = field(default=None, repr=False)
    _values: Optional[Tensor] = field(default=None, repr=False)

    @classmethod
    def build(cls, candidates: CandidateEdges, soft: Tensor, xi: float, noise: np.ndarray) -> "AugmentedView":
        kept = soft.data.reshape(-1) > xi
        kept_ids = np.flatnonzero(kept)
        n = candidates.n_nodes
        rows = np.concatenate([candidates.users[kept_ids], candidates.n_users + candidates.items[kept_ids]])
        cols = np.concatenate([candidates.n_users + candidates.items[kept_ids], candidates.users[kept_ids]])
        # CSR yuvası -> aday kenar indeksi eşlemesi
        tags = np.concatenate([kept_ids, kept_ids]).astype(np.float64) + 1.0
        tagged = sp.csr_matrix((tags, (rows, cols)), shape=(n, n))
        tagged.sort_indices()
        edge_of_slot = tagged.data.astype(np.int64) - 1
        structure = sp.csr_matrix((np.ones(tagged.nnz), tagged.indices, tagged.indptr), shape=(n, n))
        return cls(candidates, soft, kept, xi, noise, structure, edge_of_slot)

    @property
    def n_users(self) -> int:
        return self.candidates.n_users

    @property
    def n_nodes(self) -> int:
        return self.candidates.n_nodes

    @property
    def n_kept(self) -> int:
        return int(self.kept.sum())

    @property
    def thresholded(self) -> np.ndarray:
        """a′: ā′ > ξ ise ā′, değilse 0"""
        return np.where(self.kept, self.soft.data.reshape(-1), 0.0)

    def kept_edges(self) -> np.ndarray:
        ids = np.flatnonzero(self.kept)
        return np.stack([self.candidates.users[ids], self.candidates.items[ids]], axis=1)

    def _slot_values(self) -> Tensor:
        if self._values is None:
            self._values = gather(self.soft, self.edge_of_slot)
        return self._values

    def _normalizer(self) -> Tensor:
        """D^{-1/2}, D = 1 + Σ ā′ (kayıt üzerinde)"""
        if self._inv_sqrt_degree is None:
            ones = np.ones((self.n_nodes, 1))
            degree = add(spmm(self.structure, ones, self._slot_values()), 1.0)
            self._inv_sqrt_degree = exp(mul(log(degree), -0.5))
        return self._inv_sqrt_degree

    def propagate(self, h: ArrayLike) -> Tensor:
        """Â′·H = D^{-1/2}(A′ + I)D^{-1/2} H"""
        h = as_tensor(h)
        if self.structure.nnz == 0:
            return h
        inv = self._normalizer()
        neighbours = mul(inv, spmm(self.structure, mul(inv, h), self._slot_values()))
        return add(neighbours, mul(mul(inv, inv), h))

    def dense(self) -> np.ndarray:
        """Normalize görünüm komşuluğu (testler için)"""
        slot_values = self.soft.data.reshape(-1)[self.edge_of_slot]
        weighted = sp.csr_matrix((slot_values, self.structure.indices,
                                  self.structure.indptr), shape=self.structure.shape)
        a = weighted.toarray() + np.eye(self.n_nodes)
        inv = 1.0 / np.sqrt(a.sum(axis=1))
        return a * inv[:, None] * inv[None, :]


def keep_probability(p: Union[float, np.ndarray], tau1: float, xi: float) -> Union[float, np.ndarray]:
    """P(ā′ > ξ) = 1 - σ(τ₁·logit(ξ) - logit(p)), ε′ ~ U(0,1)"""
    if xi <= 0.0:
        return np.ones_like(np.asarray(p, dtype=np.float64)) if np.ndim(p) else 1.0
    return 1.0 - expit(tau1 * _logit(xi) - _logit(p))


@dataclass
class EdgeProbabilities:
    """Aday başına MLP logit'i ve olasılık (E x 1 tensörler)"""
    logits: Tensor
    probs: Tensor

    @property
    def values(self) -> np.ndarray:
        return self.probs.data.reshape(-1)


# ================== ARTIRICI ==================
class EdgeAugmentor(BaseModule):
    """Aug(G): kenar olasılığı MLP'si + yeniden parametrelenmiş örnekleme

    MLP iki görünüm arasında paylaşılır; maske/gürültü çekimleri bağımsızdır.
    """

    def __init__(self, dim: int, mask_keep: float = MASK_KEEP_PROB, tau1: float = GUMBEL_TAU,
                 xi: float = EDGE_THRESHOLD, slope: float = LEAKY_SLOPE, seed: int = 0):
        super().__init__("augmentor")
        if not 0.0 <= mask_keep <= 1.0:
            raise ConfigurationError(f"mask_keep [0,1] aralığında olmalı: {mask_keep}")
        if tau1 <= 0:
            raise ConfigurationError(f"tau1 > 0 olmalı: {tau1}")
        if not 0.0 <= xi < 1.0:
            raise ConfigurationError(f"xi [0,1) aralığında olmalı: {xi}")

        self.dim = dim
        self.mask_keep = mask_keep
        self.tau1 = tau1
        self.xi = xi
        self.slope = slope

        rng = rng_stream(seed, "init", 2)
        self.w_hidden = Parameter(uniform_init(rng, (2 * dim, dim), 2 * dim), "aug.w_hidden")
        self.b_hidden = Parameter(np.zeros((1, dim)), "aug.b_hidden")
        self.w_out = Parameter(uniform_init(rng, (dim, 1), dim), "aug.w_out")
        self.b_out = Parameter(np.zeros((1, 1)), "aug.b_out")

    def parameters(self):
        return [self.w_hidden, self.b_hidden, self.w_out, self.b_out]

    def mlp(self, pairs: Tensor) -> Tensor:
        """2d -> d (LeakyReLU) -> 1 logit"""
        hidden = leaky_relu(add(matmul(pairs, self.w_hidden.leaf()), self.b_hidden.leaf()), self.slope)
        return add(matmul(hidden, self.w_out.leaf()), self.b_out.leaf())

    def perturb(self, hbar: Tensor, seed: SeedLike) -> Tensor:
        """h̃ = (h̄ - ε)·m + ε; m ~ Bernoulli(ρ) boyut bazında, ε ~ N(0,1)"""
        rng = _rng(seed, "masks")
        shape = hbar.shape
        mask = (rng.random(shape) < self.mask_keep).astype(np.float64)
        noise = rng.standard_normal(shape)
        return add(mul(hbar, mask), constant(noise * (1.0 - mask)))

    def edge_probability(self, hbar, candidates: CandidateEdges, seed: SeedLike) -> EdgeProbabilities:
        """Aday başına p = σ(MLP(h̃_u ∥ h̃_v))"""
        h = getattr(hbar, "final", hbar)
        h = as_tensor(h)
        if h.shape[0] != candidates.n_nodes or h.shape[1] != self.dim:
            raise ContractViolation(f"gömü şekli {h.shape}, beklenen ({candidates.n_nodes}, {self.dim})")
        perturbed = self.perturb(h, seed)
        pairs = concat([gather(perturbed, candidates.users),
                        gather(perturbed, candidates.n_users + candidates.items)], axis=1)
        logits = self.mlp(pairs)
        return EdgeProbabilities(logits, sigmoid(logits))

    def sample_view(self, probabilities: Union[EdgeProbabilities, Tensor, np.ndarray],
                    candidates: CandidateEdges, seed: SeedLike,
                    noise: Optional[np.ndarray] = None) -> AugmentedView:
        """ā′ = σ((logit(p) + logit(ε′)) / τ₁), ε′ ~ U(0,1); ā′ > ξ ise tut

        noise verilirse ε′ olarak kullanılır (dondurulmuş çekim).
        """
        if isinstance(probabilities, EdgeProbabilities):
            logits = probabilities.logits
        else:
            p = as_tensor(probabilities)
            if np.any(p.data <= 0.0) or np.any(p.data >= 1.0):
                raise ContractViolation("olasılıklar (0,1) aralığında olmalı")
            logits = sub(log(p), log(sub(1.0, p)))

        count = logits.data.size
        if count != candidates.size:
            raise ContractViolation(f"{count} olasılık, {candidates.size} aday")
        if noise is None:
            noise = _rng(seed, "gumbel").random(logits.shape)
        noise = np.clip(np.asarray(noise, dtype=np.float64).reshape(logits.shape), UNIFORM_EPS, 1.0 - UNIFORM_EPS)
        logistic = np.log(noise) - np.log1p(-noise)
        soft = sigmoid(mul(add(logits, logistic), 1.0 / self.tau1))
        return AugmentedView.build(candidates, soft, self.xi, noise)

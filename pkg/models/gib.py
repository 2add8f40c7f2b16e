# ================== GIB REGULARIZER ==================
"""
Graf bilgi darboğazı düzenleyicisi

L_GIB = -log q(Y|Z′)  +  β · KL( N(μ, η²) ∥ N(0, I) )
μ, η: {Z, Z′, Z″} kullanıcı satırlarının ortalama havuzlamasından.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config.settings import GIB_BETA, KL_REDUCTION, LIKELIHOOD_VIEWS, POSTERIOR_FLOOR, TrainConfig
from engine.tensor import Tensor, add, as_tensor, gather, log, matmul, mean, mul, softplus, sub
from engine.tensor import sum as tsum
from training.objectives import REDUCTIONS, score_triplets
from training.sampling import TripletBatch
from utils.errors import ConfigurationError, ContractViolation


@dataclass(frozen=True)
class GibConfig:
    """β ve havuzlama ayarları (önsel standart normal)

    reduction: KL kullanıcılar üzerinde "mean" (kullanıcı başına) veya "sum".
    """
    beta: float = GIB_BETA
    prior: str = "standard_normal"
    pooling: str = "mean"
    views: str = LIKELIHOOD_VIEWS
    reduction: str = KL_REDUCTION

    def __post_init__(self):
        if self.beta < 0:
            raise ConfigurationError(f"GIB β negatif olamaz: {self.beta}")
        if self.prior != "standard_normal" or self.pooling != "mean":
            raise ConfigurationError("yalnızca standart normal önsel ve ortalama havuzlama destekleniyor")
        if self.views not in ("both", "first"):
            raise ConfigurationError(f"bilinmeyen görünüm modu: {self.views}")
        if self.reduction not in REDUCTIONS:
            raise ConfigurationError(f"bilinmeyen KL indirgemesi: {self.reduction}")

    @classmethod
    def from_train_config(cls, config: TrainConfig) -> "GibConfig":
        return cls(beta=config.gib_beta, views=config.likelihood_views, reduction=config.kl_reduction)


@dataclass
class GaussianPosterior:
    """Kullanıcı başına μ ve η (I x d/2)"""
    mu: Tensor
    eta: Tensor


def _selector(dim: int, start: int, width: int) -> np.ndarray:
    sel = np.zeros((dim, width))
    sel[start + np.arange(width), np.arange(width)] = 1.0
    return sel


def pool_posterior(z, z1, z2) -> GaussianPosterior:
    """Üç görünümün kullanıcı satırlarını ortala, sütunları μ | η olarak böl"""
    views = [as_tensor(getattr(v, "final", v)) for v in (z, z1, z2)]
    shape = views[0].shape
    if any(v.shape != shape for v in views):
        raise ContractViolation(f"görünüm şekilleri farklı: {[v.shape for v in views]}")
    dim = shape[1]
    if dim % 2:
        raise ConfigurationError(f"GIB havuzlaması çift d gerektirir: d={dim}")

    n_users = getattr(z, "n_users", None)
    n_users = shape[0] if n_users is None else n_users
    rows = np.arange(n_users)
    pooled = mul(add(add(gather(views[0], rows), gather(views[1], rows)), gather(views[2], rows)), 1.0 / 3.0)

    half = dim // 2
    mu = matmul(pooled, _selector(dim, 0, half))
    eta = add(softplus(matmul(pooled, _selector(dim, half, half))), POSTERIOR_FLOOR)
    return GaussianPosterior(mu, eta)


def kl_term(post: GaussianPosterior, reduction: str = "mean") -> Tensor:
    """mean_u ½ Σ (μ² + η² - 1 - 2 log η)

    reduction="sum" kullanıcı toplamını verir.
    """
    if np.any(post.eta.data <= 0.0):
        raise ContractViolation("η pozitif olmalı")
    mu, eta = post.mu, post.eta
    inner = sub(add(mul(mu, mu), mul(eta, eta)), add(mul(log(eta), 2.0), 1.0))
    per_user = tsum(inner, axis=1)
    if reduction == "sum":
        return mul(tsum(per_user), 0.5)
    if reduction != "mean":
        raise ConfigurationError(f"bilinmeyen KL indirgemesi: {reduction}")
    return mul(mean(per_user), 0.5)


def likelihood_term(z1, batch: TripletBatch, z2=None, n_users: int = None) -> Tensor:
    """-log q(Y|Z′): görünüm gömüleri üzerinde ortalama BPR olabilirliği

    z2 verilirse iki görünümün ortalaması alınır.
    """
    if len(batch) == 0:
        raise ContractViolation("olabilirlik terimi boş batch")
    if n_users is None:
        n_users = getattr(z1, "n_users")
    terms = []
    for view in (z1, z2):
        if view is None:
            continue
        pos, neg = score_triplets(view, batch, n_users)
        terms.append(mean(softplus(sub(neg, pos))))
    total = terms[0] if len(terms) == 1 else mul(add(terms[0], terms[1]), 0.5)
    return total


def gib_loss(likelihood: Tensor, kl: Tensor, beta: float = GIB_BETA) -> Tensor:
    """L_GIB = likelihood + β·KL"""
    return add(likelihood, mul(kl, beta))


def gib_objective(hbar, z1, z2, batch: TripletBatch, config: Optional[GibConfig] = None,
                  n_users: int = None) -> Tuple[Tensor, Tensor]:
    """Orijinal kodlama + iki görünümden (L_GIB, L_KL)"""
    config = config or GibConfig()
    kl = kl_term(pool_posterior(hbar, z1, z2), config.reduction)
    second = z2 if config.views == "both" else None
    likelihood = likelihood_term(z1, batch, second, n_users)
    return gib_loss(likelihood, kl, config.beta), kl

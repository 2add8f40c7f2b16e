# ================== TRAINING OBJECTIVES ==================
"""
InfoNCE (kontrastif), BPR (sıralama) ve birleşik kayıp
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from engine.tensor import (Parameter, Tensor, add, as_tensor, constant, frobenius, gather, logsumexp,
                           matmul, mul, normalize_rows, row_dot, softplus, sub)
from engine.tensor import sum as tsum
from training.sampling import TripletBatch
from utils.errors import ConfigurationError, ContractViolation, NumericError

REDUCTIONS = ("sum", "mean")


def _view(x) -> Tensor:
    return as_tensor(getattr(x, "final", x))


def _reduce(total: Tensor, count: int, reduction: str) -> Tensor:
    """Toplamı olduğu gibi bırak veya eleman sayısına böl"""
    if reduction not in REDUCTIONS:
        raise ConfigurationError(f"bilinmeyen indirgeme: {reduction}")
    return total if reduction == "sum" else mul(total, 1.0 / count)


def infonce(h1, h2, nodes: Sequence[int], tau: float, reduction: str = "sum") -> Tensor:
    """Σ_u -log[ exp(cos(h′_u,h″_u)/τ) / Σ_{u′} exp(cos(h′_u,h″_{u′})/τ) ]

    Payda `nodes` kümesi üzerindedir (batch içi veya tüm küme).
    reduction="mean" düğüm başına ortalamayı verir.
    """
    if tau <= 0:
        raise ContractViolation(f"tau > 0 olmalı: {tau}")
    if reduction not in REDUCTIONS:
        raise ConfigurationError(f"bilinmeyen indirgeme: {reduction}")
    a, b = _view(h1), _view(h2)
    if a.shape != b.shape:
        raise ContractViolation(f"görünüm şekilleri farklı: {a.shape} vs {b.shape}")
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.size == 0:
        return constant(0.0)

    za, zb = gather(a, nodes), gather(b, nodes)
    for name, z in (("h1", za), ("h2", zb)):
        norms = np.linalg.norm(z.data, axis=1)
        if np.any(norms == 0.0):
            raise NumericError(f"{name} içinde sıfır normlu satır: düğüm {int(nodes[np.argmax(norms == 0.0)])}")

    za, zb = normalize_rows(za), normalize_rows(zb)
    logits = mul(matmul(za, zb, transpose_b=True), 1.0 / tau)
    positive = mul(row_dot(za, zb), 1.0 / tau)
    return _reduce(sub(tsum(logsumexp(logits, axis=1)), tsum(positive)), nodes.size, reduction)


def contrastive_loss(h1, h2, user_nodes: Sequence[int], item_nodes: Sequence[int], tau: float,
                     reduction: str = "sum") -> Tensor:
    """L_CL = L_CL^(u) + L_CL^(v)"""
    return add(infonce(h1, h2, user_nodes, tau, reduction), infonce(h1, h2, item_nodes, tau, reduction))


def score_triplets(h, batch: TripletBatch, n_users: int) -> Tuple[Tensor, Tensor]:
    """(ŷ_{u,v⁺}, ŷ_{u,v⁻}) iç çarpımları"""
    h = _view(h)
    users = gather(h, batch.users)
    pos = row_dot(users, gather(h, n_users + batch.pos))
    neg = row_dot(users, gather(h, n_users + batch.neg))
    return pos, neg


def bpr(pos, neg, reduction: str = "sum") -> Tensor:
    """Σ -log σ(ŷ⁺ - ŷ⁻) = Σ softplus(ŷ⁻ - ŷ⁺)

    reduction="mean" üçlü başına ortalama.
    """
    pos, neg = as_tensor(pos), as_tensor(neg)
    if pos.data.size == 0:
        raise ContractViolation("BPR boş batch")
    return _reduce(tsum(softplus(sub(neg, pos))), pos.data.size, reduction)


def joint_loss(l_bpr, l_gib: Optional[Tensor], l_cl: Optional[Tensor], params: Sequence[Parameter],
               beta1: float, beta2: float, beta3: float) -> Tensor:
    """L = L_BPR + β₁·L_GIB + β₂·L_CL + β₃·‖Θ‖²_F

    Atlanan dal (None) sıfır kabul edilir.
    """
    total = as_tensor(l_bpr)
    if l_gib is not None and beta1 != 0.0:
        total = add(total, mul(l_gib, beta1))
    if l_cl is not None and beta2 != 0.0:
        total = add(total, mul(l_cl, beta2))
    if beta3 != 0.0 and params:
        total = add(total, mul(frobenius(params), beta3))
    return total

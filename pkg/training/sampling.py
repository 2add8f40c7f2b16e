# ================== TRIPLET SAMPLING ==================
"""
BPR üçlü örnekleme: (u, v⁺, v⁻)
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from graph.interactions import InteractionGraph
from utils.errors import ContractViolation
from utils.helpers import rng_stream


@dataclass(frozen=True)
class TripletBatch:
    users: np.ndarray
    pos: np.ndarray
    neg: np.ndarray

    def __len__(self) -> int:
        return int(self.users.size)

    def item_nodes(self, n_users: int) -> np.ndarray:
        """Batch'teki ürünlerin graf düğüm indeksleri (tekil)"""
        return n_users + np.unique(np.concatenate([self.pos, self.neg]))

    def user_nodes(self) -> np.ndarray:
        return np.unique(self.users)


def eligible_users(train: InteractionGraph) -> np.ndarray:
    """En az bir etkileşimi olan ve tüm ürünlerle etkileşmemiş kullanıcılar"""
    degrees = train.user_degrees()
    return np.flatnonzero((degrees > 0) & (degrees < train.n_items))


def sample_triplets(train: InteractionGraph, batch_size: int,
                    seed: Union[int, np.random.Generator]) -> TripletBatch:
    """v⁺ kullanıcının ürünlerinden uniform, v⁻ etkileşilmemişlerden (reddetmeli)

    Tüm ürünlerle etkileşmiş kullanıcılar havuzdan çıkarılır (yeniden çekilir).
    """
    rng = seed if isinstance(seed, np.random.Generator) else rng_stream(seed, "triplets")
    pool = eligible_users(train)
    if pool.size == 0:
        raise ContractViolation("örneklenebilir kullanıcı yok")
    if batch_size < 1:
        raise ContractViolation(f"batch_size >= 1 olmalı: {batch_size}")

    indptr, indices = train.csr.indptr, train.csr.indices
    users = pool[rng.integers(0, pool.size, size=batch_size)]
    pos = np.empty(batch_size, dtype=np.int64)
    neg = np.empty(batch_size, dtype=np.int64)
    for i, user in enumerate(users):
        row = indices[indptr[user]:indptr[user + 1]]
        pos[i] = row[rng.integers(0, row.size)]
        while True:
            candidate = rng.integers(0, train.n_items)
            at = np.searchsorted(row, candidate)
            if at >= row.size or row[at] != candidate:
                neg[i] = candidate
                break
    return TripletBatch(users.astype(np.int64), pos, neg)

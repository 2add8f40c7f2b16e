# ================== NORMALIZED ADJACENCY ==================
"""
Self-loop'lu simetrik normalize komşuluk: D^{-1/2}(A+I)D^{-1/2}
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from engine.tensor import ArrayLike, Tensor, spmm
from graph.interactions import InteractionGraph
from utils.errors import ContractViolation


@dataclass(frozen=True)
class NormalizedAdjacency:
    """(I+J) x (I+J) simetrik CSR + normalizasyon bilgisi

    Kullanıcılar 0..I-1, ürünler I..I+J-1 satırlarındadır.
    """
    matrix: sp.csr_matrix
    degrees: np.ndarray
    self_loops: bool
    n_users: int
    n_items: int

    @property
    def n_nodes(self) -> int:
        return self.n_users + self.n_items

    def propagate(self, h: ArrayLike) -> Tensor:
        """Ã·H (tek hop)"""
        return spmm(self.matrix, h)

    def dense(self) -> np.ndarray:
        """Sadece testler ve küçük graflar için"""
        return self.matrix.toarray()


def bipartite_block(g: InteractionGraph) -> sp.csr_matrix:
    """[[0, R], [Rᵀ, 0]] blok matrisi"""
    r = g.csr
    return sp.bmat([[None, r], [r.T, None]], format="csr", dtype=np.float64)


def normalize_adjacency(g: InteractionGraph, self_loops: bool = True) -> NormalizedAdjacency:
    """Normalize komşuluk oluştur

    İzole düğümler self-loop ile derece 1 alır; kenarsız graf birim matristir.
    """
    if g.n_nodes == 0:
        raise ContractViolation("boş graf normalize edilemez")

    n = g.n_nodes
    block = bipartite_block(g)
    if self_loops:
        block = block + sp.identity(n, format="csr", dtype=np.float64)
    block = sp.csr_matrix(block)
    block.sum_duplicates()
    block.sort_indices()

    degrees = np.asarray(block.sum(axis=1)).reshape(-1)
    with np.errstate(divide="ignore"):
        dinv = np.where(degrees > 0, 1.0 / np.sqrt(degrees), 0.0)

    coo = block.tocoo()
    # dinv[i]*dinv[j] çarpımı değişmeli, sonuç tam simetrik
    values = coo.data * (dinv[coo.row] * dinv[coo.col])
    matrix = sp.csr_matrix((values, (coo.row, coo.col)), shape=(n, n))
    matrix.sort_indices()
    return NormalizedAdjacency(matrix, degrees, self_loops, g.n_users, g.n_items)

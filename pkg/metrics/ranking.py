# ================== RANKING METRICS ==================
"""
Top-K sıralama metrikleri - Recall@K ve NDCG@K (ikili kazanç, log2 indirim)
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from config.settings import EVAL_CHUNK, TOP_KS
from graph.interactions import InteractionGraph, TestMap
from utils.errors import ContractViolation
from utils.helpers import chunked


@dataclass
class RankingReport:
    """Değerlendirilen kullanıcılar üzerinden ortalama metrikler"""
    recall: Dict[int, float]
    ndcg: Dict[int, float]
    n_users: int
    n_skipped: int = 0
    per_user: Optional[pd.DataFrame] = field(default=None, repr=False)

    @property
    def ks(self) -> List[int]:
        return sorted(self.recall)

    def metrics(self) -> Dict[str, float]:
        """{'recall@20': ..., 'ndcg@20': ..., ...}"""
        out = {}
        for k in self.ks:
            out[f"recall@{k}"] = self.recall[k]
            out[f"ndcg@{k}"] = self.ndcg[k]
        return out


def ideal_dcg(n_relevant: int, k: int) -> float:
    ranks = np.arange(min(n_relevant, k))
    return float(np.sum(1.0 / np.log2(ranks + 2.0)))


def _user_metrics(ranked: np.ndarray, relevant: np.ndarray, ks: Sequence[int]) -> Dict[str, float]:
    hits = np.isin(ranked, relevant).astype(np.float64)
    discounts = 1.0 / np.log2(np.arange(ranked.size) + 2.0)
    row = {}
    for k in ks:
        top = hits[:k]
        row[f"recall@{k}"] = float(top.sum() / relevant.size)
        row[f"ndcg@{k}"] = float(np.sum(top * discounts[:top.size]) / ideal_dcg(relevant.size, k))
    return row


def rank_from_scorer(scorer: Callable[[np.ndarray], np.ndarray], train: InteractionGraph, test: TestMap,
                     ks: Iterable[int] = TOP_KS, users: Optional[Sequence[int]] = None,
                     keep_per_user: bool = False) -> RankingReport:
    """scorer(user_batch) -> (len(batch), J) skor matrisi

    Eğitim ürünleri her kullanıcının sıralamasından çıkarılır. Eşit skorlarda
    küçük ürün indeksi önce gelir.
    """
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ContractViolation(f"geçersiz K değerleri: {ks}")
    candidates = sorted(test) if users is None else [int(u) for u in users]
    evaluated = [u for u in candidates if u in test and len(test[u]) > 0]
    skipped = len(candidates) - len(evaluated)
    if not evaluated:
        raise ContractViolation("değerlendirilecek test kullanıcısı yok")

    depth = min(max(ks), train.n_items)
    rows = []
    for batch in chunked(evaluated, EVAL_CHUNK):
        batch = np.asarray(batch, dtype=np.int64)
        scores = np.array(scorer(batch), dtype=np.float64, copy=True)
        if scores.shape != (batch.size, train.n_items):
            raise ContractViolation(f"skor şekli {scores.shape}, beklenen {(batch.size, train.n_items)}")
        for i, user in enumerate(batch):
            scores[i, train.items_of(int(user))] = -np.inf
        order = np.argsort(-scores, axis=1, kind="stable")[:, :depth]
        for i, user in enumerate(batch):
            row = _user_metrics(order[i], np.asarray(test[int(user)]), ks)
            row["user"] = int(user)
            rows.append(row)

    frame = pd.DataFrame(rows).set_index("user")
    means = frame.mean(axis=0)
    return RankingReport(
        recall={k: float(means[f"recall@{k}"]) for k in ks},
        ndcg={k: float(means[f"ndcg@{k}"]) for k in ks},
        n_users=len(evaluated),
        n_skipped=skipped,
        per_user=frame if keep_per_user else None,
    )


def rank_from_scores(scores: np.ndarray, train: InteractionGraph, test: TestMap,
                     ks: Iterable[int] = TOP_KS, users: Optional[Sequence[int]] = None,
                     keep_per_user: bool = False) -> RankingReport:
    """Tam I x J skor matrisinden rapor"""
    scores = np.asarray(scores, dtype=np.float64)
    return rank_from_scorer(lambda batch: scores[batch], train, test, ks, users, keep_per_user)


def rank_embeddings(user_emb: np.ndarray, item_emb: np.ndarray, train: InteractionGraph, test: TestMap,
                    ks: Iterable[int] = TOP_KS, users: Optional[Sequence[int]] = None,
                    keep_per_user: bool = False) -> RankingReport:
    """ŷ_{u,v} = h_u · h_v iç çarpımı ile (bloklar halinde)"""
    return rank_from_scorer(lambda batch: user_emb[batch] @ item_emb.T, train, test, ks, users, keep_per_user)

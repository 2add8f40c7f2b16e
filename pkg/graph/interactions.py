# ================== INTERACTION GRAPH ==================
"""
Kullanıcı-ürün etkileşim grafı - okuma, yeniden indeksleme, bölme, istatistik
"""

import io
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd
import scipy.sparse as sp

from utils.errors import ContractViolation, EmptyDatasetError, InputError, ParseError
from utils.helpers import fmt_sci, rng_stream

TestMap = Dict[int, np.ndarray]


def density(n_users: int, n_items: int, n_interactions: int) -> float:
    """E / (I·J)"""
    return n_interactions / float(n_users * n_items)


@dataclass(frozen=True)
class DatasetStats:
    """Veri seti istatistikleri"""
    n_users: int
    n_items: int
    n_interactions: int

    @property
    def density(self) -> float:
        return density(self.n_users, self.n_items, self.n_interactions)

    def as_dict(self) -> Dict[str, Union[int, float]]:
        return {
            "users": self.n_users,
            "items": self.n_items,
            "interactions": self.n_interactions,
            "density": self.density,
        }

    def describe(self) -> str:
        return (f"I={self.n_users} J={self.n_items} E={self.n_interactions} "
                f"density={self.density:.6g} ({fmt_sci(self.density)})")


class InteractionGraph:
    """İki parçalı kullanıcı-ürün grafı

    Kenarlar yoğun indekslerle tutulur; CSR komşuluk I x J boyutundadır.
    Oluşturulduktan sonra değişmez, thread'ler arasında paylaşılabilir.
    """

    def __init__(self, n_users: int, n_items: int, users: Sequence[int], items: Sequence[int],
                 user_labels: Optional[Sequence[str]] = None, item_labels: Optional[Sequence[str]] = None):
        users = np.asarray(users, dtype=np.int64).reshape(-1)
        items = np.asarray(items, dtype=np.int64).reshape(-1)
        if users.shape != items.shape:
            raise ContractViolation("kullanıcı ve ürün dizileri aynı uzunlukta olmalı")
        if users.size and (users.min() < 0 or users.max() >= n_users or
                           items.min() < 0 or items.max() >= n_items):
            raise ContractViolation("kenar indeksi sınır dışında")

        self.n_users = int(n_users)
        self.n_items = int(n_items)
        self.users = users
        self.items = items
        self.users.setflags(write=False)
        self.items.setflags(write=False)
        self.user_labels = list(user_labels) if user_labels is not None else None
        self.item_labels = list(item_labels) if item_labels is not None else None

        csr = sp.csr_matrix((np.ones(users.size), (users, items)), shape=(self.n_users, self.n_items))
        csr.sort_indices()
        if csr.nnz != users.size:
            raise ContractViolation("yinelenen kenar")
        self.csr = csr

    # ---------- temel özellikler ----------
    @property
    def n_edges(self) -> int:
        return int(self.users.size)

    @property
    def n_nodes(self) -> int:
        return self.n_users + self.n_items

    @property
    def edges(self) -> np.ndarray:
        """(E, 2) kenar dizisi"""
        return np.stack([self.users, self.items], axis=1)

    @property
    def user_index(self) -> Dict[str, int]:
        """Orijinal kullanıcı kimliği -> satır"""
        labels = self.user_labels or [str(i) for i in range(self.n_users)]
        return {label: i for i, label in enumerate(labels)}

    def stats(self) -> DatasetStats:
        return DatasetStats(self.n_users, self.n_items, self.n_edges)

    def user_degrees(self) -> np.ndarray:
        return np.diff(self.csr.indptr)

    def item_degrees(self) -> np.ndarray:
        return np.bincount(self.items, minlength=self.n_items)

    def items_of(self, user: int) -> np.ndarray:
        """Kullanıcının ürünleri (artan sırada)"""
        return self.csr.indices[self.csr.indptr[user]:self.csr.indptr[user + 1]]

    def has_edge(self, user: int, item: int) -> bool:
        row = self.items_of(user)
        pos = np.searchsorted(row, item)
        return bool(pos < row.size and row[pos] == item)

    def edge_set(self) -> set:
        return set(zip(self.users.tolist(), self.items.tolist()))

    # ---------- türetilmiş graflar ----------
    def with_edges(self, users: Sequence[int], items: Sequence[int]) -> "InteractionGraph":
        """Yeni kenarları sona ekleyerek yeni graf"""
        return InteractionGraph(
            self.n_users, self.n_items,
            np.concatenate([self.users, np.asarray(users, dtype=np.int64)]),
            np.concatenate([self.items, np.asarray(items, dtype=np.int64)]),
            self.user_labels, self.item_labels,
        )

    def subgraph(self, keep: np.ndarray) -> "InteractionGraph":
        """Kenar maskesine göre alt graf (düğüm kümesi aynı)"""
        keep = np.asarray(keep, dtype=bool)
        return InteractionGraph(self.n_users, self.n_items, self.users[keep], self.items[keep],
                                self.user_labels, self.item_labels)

    # ---------- serileştirme ----------
    def to_text(self) -> str:
        """'I J E' başlığı + E adet 'kullanıcı ürün' satırı"""
        lines = [f"{self.n_users} {self.n_items} {self.n_edges}"]
        lines.extend(f"{u} {v}" for u, v in zip(self.users.tolist(), self.items.tolist()))
        return "\n".join(lines) + "\n"

    def __eq__(self, other) -> bool:
        if not isinstance(other, InteractionGraph):
            return NotImplemented
        return (self.n_users == other.n_users and self.n_items == other.n_items and
                np.array_equal(self.users, other.users) and np.array_equal(self.items, other.items))

    def __repr__(self) -> str:
        return f"InteractionGraph({self.stats().describe()})"


# ================== OKUMA ==================
def _lines(source: Union[str, TextIO, Iterable[str]]) -> Iterable[str]:
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def ingest(source: Union[str, TextIO, Iterable[str]]) -> InteractionGraph:
    """Satır tabanlı 'kullanıcı ürün [ağırlık]' akışından graf oluştur

    Kimlikler ilk görülme sırasına göre yoğun indekslenir, yinelenen kenarlar
    tek kenara indirgenir, ağırlıklar yok sayılır. '#' ile başlayan satırlar
    yorumdur.
    """
    rows: List[Tuple[str, str]] = []
    for number, line in enumerate(_lines(source), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) < 2 or len(parts) > 3:
            raise ParseError(number, line, "beklenen 'kullanıcı ürün [ağırlık]'")
        if len(parts) == 3:
            try:
                float(parts[2])
            except ValueError:
                raise ParseError(number, line, "ağırlık sayı değil")
        rows.append((parts[0], parts[1]))

    if not rows:
        raise EmptyDatasetError("veri akışında etkileşim yok")

    df = pd.DataFrame(rows, columns=["user", "item"])
    user_codes, user_labels = pd.factorize(df["user"], sort=False)
    item_codes, item_labels = pd.factorize(df["item"], sort=False)
    coded = pd.DataFrame({"u": user_codes, "v": item_codes}).drop_duplicates(keep="first")

    return InteractionGraph(
        len(user_labels), len(item_labels),
        coded["u"].to_numpy(), coded["v"].to_numpy(),
        [str(x) for x in user_labels], [str(x) for x in item_labels],
    )


def load_graph(path: str) -> InteractionGraph:
    """Dosyadan ham etkileşim verisi oku"""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return ingest(handle)
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"veri seti okunamadı: {path}: {e}") from e


def read_serialized(source: Union[str, TextIO, Iterable[str]]) -> InteractionGraph:
    """to_text() çıktısını geri oku"""
    lines = [ln for ln in _lines(source) if ln.strip()]
    if not lines:
        raise EmptyDatasetError("serileştirilmiş graf boş")
    header = lines[0].split()
    if len(header) != 3:
        raise ParseError(1, lines[0], "beklenen 'I J E' başlığı")
    try:
        n_users, n_items, n_edges = (int(x) for x in header)
        pairs = np.array([[int(x) for x in ln.split()[:2]] for ln in lines[1:]], dtype=np.int64)
    except ValueError as e:
        raise ParseError(1, lines[0], f"tam sayı bekleniyordu: {e}")
    pairs = pairs.reshape(-1, 2)
    if pairs.shape[0] != n_edges:
        raise ParseError(1, lines[0], f"başlık {n_edges} kenar diyor, {pairs.shape[0]} bulundu")
    return InteractionGraph(n_users, n_items, pairs[:, 0], pairs[:, 1])


# ================== BÖLME ==================
def split(g: InteractionGraph, test_fraction: float, seed: int) -> Tuple[InteractionGraph, TestMap]:
    """Kullanıcı bazlı rastgele ayırma

    Tek etkileşimli kullanıcılar tamamen eğitimde kalır. Diğerlerinde
    max(1, ⌊oran·derece⌋) kenar teste ayrılır (en az bir eğitim kenarı kalır).
    """
    if not 0.0 < test_fraction < 1.0:
        raise ContractViolation(f"test_fraction (0,1) aralığında olmalı: {test_fraction}")

    rng = rng_stream(seed, "split")
    order = np.lexsort((g.items, g.users))
    keep = np.ones(g.n_edges, dtype=bool)
    test: TestMap = {}

    indptr = np.concatenate([[0], np.cumsum(np.bincount(g.users, minlength=g.n_users))])
    for user in range(g.n_users):
        edge_ids = order[indptr[user]:indptr[user + 1]]
        degree = edge_ids.size
        if degree <= 1:
            continue
        n_test = min(degree - 1, max(1, int(np.floor(test_fraction * degree + 1e-9))))
        chosen = rng.permutation(degree)[:n_test]
        held = edge_ids[chosen]
        keep[held] = False
        test[user] = np.sort(g.items[held])

    return g.subgraph(keep), test

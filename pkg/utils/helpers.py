# ================== UTILITY FUNCTIONS ==================
"""
Yardımcı fonksiyonlar - loglama, tohum akışları, formatlama
"""

import sys
import zlib
from typing import Iterator, List, Sequence

import numpy as np

from config.settings import PRINT_PREFIX


def log(*args) -> None:
    """Log mesajı yazdır"""
    print(PRINT_PREFIX, *args)
    sys.stdout.flush()


def fmt(x: float) -> str:
    """Sayıyı 6 haneli string olarak formatla"""
    return f"{x:.6f}"


def fmt_sci(x: float, digits: int = 1) -> str:
    """Bilimsel gösterim, üs başında sıfır olmadan

    Examples:
        0.0004016 -> 4.0e-4
        0.75      -> 7.5e-1
    """
    mantissa, exponent = f"{x:.{digits}e}".split("e")
    return f"{mantissa}e{int(exponent)}"


def chunked(sequence: Sequence, n: int) -> Iterator[Sequence]:
    """Liste parçalara böl"""
    for i in range(0, len(sequence), n):
        yield sequence[i:i + n]


def parse_list(text: str, cast=float) -> List:
    """'0.1, 0.3,0.5' -> [0.1, 0.3, 0.5]"""
    return [cast(part.strip()) for part in str(text).split(",") if part.strip()]


def rng_stream(seed: int, name: str, *keys: int) -> np.random.Generator:
    """İsimli alt tohum akışı

    Tek bir üst tohumdan (split, masks, gumbel, triplets, ...) bağımsız ve
    tekrarlanabilir üreteçler türetir.
    """
    entropy = [int(seed) & 0xFFFFFFFF, zlib.crc32(name.encode("utf-8"))]
    entropy.extend(int(k) & 0xFFFFFFFF for k in keys)
    return np.random.default_rng(np.random.SeedSequence(entropy))

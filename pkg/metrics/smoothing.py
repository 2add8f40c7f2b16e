# ================== OVERSMOOTHING METRIC ==================
"""
MAD - düğüm çiftleri arası ortalama kosinüs uzaklığı
"""

from typing import Union

import numpy as np
from sklearn.preprocessing import normalize

from utils.errors import ContractViolation, NumericError


def mad(embeddings: Union[np.ndarray, "EncodedViews"]) -> float:
    """Tüm sırasız çiftler üzerinde ortalama (1 - cos)

    Σ_{i<j} cos(x_i, x_j) = (‖Σ x̂‖² - n) / 2 eşitliği ile O(n·d).
    """
    x = getattr(embeddings, "values", embeddings)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ContractViolation(f"MAD en az 2 satır gerektirir, şekil {x.shape}")

    norms = np.linalg.norm(x, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise NumericError(f"sıfır normlu satır: {int(zero[0])}")

    n = x.shape[0]
    unit = normalize(x, norm="l2", axis=1)
    total = unit.sum(axis=0)
    mean_cos = (float(total @ total) - n) / (n * (n - 1))
    return float(np.clip(1.0 - mean_cos, 0.0, 2.0))

# ================== GRADIENT CHECK ==================
"""
Sonlu fark ile gradyan doğrulama
"""

from dataclasses import dataclass
from typing import Callable, Dict, Sequence

import numpy as np

from engine.tensor import ComputationRecord, Parameter, Tensor, backward


@dataclass
class GradCheckResult:
    ok: bool
    worst_relative: float
    worst_absolute: float
    worst_param: str


def numerical_gradient(build_loss: Callable[[], Tensor], param: Parameter, eps: float = 1e-5) -> np.ndarray:
    """Merkezi fark: (f(x+h) - f(x-h)) / 2h, eleman eleman"""
    original = param.value
    grad = np.zeros_like(original)
    for idx in np.ndindex(original.shape):
        plus = original.copy()
        plus[idx] += eps
        param.value = plus
        f_plus = build_loss().item()

        minus = original.copy()
        minus[idx] -= eps
        param.value = minus
        f_minus = build_loss().item()

        grad[idx] = (f_plus - f_minus) / (2.0 * eps)
    param.value = original
    return grad


def analytic_gradient(build_loss: Callable[[], Tensor]) -> Dict[Parameter, np.ndarray]:
    with ComputationRecord() as record:
        loss = build_loss()
    return backward(record, loss)


def gradient_check(build_loss: Callable[[], Tensor], params: Sequence[Parameter],
                   eps: float = 1e-5, rtol: float = 1e-4, atol: float = 1e-6) -> GradCheckResult:
    """Analitik ve sayısal gradyanları karşılaştır

    Bir eleman, göreli hata < rtol veya mutlak hata < atol ise geçer.
    """
    analytic = analytic_gradient(build_loss)
    worst_rel, worst_abs, worst_name, ok = 0.0, 0.0, "", True
    for param in params:
        numeric = numerical_gradient(build_loss, param, eps)
        got = analytic.get(param, np.zeros_like(param.value))
        diff = np.abs(got - numeric)
        rel = diff / np.maximum(np.abs(got) + np.abs(numeric), 1e-300)
        failing = (rel >= rtol) & (diff >= atol)
        if failing.any():
            ok = False
        if diff.size and rel.max() > worst_rel:
            worst_rel, worst_name = float(rel.max()), param.name
        worst_abs = max(worst_abs, float(diff.max()) if diff.size else 0.0)
    return GradCheckResult(ok, worst_rel, worst_abs, worst_name)

# ================== BASE MODULE CLASS ==================
"""
Temel model sınıfı - encoder ve augmentor bu sınıftan türetilir
"""

from abc import ABC, abstractmethod
from typing import Dict, List

import numpy as np

from engine.tensor import Parameter
from utils.errors import ContractViolation


def uniform_init(rng: np.random.Generator, shape, fan: int) -> np.ndarray:
    """[-1/√fan, 1/√fan] aralığında uniform başlangıç"""
    bound = 1.0 / np.sqrt(max(fan, 1))
    return rng.uniform(-bound, bound, size=shape)


class BaseModule(ABC):
    """Eğitilebilir parametre taşıyan bileşenlerin tabanı"""

    def __init__(self, name: str):
        self.name = name

    @abstractmethod
    def parameters(self) -> List[Parameter]:
        """Modülün tüm parametreleri (sabit sırada)"""

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {p.name: p.value.copy() for p in self.parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """Kayıtlı değerleri yükle (şekil kontrolü ile)"""
        for p in self.parameters():
            if p.name not in state:
                raise ContractViolation(f"'{p.name}' durumu eksik")
            value = np.asarray(state[p.name], dtype=np.float64)
            if value.shape != p.shape:
                raise ContractViolation(f"'{p.name}' şekli {value.shape} != {p.shape}")
            p.value = value.copy()

    def n_parameters(self) -> int:
        return int(sum(p.value.size for p in self.parameters()))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}, params={self.n_parameters()})"

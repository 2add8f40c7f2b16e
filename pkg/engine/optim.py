# ================== OPTIMIZERS ==================
"""
Optimizasyon modülü - SGD ve Adam, epoch başına öğrenme oranı azaltma
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Sequence

import numpy as np

from config.settings import ADAM_BETAS, ADAM_EPS
from engine.tensor import Parameter
from utils.errors import ConfigurationError, NumericError


class Optimizer(ABC):
    """Temel optimizer sınıfı"""

    def __init__(self, params: Sequence[Parameter], learning_rate: float, lr_decay: float = 1.0):
        self.params: List[Parameter] = list(params)
        self.lr = learning_rate
        self.lr_decay = lr_decay
        self.steps = 0

    @abstractmethod
    def _update(self, param: Parameter, grad: np.ndarray) -> np.ndarray:
        """Parametrenin yeni değerini döndür"""

    def step(self, grads: Dict[Parameter, np.ndarray]) -> None:
        """Tüm parametreleri güncelle

        Değerler yerinde değiştirilmez, yeni dizi atanır; kayıttaki yapraklar
        eski değeri görmeye devam eder.
        """
        self.steps += 1
        for param in self.params:
            grad = grads.get(param)
            if grad is None:
                continue
            new_value = self._update(param, grad)
            if not np.all(np.isfinite(new_value)):
                raise NumericError(f"'{param.name}' güncellemesi sonlu değil")
            param.value = new_value

    def decay(self) -> float:
        """Epoch sonu lr çarpanı"""
        self.lr *= self.lr_decay
        return self.lr

    def state_dict(self) -> Dict[str, Any]:
        return {"lr": self.lr, "steps": self.steps}

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        self.lr = float(state["lr"])
        self.steps = int(state["steps"])

    def state_arrays(self) -> Dict[str, np.ndarray]:
        """Checkpoint'e yazılacak dizi durumları"""
        return {}

    def load_state_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        pass


class SGD(Optimizer):
    """Düz stokastik gradyan inişi"""

    def _update(self, param: Parameter, grad: np.ndarray) -> np.ndarray:
        return param.value - self.lr * grad


class Adam(Optimizer):
    """Adam (moment tahminli)"""

    def __init__(self, params: Sequence[Parameter], learning_rate: float, lr_decay: float = 1.0,
                 betas=ADAM_BETAS, eps: float = ADAM_EPS):
        super().__init__(params, learning_rate, lr_decay)
        self.beta_1, self.beta_2 = betas
        self.eps = eps
        self.m = {p.name: np.zeros_like(p.value) for p in self.params}
        self.v = {p.name: np.zeros_like(p.value) for p in self.params}

    def _update(self, param: Parameter, grad: np.ndarray) -> np.ndarray:
        m = self.beta_1 * self.m[param.name] + (1.0 - self.beta_1) * grad
        v = self.beta_2 * self.v[param.name] + (1.0 - self.beta_2) * grad * grad
        self.m[param.name], self.v[param.name] = m, v
        m_hat = m / (1.0 - self.beta_1 ** self.steps)
        v_hat = v / (1.0 - self.beta_2 ** self.steps)
        return param.value - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def state_arrays(self) -> Dict[str, np.ndarray]:
        arrays = {f"adam.m.{k}": v for k, v in self.m.items()}
        arrays.update({f"adam.v.{k}": v for k, v in self.v.items()})
        return arrays

    def load_state_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        for name in self.m:
            self.m[name] = np.array(arrays[f"adam.m.{name}"])
            self.v[name] = np.array(arrays[f"adam.v.{name}"])


def create_optimizer(name: str, params: Sequence[Parameter], learning_rate: float,
                     lr_decay: float = 1.0) -> Optimizer:
    """İsimden optimizer oluştur"""
    if name == "sgd":
        return SGD(params, learning_rate, lr_decay)
    if name == "adam":
        return Adam(params, learning_rate, lr_decay)
    raise ConfigurationError(f"bilinmeyen optimizer: {name}")

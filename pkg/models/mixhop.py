# ================== MIXHOP ENCODER ==================
"""
Mixhop graf encoder - katman başına 0..m hop yayılımlarını dönüştürüp birleştirir

Her katman:  H^(l+1) = LeakyReLU( [ Ã^m H^(l) W_m^(l) ]_{m ∈ M} )
Ã^m hiçbir zaman oluşturulmaz; Ã(Ã(...H)) şeklinde tekrarlı spmm uygulanır.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from config.settings import EMBED_DIM, HOPS, LEAKY_SLOPE, MAX_HOP, NUM_LAYERS, READOUT
from engine.tensor import Parameter, Tensor, as_tensor, concat, leaky_relu, matmul, add, mul
from models.base import BaseModule, uniform_init
from utils.errors import ConfigurationError, ContractViolation
from utils.helpers import rng_stream


@dataclass
class EncodedViews:
    """Encoder çıktısı: son gömüler + katman ara çıktıları"""
    final: Tensor
    layers: List[Tensor]
    n_users: int

    @property
    def values(self) -> np.ndarray:
        return self.final.data

    @property
    def shape(self):
        return self.final.shape


def hop_widths(dim: int, n_hops: int) -> List[int]:
    """d sütunu |M| bloğa böl; genişlikler en fazla 1 farklı"""
    if n_hops < 1 or n_hops > dim:
        raise ConfigurationError(f"{n_hops} hop, {dim} genişliğe sığmaz")
    base, extra = divmod(dim, n_hops)
    return [base + 1 if i < extra else base for i in range(n_hops)]


class MixhopEncoder(BaseModule):
    """Paylaşılan mixhop encoder GE(·)

    Aynı parametreler orijinal graf ve iki artırılmış görünüm için kullanılır.
    """

    def __init__(self, dim: int = EMBED_DIM, layers: int = NUM_LAYERS, hops: Sequence[int] = HOPS,
                 slope: float = LEAKY_SLOPE, readout: str = READOUT, seed: int = 0):
        super().__init__("encoder")
        hops = tuple(sorted(set(int(m) for m in hops)))
        if not hops or min(hops) < 0 or max(hops) > MAX_HOP:
            raise ConfigurationError(f"hop kümesi [0, {MAX_HOP}] içinde ve boş olmamalı: {hops}")
        if readout not in ("mean", "last"):
            raise ConfigurationError(f"bilinmeyen readout: {readout}")

        self.dim = dim
        self.n_layers = layers
        self.hops = hops
        self.slope = slope
        self.readout = readout
        self.widths = dict(zip(hops, hop_widths(dim, len(hops))))

        rng = rng_stream(seed, "init", 1)
        self.weights: List[Dict[int, Parameter]] = []
        for layer in range(layers):
            per_hop = {}
            for m in hops:
                per_hop[m] = Parameter(uniform_init(rng, (dim, self.widths[m]), dim), f"W{layer}.hop{m}")
            self.weights.append(per_hop)

        # Katman birleştirme ağırlıkları (h0 dahil L+1 adet)
        if readout == "mean":
            self.layer_weights = np.full(layers + 1, 1.0 / (layers + 1))
        else:
            self.layer_weights = np.zeros(layers + 1)
            self.layer_weights[-1] = 1.0

    def parameters(self) -> List[Parameter]:
        return [self.weights[l][m] for l in range(self.n_layers) for m in self.hops]

    def layer(self, adj, x: Tensor, index: int) -> Tensor:
        """Tek mixhop katmanı"""
        blocks = []
        hop, reached = x, 0
        for m in self.hops:
            while reached < m:
                hop = adj.propagate(hop)
                reached += 1
            blocks.append(matmul(hop, self.weights[index][m].leaf()))
        mixed = blocks[0] if len(blocks) == 1 else concat(blocks, axis=1)
        return leaky_relu(mixed, self.slope)

    def encode(self, adj, h0: Union[Tensor, Parameter, np.ndarray]) -> EncodedViews:
        """Graf (normalize komşuluk veya artırılmış görünüm) üzerinde kodla"""
        x = h0.leaf() if isinstance(h0, Parameter) else as_tensor(h0)
        if x.data.ndim != 2 or x.shape[0] != adj.n_nodes:
            raise ContractViolation(f"h0 şekli {x.shape}, komşuluk {adj.n_nodes} düğüm")
        if x.shape[1] != self.dim:
            raise ConfigurationError(f"h0 genişliği {x.shape[1]} != d={self.dim}")

        outputs = [x]
        for index in range(self.n_layers):
            outputs.append(self.layer(adj, outputs[-1], index))

        final: Optional[Tensor] = None
        for weight, out in zip(self.layer_weights, outputs):
            if weight == 0.0:
                continue
            term = out if weight == 1.0 else mul(out, float(weight))
            final = term if final is None else add(final, term)
        return EncodedViews(final, outputs[1:], adj.n_users)

# ================== TENSOR ENGINE ==================
"""
Ters yönlü otomatik türev motoru - yoğun/seyrek matris işlemleri ve hesaplama kaydı

Her işlem (matmul, spmm, sigmoid, ...) ileri değeri hesaplar ve gradyan
gerektiren girişleri varsa kendini aktif ComputationRecord'a ekler.
backward(record, loss) kaydı ters sırada gezip her parametre yaprağı için
gradyan döndürür.
"""

import threading
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.special import expit, logsumexp as _logsumexp

from utils.errors import ContractViolation, NumericError

ArrayLike = Union["Tensor", np.ndarray, float, int]

_local = threading.local()


def _record_stack() -> List["ComputationRecord"]:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def active_record() -> Optional["ComputationRecord"]:
    """Bu thread'de aktif kayıt (yoksa None)"""
    stack = _record_stack()
    return stack[-1] if stack else None


# ================== PARAMETER ==================
class Parameter:
    """Eğitilebilir parametre

    Değer optimizer adımında yeni bir dizi ile değiştirilir; ileri/geri
    geçiş sırasında salt okunur kabul edilir.
    """

    def __init__(self, value: np.ndarray, name: str):
        self.value = np.array(value, dtype=np.float64)
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    def leaf(self) -> "Tensor":
        """Aktif kayıttaki yaprak düğüm; kayıt yoksa sabit tensör"""
        record = active_record()
        if record is None:
            return Tensor(self.value)
        return record.leaf(self)

    def __repr__(self) -> str:
        return f"Parameter({self.name}, shape={self.shape})"


# ================== TENSOR ==================
class Tensor:
    """Kayıttaki bir düğüm: ileri değer + ebeveynler + yerel türev"""

    __slots__ = ("data", "op", "parents", "forward_fn", "backward_fn", "requires_grad", "param")

    def __init__(self, data, op: str = "const", parents: Tuple["Tensor", ...] = (),
                 forward_fn: Optional[Callable] = None, backward_fn: Optional[Callable] = None,
                 requires_grad: bool = False, param: Optional[Parameter] = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.op = op
        self.parents = parents
        self.forward_fn = forward_fn
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad
        self.param = param

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractViolation(f"item() skaler gerektirir, şekil {self.shape}")
        return float(self.data.reshape(-1)[0])

    def __add__(self, other: ArrayLike) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return mul(other, self)

    def __neg__(self) -> "Tensor":
        return mul(self, -1.0)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __repr__(self) -> str:
        return f"Tensor(op={self.op}, shape={self.shape}, requires_grad={self.requires_grad})"


def as_tensor(x: ArrayLike) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def constant(x) -> Tensor:
    """Gradyan gerektirmeyen tensör"""
    return Tensor(np.array(x, dtype=np.float64))


# ================== COMPUTATION RECORD ==================
class ComputationRecord:
    """İşlem kaydı (tape)

    Düğümler oluşturulma sırasında (topolojik sıra) saklanır. Kayıt tek bir
    thread'e aittir; farklı thread'lerde bağımsız kayıtlar kullanılabilir.
    """

    def __init__(self):
        self.nodes: List[Tensor] = []
        self._position: Dict[int, int] = {}
        self._leaves: Dict[int, Tensor] = {}
        self.parameters: List[Parameter] = []

    def __enter__(self) -> "ComputationRecord":
        _record_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        stack = _record_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def leaf(self, param: Parameter) -> Tensor:
        """Parametre için yaprak düğüm (kayıt başına bir kez)"""
        node = self._leaves.get(id(param))
        if node is None:
            node = Tensor(param.value, op=f"leaf:{param.name}", requires_grad=True, param=param)
            self._leaves[id(param)] = node
            self.parameters.append(param)
            self._append(node)
        return node

    def _append(self, node: Tensor) -> None:
        self._position[id(node)] = len(self.nodes)
        self.nodes.append(node)

    def position(self, node: Tensor) -> int:
        pos = self._position.get(id(node))
        if pos is None:
            raise ContractViolation(f"{node!r} bu kayda ait değil")
        return pos

    def replay(self) -> List[np.ndarray]:
        """Kaydı baştan çalıştırıp ileri değerleri yeniden üret"""
        values: Dict[int, np.ndarray] = {}
        out = []
        for node in self.nodes:
            if node.forward_fn is None:
                value = node.data
            else:
                value = node.forward_fn(*(values.get(id(p), p.data) for p in node.parents))
            values[id(node)] = value
            out.append(value)
        return out

    def __len__(self) -> int:
        return len(self.nodes)


def _node(op: str, parents: Sequence[ArrayLike], forward_fn: Callable, backward_fn: Callable) -> Tensor:
    parents = tuple(as_tensor(p) for p in parents)
    value = np.asarray(forward_fn(*(p.data for p in parents)), dtype=np.float64)
    if not any(p.requires_grad for p in parents):
        return Tensor(value, op=op)

    record = active_record()
    if record is None:
        raise ContractViolation(f"'{op}' gradyanlı girişle kayıt dışında çağrıldı")
    out = Tensor(value, op=op, parents=parents, forward_fn=forward_fn,
                 backward_fn=backward_fn, requires_grad=True)
    record._append(out)
    return out


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Yayınlanan boyutlar üzerinden gradyanı topla"""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


# ================== ELEMENTWISE ==================
def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    sa, sb = a.shape, b.shape
    return _node("add", (a, b), lambda x, y: x + y,
                 lambda g, out, x, y: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    sa, sb = a.shape, b.shape
    return _node("sub", (a, b), lambda x, y: x - y,
                 lambda g, out, x, y: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    sa, sb = a.shape, b.shape
    return _node("mul", (a, b), lambda x, y: x * y,
                 lambda g, out, x, y: (_unbroadcast(g * y, sa), _unbroadcast(g * x, sb)))


def sigmoid(x: ArrayLike) -> Tensor:
    return _node("sigmoid", (x,), expit, lambda g, out, v: (g * out * (1.0 - out),))


def leaky_relu(x: ArrayLike, slope: float) -> Tensor:
    """max(x, slope·x); x = 0 noktasında alt-gradyan = slope"""
    if not 0.0 <= slope <= 1.0:
        raise ContractViolation(f"leaky_relu eğimi [0,1] aralığında olmalı: {slope}")
    return _node(
        "leaky_relu", (x,),
        lambda v: np.where(v > 0, v, slope * v),
        lambda g, out, v: (g * np.where(v > 0, 1.0, slope),),
    )


def exp(x: ArrayLike) -> Tensor:
    return _node("exp", (x,), np.exp, lambda g, out, v: (g * out,))


def log(x: ArrayLike) -> Tensor:
    with np.errstate(divide="ignore", invalid="ignore"):
        return _node("log", (x,), np.log, lambda g, out, v: (g / v,))


def softplus(x: ArrayLike) -> Tensor:
    """log(1 + e^x), taşmaya karşı kararlı"""
    return _node("softplus", (x,), lambda v: np.logaddexp(0.0, v),
                 lambda g, out, v: (g * expit(v),))


# ================== MATRIX ==================
def matmul(a: ArrayLike, b: ArrayLike, transpose_b: bool = False) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    inner_b = b.shape[1] if transpose_b else b.shape[0]
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != inner_b:
        raise ContractViolation(f"matmul boyut uyuşmazlığı: {a.shape} x {b.shape}"
                                f"{'ᵀ' if transpose_b else ''}")
    if transpose_b:
        return _node("matmul", (a, b), lambda x, y: x @ y.T,
                     lambda g, out, x, y: (g @ y, g.T @ x))
    return _node("matmul", (a, b), lambda x, y: x @ y,
                 lambda g, out, x, y: (g @ y.T, x.T @ g))


def spmm(adj: sp.csr_matrix, dense: ArrayLike, values: Optional[ArrayLike] = None) -> Tensor:
    """Seyrek (CSR) x yoğun çarpım

    values verilirse CSR yapısı sabit tutulur ve sıfırdan farklı değerler bu
    tensörden (nnz x 1, CSR sırasında) okunur; türev her iki girişe de akar.
    """
    dense = as_tensor(dense)
    if dense.data.ndim != 2 or adj.shape[1] != dense.shape[0]:
        raise ContractViolation(f"spmm boyut uyuşmazlığı: {adj.shape} x {dense.shape}")
    adj = sp.csr_matrix(adj)

    if values is None:
        adj_t = adj.T.tocsr()
        return _node("spmm", (dense,), lambda h: adj @ h, lambda g, out, h: (adj_t @ g,))

    values = as_tensor(values)
    if values.data.size != adj.nnz:
        raise ContractViolation(f"spmm değer sayısı {values.data.size} != nnz {adj.nnz}")
    indices, indptr, shape = adj.indices, adj.indptr, adj.shape
    rows = np.repeat(np.arange(shape[0]), np.diff(indptr))
    vshape = values.shape

    def build(v: np.ndarray) -> sp.csr_matrix:
        return sp.csr_matrix((v.reshape(-1), indices, indptr), shape=shape)

    def backward(g, out, v, h):
        g_values = np.einsum("ij,ij->i", g[rows], h[indices]).reshape(vshape)
        return g_values, build(v).T @ g

    return _node("spmm", (values, dense), lambda v, h: build(v) @ h, backward)


def concat(tensors: Sequence[ArrayLike], axis: int = 1) -> Tensor:
    """Sütun (varsayılan) yönünde birleştir"""
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]
    return _node("concat", tensors, lambda *xs: np.concatenate(xs, axis=axis),
                 lambda g, out, *xs: tuple(np.split(g, splits, axis=axis)))


def gather(x: ArrayLike, index) -> Tensor:
    """Satır seçimi x[index]"""
    index = np.asarray(index, dtype=np.int64)
    x = as_tensor(x)
    shape = x.shape

    def backward(g, out, v):
        grad = np.zeros(shape)
        np.add.at(grad, index, g)
        return (grad,)

    return _node("gather", (x,), lambda v: v[index], backward)


# ================== REDUCTIONS ==================
def sum(x: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    shape = x.shape

    def backward(g, out, v):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return _node("sum", (x,), lambda v: np.sum(v, axis=axis, keepdims=keepdims), backward)


def mean(x: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    count = x.data.size if axis is None else x.shape[axis]
    return mul(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def logsumexp(x: ArrayLike, axis: int = 1) -> Tensor:
    """Satır bazlı log Σ exp, maksimum çıkarılarak kararlı"""
    return _node(
        "logsumexp", (x,),
        lambda v: _logsumexp(v, axis=axis, keepdims=True),
        lambda g, out, v: (g * np.exp(v - out),),
    )


# ================== COMPOSITES ==================
def normalize_rows(x: ArrayLike) -> Tensor:
    """Satırları L2 normuna böl (kayıttaki ilkel işlemlerle)"""
    x = as_tensor(x)
    sq = sum(mul(x, x), axis=1, keepdims=True)
    return mul(x, exp(mul(log(sq), -0.5)))


def row_dot(a: ArrayLike, b: ArrayLike) -> Tensor:
    """Satır bazlı iç çarpım -> (n,)"""
    return sum(mul(a, b), axis=1)


def frobenius(params: Sequence[Parameter]) -> Tensor:
    """‖Θ‖²_F"""
    total: Tensor = constant(0.0)
    for p in params:
        leaf = p.leaf()
        total = add(total, sum(mul(leaf, leaf)))
    return total


# ================== BACKWARD ==================
def backward(record: ComputationRecord, loss: Tensor) -> Dict[Parameter, np.ndarray]:
    """Skaler kayıptan her parametre yaprağına gradyan

    Kayıptan ulaşılamayan yapraklar sıfır gradyan alır.
    """
    if loss.data.size != 1:
        raise ContractViolation(f"backward skaler kayıp gerektirir, şekil {loss.shape}")

    grads_out = {p: np.zeros_like(p.value) for p in record.parameters}
    if not loss.requires_grad:
        return grads_out

    stop = record.position(loss)
    for node in record.nodes[:stop + 1]:
        if not np.all(np.isfinite(node.data)):
            raise NumericError(f"'{node.op}' işleminde sonlu olmayan ileri değer")

    grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(record.nodes[:stop + 1]):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.param is not None:
            grads_out[node.param] = grads_out[node.param] + g
            continue
        parent_grads = node.backward_fn(g, node.data, *(p.data for p in node.parents))
        for parent, pg in zip(node.parents, parent_grads):
            if not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = np.asarray(pg, dtype=np.float64)
    return grads_out

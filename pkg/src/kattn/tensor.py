"""Minimal dense-tensor engine with reverse-mode automatic differentiation.

Everything is float64 and row-major. There is no general broadcasting:
the only shape mismatch tolerated is adding a single bias row (1, m) to a
matrix (n, m). Gradients accumulate into leaf ``.grad`` buffers until
``zero_grad`` is called, so several losses can backprop into shared
parameters (batch accumulation).
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class LabelError(ValueError):
    """A gold class id lies outside the classifier's range."""


class DataError(ValueError):
    """Input data violates a structural precondition."""


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad) or any(
            p.requires_grad for p in _parents
        )
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def _accumulate(self, g: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self, seed=None) -> None:
        """Run reverse-mode differentiation from this tensor.

        ``seed`` is the upstream gradient (defaults to ones). Nodes are
        visited exactly once, in reverse topological order.
        """
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen and p.requires_grad:
                    stack.append((p, False))
        if seed is None:
            seed = np.ones_like(self.data)
        else:
            seed = np.asarray(seed, dtype=np.float64) * np.ones_like(self.data)
        self._accumulate(seed)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def zero_grad(params) -> None:
    for p in params:
        p.grad = None


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shapes incompatible: {a.shape} x {b.shape}")
    out = Tensor(a.data @ b.data, _parents=(a, b))

    def bw(g):
        a._accumulate(g @ b.data.T)
        b._accumulate(a.data.T @ g)

    out._backward = bw
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    bias_row = a.data.ndim == 2 and b.data.ndim == 2 and b.shape == (1, a.shape[1])
    if a.shape != b.shape and not bias_row:
        raise ShapeError(f"add shapes incompatible: {a.shape} + {b.shape}")
    out = Tensor(a.data + b.data, _parents=(a, b))

    def bw(g):
        a._accumulate(g)
        b._accumulate(g.sum(axis=0, keepdims=True) if bias_row else g)

    out._backward = bw
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    mean_row = a.data.ndim == 2 and b.data.ndim == 2 and b.shape == (1, a.shape[1])
    if a.shape != b.shape and not mean_row:
        raise ShapeError(f"sub shapes incompatible: {a.shape} - {b.shape}")
    out = Tensor(a.data - b.data, _parents=(a, b))

    def bw(g):
        a._accumulate(g)
        b._accumulate(-(g.sum(axis=0, keepdims=True)) if mean_row else -g)

    out._backward = bw
    return out


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)
    out = Tensor(x.data * c, _parents=(x,))
    out._backward = lambda g: x._accumulate(g * c)
    return out


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    out = Tensor(y, _parents=(x,))
    out._backward = lambda g: x._accumulate(g * (1.0 - y * y))
    return out


def relu(x: Tensor) -> Tensor:
    y = np.maximum(x.data, 0.0)
    out = Tensor(y, _parents=(x,))
    out._backward = lambda g: x._accumulate(g * (x.data > 0.0))
    return out


def transpose(x: Tensor) -> Tensor:
    out = Tensor(x.data.T, _parents=(x,))
    out._backward = lambda g: x._accumulate(g.T)
    return out


def softmax_rows(x: Tensor, masked_cols=None) -> Tensor:
    """Row-wise softmax, stabilized by row-max subtraction.

    ``masked_cols`` is an optional boolean array (broadcastable over rows);
    True entries receive score -inf, i.e. exactly zero weight.
    """
    z = x.data
    if masked_cols is not None:
        masked_cols = np.asarray(masked_cols, dtype=bool)
        full = np.broadcast_to(masked_cols, z.shape)
        if full.all(axis=-1).any():
            raise DataError("softmax row has every column masked")
        z = np.where(full, -np.inf, z)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=-1, keepdims=True)
    out = Tensor(y, _parents=(x,))

    def bw(g):
        x._accumulate((g - (g * y).sum(axis=-1, keepdims=True)) * y)

    out._backward = bw
    return out


def concat_cols(tensors) -> Tensor:
    tensors = list(tensors)
    rows = tensors[0].shape[0]
    for t in tensors[1:]:
        if t.shape[0] != rows:
            raise ShapeError(
                f"concat_cols row mismatch: {tensors[0].shape} vs {t.shape}"
            )
    out = Tensor(np.concatenate([t.data for t in tensors], axis=1),
                 _parents=tuple(tensors))

    def bw(g):
        ofs = 0
        for t in tensors:
            w = t.shape[1]
            t._accumulate(g[:, ofs:ofs + w])
            ofs += w

    out._backward = bw
    return out


def mean_rows(x: Tensor) -> Tensor:
    n = x.shape[0]
    out = Tensor(x.data.mean(axis=0, keepdims=True), _parents=(x,))
    out._backward = lambda g: x._accumulate(np.repeat(g, n, axis=0) / n)
    return out


def row_select(x: Tensor, indices) -> Tensor:
    """Gather rows by index; backward scatter-adds into the source."""
    idx = np.asarray(indices, dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= x.shape[0]):
        raise IndexError(f"row index out of bounds for table of {x.shape[0]} rows")
    out = Tensor(x.data[idx], _parents=(x,))

    def bw(g):
        if not x.requires_grad:
            return
        gx = np.zeros_like(x.data)
        np.add.at(gx, idx, g)
        if x.grad is None:
            x.grad = gx
        else:
            x.grad += gx

    out._backward = bw
    return out


def select_cols_per_row(x: Tensor, idx) -> Tensor:
    """out[i, j] = x[i, idx[i, j]]; used for relative-position score lookup."""
    idx = np.asarray(idx, dtype=np.intp)
    out = Tensor(np.take_along_axis(x.data, idx, axis=1), _parents=(x,))
    rows = np.arange(x.shape[0])[:, None]

    def bw(g):
        if not x.requires_grad:
            return
        gx = np.zeros_like(x.data)
        np.add.at(gx, (np.broadcast_to(rows, idx.shape), idx), g)
        if x.grad is None:
            x.grad = gx
        else:
            x.grad += gx

    out._backward = bw
    return out


def mask_rows(x: Tensor, keep) -> Tensor:
    """Zero rows where ``keep`` is false (padding-output masking)."""
    keep = np.asarray(keep, dtype=np.float64).reshape(-1, 1)
    if keep.shape[0] != x.shape[0]:
        raise ShapeError(f"mask length {keep.shape[0]} != row count {x.shape[0]}")
    out = Tensor(x.data * keep, _parents=(x,))
    out._backward = lambda g: x._accumulate(g * keep)
    return out


def dropout(x: Tensor, rate: float, train: bool, rng=None) -> Tensor:
    """Inverted dropout: identity at evaluation time, survivor scaling 1/(1-rate)."""
    if not train or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("training-mode dropout requires an rng")
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    out = Tensor(x.data * keep, _parents=(x,))
    out._backward = lambda g: x._accumulate(g * keep)
    return out


def log_softmax_rows(data: np.ndarray) -> np.ndarray:
    z = data - data.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def cross_entropy(logits: Tensor, gold) -> Tensor:
    """Mean over the batch of -log softmax(logits)[gold]."""
    gold = np.asarray(gold, dtype=np.intp).reshape(-1)
    b, c = logits.shape
    if gold.shape[0] != b:
        raise DataError(f"{gold.shape[0]} labels for {b} logit rows")
    if gold.size and (gold.min() < 0 or gold.max() >= c):
        raise LabelError(f"gold id out of range [0, {c})")
    logp = log_softmax_rows(logits.data)
    loss = -logp[np.arange(b), gold].mean()
    out = Tensor(loss, _parents=(logits,))

    def bw(g):
        grad = np.exp(logp)
        grad[np.arange(b), gold] -= 1.0
        logits._accumulate(float(g) * grad / b)

    out._backward = bw
    return out

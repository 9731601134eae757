"""Dense float64 tensors with reverse-mode automatic differentiation.

Every operation records its parents, a backward closure, and a forward
closure, so a finished computation can be both differentiated (``backward``)
and replayed bit-identically (``Graph.replay``). There is no global tape:
the graph lives in the tensors themselves, which keeps independent
evaluation workers isolated. ``no_grad`` disables recording thread-locally.

Shapes follow NCHW for convolution/pooling; 3-D (C, H, W) inputs are
accepted and treated as a batch of one.
"""

from __future__ import annotations

import threading

import numpy as np

from absgen import _kernels
from absgen.errors import ContractError, DimensionError

_state = threading.local()


def grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


class no_grad:
    """Context manager that suspends graph recording on this thread."""

    def __enter__(self):
        self._saved = grad_enabled()
        _state.grad_enabled = False
        return self

    def __exit__(self, *exc):
        _state.grad_enabled = self._saved
        return False


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_prev", "_op", "_backward", "_forward")

    # keep numpy from absorbing `ndarray <op> Tensor` into an object ufunc;
    # returning NotImplemented routes those through our reflected operators
    __array_ufunc__ = None

    def __init__(self, data, requires_grad: bool = False):
        # ascontiguousarray would promote 0-d scalars to shape (1,), so copy
        # manually when the input is non-contiguous or read-only
        arr = np.asarray(data, dtype=np.float64)
        if not (arr.flags.c_contiguous and arr.flags.writeable):
            arr = arr.copy(order="C")
        self.data = arr
        self.requires_grad = requires_grad
        self.grad = None
        self._prev = ()
        self._op = "leaf"
        self._backward = None
        self._forward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def __repr__(self):
        return f"Tensor(op={self._op}, shape={self.data.shape}, requires_grad={self.requires_grad})"

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    # -- graph plumbing ----------------------------------------------------

    def _accum(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self, leaves=None):
        """Populate ``grad`` with d(self)/d(leaf) for every tensor on the path.

        ``self`` must be scalar. If ``leaves`` is given, any listed tensor
        left untouched by the sweep gets an explicit all-zeros gradient.
        """
        if self.data.size != 1:
            raise ContractError(f"backward requires a scalar loss, got shape {self.data.shape}")
        order = topo_order(self)
        for node in order:
            node.grad = None  # clear stale gradients from earlier passes
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
        if leaves is not None:
            for leaf in leaves:
                if leaf.grad is None:
                    leaf.grad = np.zeros_like(leaf.data)

    # -- operator sugar ----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def reshape(self, *shape):
        return reshape(self, *shape)

    def sum(self, axis=None):
        return tensor_sum(self, axis)

    def mean(self):
        return mean(self)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def topo_order(root: Tensor):
    """Dependency-respecting order of the graph below ``root`` (leaves first)."""
    order, seen, stack = [], set(), [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._prev:
            stack.append((p, False))
    return order


class Graph:
    """Ordered record of the operations below a root tensor.

    ``replay`` re-executes every recorded forward closure in topological
    order against the leaves' current values; with unchanged leaves the
    result is bit-identical to the original run.
    """

    def __init__(self, root: Tensor):
        self.root = root
        self.nodes = topo_order(root)

    def ops(self):
        return [n._op for n in self.nodes if n._op != "leaf"]

    def replay(self) -> np.ndarray:
        for node in self.nodes:
            if node._forward is not None:
                node.data = node._forward()
        return self.root.data


def _make(out_data, parents, op, backward, forward) -> Tensor:
    out = Tensor(out_data)
    if grad_enabled() and any(p.requires_grad or p._prev for p in parents):
        out.requires_grad = any(p.requires_grad for p in parents)
        out._prev = tuple(parents)
        out._op = op
        out._backward = backward
        out._forward = forward
    return out


def _unbroadcast(g, shape):
    # sum out axes that numpy broadcasting expanded
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


# -- arithmetic ------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        a._accum(_unbroadcast(g, a.data.shape))
        b._accum(_unbroadcast(g, b.data.shape))

    return _make(a.data + b.data, (a, b), "add", backward, lambda: a.data + b.data)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        a._accum(_unbroadcast(g, a.data.shape))
        b._accum(_unbroadcast(-g, b.data.shape))

    return _make(a.data - b.data, (a, b), "sub", backward, lambda: a.data - b.data)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        a._accum(_unbroadcast(g * b.data, a.data.shape))
        b._accum(_unbroadcast(g * a.data, b.data.shape))

    return _make(a.data * b.data, (a, b), "mul", backward, lambda: a.data * b.data)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul inner dimensions differ: {a.shape} x {b.shape}")

    def backward(g):
        a._accum(g @ b.data.T)
        b._accum(a.data.T @ g)

    return _make(a.data @ b.data, (a, b), "matmul", backward, lambda: a.data @ b.data)


# -- shape ops -------------------------------------------------------------


def reshape(a, *shape) -> Tensor:
    a = as_tensor(a)
    if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
        shape = tuple(shape[0])
    old = a.data.shape

    def backward(g):
        a._accum(g.reshape(old))

    return _make(a.data.reshape(shape), (a,), "reshape", backward, lambda: a.data.reshape(shape))


def concat(a, b, axis: int) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != b.ndim:
        raise DimensionError(f"concat rank mismatch: {a.shape} vs {b.shape}")
    ax = axis % a.ndim if a.ndim else 0
    for d in range(a.ndim):
        if d != ax and a.shape[d] != b.shape[d]:
            raise DimensionError(f"concat shapes differ off axis {axis}: {a.shape} vs {b.shape}")
    na = a.shape[ax]

    def backward(g):
        ga, gb = np.split(g, [na], axis=ax)
        a._accum(ga)
        b._accum(gb)

    return _make(
        np.concatenate([a.data, b.data], axis=ax),
        (a, b),
        "concat",
        backward,
        lambda: np.concatenate([a.data, b.data], axis=ax),
    )


def narrow(a, axis: int, start: int, length: int) -> Tensor:
    """Slice ``length`` entries from ``start`` along ``axis`` (concat's inverse)."""
    a = as_tensor(a)
    ax = axis % a.ndim
    if start < 0 or start + length > a.shape[ax]:
        raise DimensionError(f"narrow [{start}:{start + length}) exceeds axis {axis} of {a.shape}")
    idx = tuple(slice(start, start + length) if d == ax else slice(None) for d in range(a.ndim))

    def backward(g):
        buf = np.zeros_like(a.data)
        buf[idx] = g
        a._accum(buf)

    return _make(a.data[idx].copy(), (a,), "narrow", backward, lambda: a.data[idx].copy())


# -- reductions ------------------------------------------------------------


def tensor_sum(a, axis=None) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        if axis is None:
            a._accum(np.full_like(a.data, float(g)))
        else:
            a._accum(np.broadcast_to(np.expand_dims(g, axis), a.data.shape).copy())

    return _make(a.data.sum(axis=axis), (a,), "sum", backward, lambda: a.data.sum(axis=axis))


def mean(a) -> Tensor:
    a = as_tensor(a)
    n = a.data.size

    def backward(g):
        a._accum(np.full_like(a.data, float(g) / n))

    return _make(a.data.mean(), (a,), "mean", backward, lambda: a.data.mean())


# -- elementwise nonlinearities -------------------------------------------


def tanh(a) -> Tensor:
    a = as_tensor(a)
    y = np.tanh(a.data)

    def backward(g, y=y):
        a._accum(g * (1.0 - y * y))

    return _make(y, (a,), "tanh", backward, lambda: np.tanh(a.data))


def sigmoid(a) -> Tensor:
    a = as_tensor(a)

    def _f(x):
        # split by sign so exp never overflows
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        e = np.exp(x[~pos])
        out[~pos] = e / (1.0 + e)
        return out

    y = _f(a.data)

    def backward(g, y=y):
        a._accum(g * y * (1.0 - y))

    return _make(y, (a,), "sigmoid", backward, lambda: _f(a.data))


def relu(a) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        a._accum(g * (a.data > 0))

    return _make(np.maximum(a.data, 0.0), (a,), "relu", backward, lambda: np.maximum(a.data, 0.0))


def activation(a, kind: str) -> Tensor:
    try:
        return {"tanh": tanh, "relu": relu, "sigmoid": sigmoid}[kind](a)
    except KeyError:
        raise ContractError(f"unknown activation kind: {kind!r}") from None


def log(a) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        a._accum(g / a.data)

    return _make(np.log(a.data), (a,), "log", backward, lambda: np.log(a.data))


def sqrt(a) -> Tensor:
    a = as_tensor(a)
    y = np.sqrt(a.data)

    def backward(g, y=y):
        # guard keeps the subgradient finite at exactly zero
        a._accum(g / (2.0 * np.maximum(y, 1e-12)))

    return _make(y, (a,), "sqrt", backward, lambda: np.sqrt(a.data))


def clip(a, lo: float, hi: float) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        a._accum(g * ((a.data >= lo) & (a.data <= hi)))

    return _make(np.clip(a.data, lo, hi), (a,), "clip", backward, lambda: np.clip(a.data, lo, hi))


# -- spatial ops -----------------------------------------------------------


def _as_nchw(x):
    """View 2-D (H, W) or 3-D (C, H, W) data as NCHW; returns (array, dims_added)."""
    data = x.data if isinstance(x, Tensor) else x
    if data.ndim == 2:
        return data[None, None], 2
    if data.ndim == 3:
        return data[None], 1
    return data, 0


def _drop_dims(arr, added):
    return arr.reshape(arr.shape[added:]) if added else arr


def conv2d(x, kernels, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlate HW/CHW/NCHW input with (Cout, Cin, kh, kw) kernels."""
    x, kernels = as_tensor(x), as_tensor(kernels)
    xd, squeeze = _as_nchw(x)
    if xd.ndim != 4 or kernels.ndim != 4:
        raise DimensionError(f"conv2d expects HW/CHW/NCHW input and 4-D kernels, got {x.shape} and {kernels.shape}")
    n, cin, h, w = xd.shape
    cout, kcin, kh, kw = kernels.shape
    if kcin != cin:
        raise DimensionError(f"conv2d channel mismatch: input {x.shape} vs kernels {kernels.shape}")
    if stride < 1 or padding < 0:
        raise ContractError(f"conv2d needs stride >= 1 and padding >= 0, got {stride}, {padding}")
    if kh > h + 2 * padding or kw > w + 2 * padding:
        raise DimensionError(
            f"conv2d kernel {kernels.shape} larger than padded input {x.shape} (padding {padding})"
        )
    # output rank mirrors input rank; a bare HW input keeps a channel axis
    # only when there is more than one kernel
    out_added = 2 if (squeeze == 2 and cout == 1) else min(squeeze, 1)

    def run():
        xd, _ = _as_nchw(x)
        y = _kernels.conv2d_forward(xd, kernels.data, stride, padding)
        return _drop_dims(y, out_added)

    def backward(g):
        xd, _ = _as_nchw(x)
        gy = np.ascontiguousarray(g.reshape((1,) * out_added + g.shape))
        gx, gk = _kernels.conv2d_backward(xd, kernels.data, gy, stride, padding)
        x._accum(_drop_dims(gx, squeeze))
        kernels._accum(gk)

    return _make(run(), (x, kernels), "conv2d", backward, run)


def maxpool2d(x, window: int, stride: int | None = None) -> Tensor:
    """Per-window maximum over HW/CHW/NCHW input; ties go to the first index."""
    x = as_tensor(x)
    if stride is None:
        stride = window
    xd, squeeze = _as_nchw(x)
    if xd.ndim != 4:
        raise DimensionError(f"maxpool2d expects HW/CHW/NCHW input, got {x.shape}")
    h, w = xd.shape[2], xd.shape[3]
    if window < 1 or stride < 1:
        raise ContractError(f"maxpool2d needs window/stride >= 1, got {window}, {stride}")
    if window > h or window > w:
        raise DimensionError(f"maxpool2d window {window} exceeds spatial size of {x.shape}")

    y, arg = _kernels.maxpool_forward(xd, window, stride)

    def run():
        xd, _ = _as_nchw(x)
        y, _arg = _kernels.maxpool_forward(xd, window, stride)
        return _drop_dims(y, squeeze)

    def backward(g, arg=arg):
        gy = np.ascontiguousarray(g.reshape((1,) * squeeze + g.shape))
        gx = _kernels.maxpool_backward(gy, arg, h, w)
        x._accum(_drop_dims(gx, squeeze))

    return _make(_drop_dims(y, squeeze), (x,), "maxpool2d", backward, run)


# -- verification ----------------------------------------------------------


def finite_difference_check(f, params, eps: float = 1e-3) -> float:
    """Compare ``backward`` gradients of the scalar ``f()`` against central differences.

    Returns the maximum elementwise relative error, with denominator
    max(|analytic|, |numeric|, 1e-8).
    """
    if eps <= 0:
        raise ContractError(f"finite_difference_check needs eps > 0, got {eps}")
    loss = f()
    loss.backward(leaves=params)
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, ga in zip(params, analytic):
        flat = p.data.reshape(-1)
        gflat = ga.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            with no_grad():
                flat[i] = keep + eps
                hi = float(f().data)
                flat[i] = keep - eps
                lo = float(f().data)
            flat[i] = keep
            num = (hi - lo) / (2.0 * eps)
            err = abs(gflat[i] - num) / max(abs(gflat[i]), abs(num), 1e-8)
            worst = max(worst, err)
    return worst

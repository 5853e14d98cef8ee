"""Differentiable primitives.

Each primitive carries three rules:

- ``primal(*xs)``: the value.
- ``tangent(xs, dxs, out, lead)``: the pushforward. ``dxs[i]`` is ``None`` for a zero
  tangent, otherwise an array of shape ``lead_shape + xs[i].shape`` where ``lead`` leading
  axes index independent tangent directions (0 for a plain jvp, 1 for ``jvp_batch``).
- ``adjoint(xs, out, g)``: the pullback, one cotangent (or ``None``) per input.

All operands are float64 numpy arrays; reductions are numpy's fixed-order reductions.
"""
from abc import ABC, abstractmethod
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

Array = np.ndarray
MaybeArray = Optional[np.ndarray]

GELU_K = np.sqrt(2.0 / np.pi)
GELU_C = 0.044715


def expand_tangent(dx: Array, out_ndim: int, lead: int) -> Array:
    """Insert singleton axes after the lead axes so ``dx`` broadcasts to ``out_ndim``."""
    x_ndim = dx.ndim - lead
    if x_ndim >= out_ndim:
        return dx
    return dx.reshape(dx.shape[:lead] + (1,) * (out_ndim - x_ndim) + dx.shape[lead:])


def full_tangent(dx: Array, out_shape: tuple, lead: int) -> Array:
    expanded = expand_tangent(dx, len(out_shape), lead)
    return np.broadcast_to(expanded, expanded.shape[:lead] + tuple(out_shape)).copy()


def unbroadcast(g: Array, shape: tuple) -> Array:
    """Sum ``g`` down to ``shape`` (the adjoint of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


class Primitive(ABC):
    name: str = ""

    @abstractmethod
    def primal(self, *xs: Array) -> Array:
        pass

    @abstractmethod
    def tangent(self, xs: Sequence[Array], dxs: Sequence[MaybeArray], out: Array, lead: int) -> MaybeArray:
        pass

    @abstractmethod
    def adjoint(self, xs: Sequence[Array], out: Array, g: Array) -> Tuple[MaybeArray, ...]:
        pass


class MatMul(Primitive):
    name = "matmul"

    def primal(self, a, b):
        return a @ b

    def tangent(self, xs, dxs, out, lead):
        a, b = xs
        da, db = dxs
        result = None
        if da is not None:
            result = da @ b
        if db is not None:
            term = a @ db
            result = term if result is None else result + term
        return result

    def adjoint(self, xs, out, g):
        a, b = xs
        return g @ np.swapaxes(b, -1, -2), np.swapaxes(a, -1, -2) @ g


class Transpose(Primitive):
    name = "transpose"

    def primal(self, a):
        return np.swapaxes(a, -1, -2)

    def tangent(self, xs, dxs, out, lead):
        (da,) = dxs
        return None if da is None else np.swapaxes(da, -1, -2)

    def adjoint(self, xs, out, g):
        return (np.swapaxes(g, -1, -2),)


class Add(Primitive):
    name = "add"

    def primal(self, a, b):
        return a + b

    def tangent(self, xs, dxs, out, lead):
        da, db = dxs
        if da is None and db is None:
            return None
        if db is None:
            return full_tangent(da, out.shape, lead)
        if da is None:
            return full_tangent(db, out.shape, lead)
        return expand_tangent(da, out.ndim, lead) + expand_tangent(db, out.ndim, lead)

    def adjoint(self, xs, out, g):
        a, b = xs
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)


class Mul(Primitive):
    name = "mul"

    def primal(self, a, b):
        return a * b

    def tangent(self, xs, dxs, out, lead):
        a, b = xs
        da, db = dxs
        result = None
        if da is not None:
            result = expand_tangent(da, out.ndim, lead) * b
        if db is not None:
            term = a * expand_tangent(db, out.ndim, lead)
            result = term if result is None else result + term
        if result is not None and result.shape[lead:] != out.shape:
            result = np.broadcast_to(result, result.shape[:lead] + out.shape).copy()
        return result

    def adjoint(self, xs, out, g):
        a, b = xs
        return unbroadcast(g * b, a.shape), unbroadcast(g * a, b.shape)


class Scale(Primitive):
    """Multiplication by a Python float, passed as a 0-d array."""
    name = "scale"

    def primal(self, a, c):
        return a * c

    def tangent(self, xs, dxs, out, lead):
        _, c = xs
        (da, _) = dxs
        return None if da is None else da * c

    def adjoint(self, xs, out, g):
        _, c = xs
        return g * c, None


class Tanh(Primitive):
    name = "tanh"

    def primal(self, a):
        return np.tanh(a)

    def tangent(self, xs, dxs, out, lead):
        (da,) = dxs
        return None if da is None else da * (1.0 - out * out)

    def adjoint(self, xs, out, g):
        return (g * (1.0 - out * out),)


class ReLU(Primitive):
    name = "relu"

    def primal(self, a):
        return np.maximum(a, 0.0)

    def tangent(self, xs, dxs, out, lead):
        (a,) = xs
        (da,) = dxs
        return None if da is None else da * (a > 0.0)

    def adjoint(self, xs, out, g):
        (a,) = xs
        return (g * (a > 0.0),)


class GELU(Primitive):
    """tanh approximation of GELU."""
    name = "gelu"

    @staticmethod
    def _derivative(a):
        t = np.tanh(GELU_K * (a + GELU_C * a ** 3))
        return 0.5 * (1.0 + t) + 0.5 * a * (1.0 - t * t) * GELU_K * (1.0 + 3.0 * GELU_C * a * a)

    def primal(self, a):
        return 0.5 * a * (1.0 + np.tanh(GELU_K * (a + GELU_C * a ** 3)))

    def tangent(self, xs, dxs, out, lead):
        (a,) = xs
        (da,) = dxs
        return None if da is None else da * self._derivative(a)

    def adjoint(self, xs, out, g):
        (a,) = xs
        return (g * self._derivative(a),)


class SoftmaxCrossEntropy(Primitive):
    """Per-sample cross entropy of ``logits`` (n, C) against integer ``labels`` (n,)."""
    name = "softmax_cross_entropy"

    @staticmethod
    def _residual(logits, labels):
        shifted = logits - logits.max(axis=-1, keepdims=True)
        exp = np.exp(shifted)
        probs = exp / exp.sum(axis=-1, keepdims=True)
        onehot = np.zeros_like(logits)
        onehot[np.arange(logits.shape[0]), labels.astype(np.int64)] = 1.0
        return probs - onehot

    def primal(self, logits, labels):
        peak = logits.max(axis=-1, keepdims=True)
        lse = peak[:, 0] + np.log(np.exp(logits - peak).sum(axis=-1))
        picked = logits[np.arange(logits.shape[0]), labels.astype(np.int64)]
        return lse - picked

    def tangent(self, xs, dxs, out, lead):
        logits, labels = xs
        (dlogits, _) = dxs
        if dlogits is None:
            return None
        return (dlogits * self._residual(logits, labels)).sum(axis=-1)

    def adjoint(self, xs, out, g):
        logits, labels = xs
        return g[:, None] * self._residual(logits, labels), None


class Mean(Primitive):
    name = "mean"

    def primal(self, a):
        return np.asarray(a.mean())

    def tangent(self, xs, dxs, out, lead):
        (da,) = dxs
        if da is None:
            return None
        return da.reshape(da.shape[:lead] + (-1,)).mean(axis=-1)

    def adjoint(self, xs, out, g):
        (a,) = xs
        return (np.full(a.shape, float(g) / a.size),)


class Sum(Primitive):
    name = "sum"

    def primal(self, a):
        return np.asarray(a.sum())

    def tangent(self, xs, dxs, out, lead):
        (da,) = dxs
        if da is None:
            return None
        return da.reshape(da.shape[:lead] + (-1,)).sum(axis=-1)

    def adjoint(self, xs, out, g):
        (a,) = xs
        return (np.full(a.shape, float(g)),)


PRIMITIVES: Dict[str, Primitive] = {
    p.name: p for p in (
        MatMul(), Transpose(), Add(), Mul(), Scale(), Tanh(), ReLU(), GELU(),
        SoftmaxCrossEntropy(), Mean(), Sum(),
    )
}

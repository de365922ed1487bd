"""A small reverse-mode autodiff tape over numpy arrays.

Only the primitives the discriminator needs are provided. Nodes are appended
in evaluation order, so walking the node list backwards is a valid reverse
topological order. A tape may be swept once.
"""
from __future__ import annotations

import numpy as np

from .exceptions import TapeStateError


class Var:
    """A value recorded on a tape."""

    __slots__ = ("tape", "index", "value")

    def __init__(self, tape, index, value):
        self.tape = tape
        self.index = index
        self.value = value

    @property
    def shape(self):
        return self.value.shape

    def __add__(self, other):
        return self.tape.add(self, other)

    def __mul__(self, other):
        return self.tape.mul(self, other)

    def __matmul__(self, other):
        return self.tape.matmul(self, other)


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tape:
    def __init__(self):
        self._values = []
        self._parents = []  # tuple of parent indices per node
        self._backward = []  # fn(adjoint) -> tuple of parent adjoints
        self.consumed = False

    def __len__(self):
        return len(self._values)

    def _record(self, value, parents=(), backward=None):
        if self.consumed:
            raise TapeStateError("tape already swept; record a fresh forward pass")
        var = Var(self, len(self._values), value)
        self._values.append(value)
        self._parents.append(tuple(p.index for p in parents))
        self._backward.append(backward)
        return var

    def leaf(self, value):
        return self._record(np.asarray(value, dtype=float))

    def matmul(self, a, b):
        av, bv = a.value, b.value
        return self._record(av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))

    def add(self, a, b):
        sa, sb = a.value.shape, b.value.shape
        return self._record(
            a.value + b.value,
            (a, b),
            lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)),
        )

    def mul(self, a, b):
        av, bv = a.value, b.value
        return self._record(
            av * bv,
            (a, b),
            lambda g: (_unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)),
        )

    def scale(self, a, const):
        """Multiply by a constant array (used for dropout masks)."""
        const = np.asarray(const, dtype=float)
        return self._record(a.value * const, (a,), lambda g: (g * const,))

    def sigmoid(self, a):
        x = a.value
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        return self._record(out, (a,), lambda g: (g * out * (1.0 - out),))

    def tanh(self, a):
        out = np.tanh(a.value)
        return self._record(out, (a,), lambda g: (g * (1.0 - out * out),))

    def concat(self, parts, axis=-1):
        sizes = [p.value.shape[axis] for p in parts]
        cuts = np.cumsum(sizes)[:-1]

        def back(g):
            return tuple(np.split(g, cuts, axis=axis))

        return self._record(np.concatenate([p.value for p in parts], axis=axis), parts, back)

    def columns(self, a, start, stop):
        """Slice ``a[:, start:stop]``."""
        shape = a.value.shape

        def back(g):
            full = np.zeros(shape)
            full[:, start:stop] = g
            return (full,)

        return self._record(a.value[:, start:stop], (a,), back)

    def backward(self, output, seed=1.0):
        """Reverse sweep from ``output``; returns adjoints indexed by node.

        ``seed`` is the adjoint of ``output`` (scalar or array of its shape).
        Use :meth:`grad` on the returned list to read leaf gradients.
        """
        if self.consumed:
            raise TapeStateError("tape already swept; record a fresh forward pass")
        self.consumed = True
        adj = [None] * len(self._values)
        adj[output.index] = np.broadcast_to(
            np.asarray(seed, dtype=float), output.value.shape
        ).copy()
        for i in range(output.index, -1, -1):
            g = adj[i]
            back = self._backward[i]
            if g is None or back is None:
                continue
            for parent, pg in zip(self._parents[i], back(g)):
                if adj[parent] is None:
                    adj[parent] = np.array(pg, dtype=float)
                else:
                    adj[parent] += pg
        return Adjoints(adj)


class Adjoints:
    def __init__(self, adj):
        self._adj = adj

    def __getitem__(self, var):
        g = self._adj[var.index]
        return np.zeros_like(var.value) if g is None else g

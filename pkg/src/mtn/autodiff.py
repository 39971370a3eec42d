"""Reverse-mode automatic differentiation over dense float64 arrays.

Values are 2-d numpy arrays: column vectors are (n, 1), scalars (1, 1).
While a Tape is active (``with Tape() as tape:``) every primitive records
itself; ``backward(loss)`` replays the tape in reverse and ACCUMULATES
gradients into ``.grad`` of every requires_grad leaf it reaches. Repeated
backward calls without zeroing keep accumulating, which is what batchwise
manual gradient accumulation relies on.

The primitive set is closed: the tree encoder and both task heads are built
from nothing but the operations in this module. ``affine``/``affine2`` are
fused matmul+add forms (one tape record instead of three) and
``cross_entropy``/``cosine_similarity`` are the two head-level primitives;
the listed elementary set cannot express log/exp/sqrt, so the heads get
dedicated analytic gradients instead.
"""
from __future__ import annotations

import math
import threading

import numpy as np
from scipy.special import expit


class ShapeMismatch(Exception):
    def __init__(self, primitive: str, got, expected):
        super().__init__(f"{primitive}: got shapes {got}, expected {expected}")
        self.primitive = primitive
        self.got = got
        self.expected = expected


class NotScalar(Exception):
    pass


class DetachedFromTape(Exception):
    pass


class NonFiniteValue(Exception):
    def __init__(self, where: str):
        super().__init__(f"non-finite value in {where}")
        self.where = where


class NonFiniteLogits(Exception):
    pass


class DegenerateVector(Exception):
    """Cosine similarity input with near-zero norm (collapsed encoder)."""


class Tensor:
    """A float64 matrix/vector with optional gradient and tape linkage."""

    __slots__ = ("data", "requires_grad", "grad", "_adj", "_tape")

    def __init__(self, data, requires_grad: bool = False):
        a = np.asarray(data, dtype=np.float64)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        elif a.ndim == 0:
            a = a.reshape(1, 1)
        elif a.ndim != 2:
            raise ShapeMismatch("tensor", a.shape, "(rows, cols)")
        self.data = a
        self.requires_grad = requires_grad
        self.grad = None
        self._adj = None
        self._tape = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def zero_grad(self) -> None:
        self.grad = None

    def item(self) -> float:
        if self.data.shape != (1, 1):
            raise NotScalar(f"item() on shape {self.data.shape}")
        return float(self.data[0, 0])

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def tensor(data, requires_grad: bool = False) -> Tensor:
    return Tensor(data, requires_grad)


def zeros(rows: int, cols: int = 1, requires_grad: bool = False) -> Tensor:
    return Tensor(np.zeros((rows, cols)), requires_grad)


_TLS = threading.local()

# Opcodes for the tape records.
_ADD, _SUB, _MUL, _MATMUL, _CONCAT, _TANH, _SIGMOID, _MAX, _SUMOF, \
    _SCALE, _RSUM, _AFFINE, _AFFINE2, _EMBED, _XENT, _COSINE = range(16)


class Tape:
    """Ordered record of primitive applications; one per example."""

    __slots__ = ("_records",)

    def __init__(self):
        self._records: list = []

    def __len__(self) -> int:
        return len(self._records)

    def __enter__(self) -> "Tape":
        stack = getattr(_TLS, "stack", None)
        if stack is None:
            stack = _TLS.stack = []
        stack.append(self)
        _TLS.tape = self
        return self

    def __exit__(self, *exc) -> None:
        stack = _TLS.stack
        stack.pop()
        _TLS.tape = stack[-1] if stack else None


def active_tape() -> Tape | None:
    return getattr(_TLS, "tape", None)


# --- primitives -----------------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeMismatch("add", (a.data.shape, b.data.shape), "equal shapes")
    out = Tensor(a.data + b.data)
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_ADD, out, (a, b), None))
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeMismatch("sub", (a.data.shape, b.data.shape), "equal shapes")
    out = Tensor(a.data - b.data)
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_SUB, out, (a, b), None))
    return out


def mul_elem(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeMismatch("mul_elem", (a.data.shape, b.data.shape),
                            "equal shapes")
    out = Tensor(a.data * b.data)
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_MUL, out, (a, b), None))
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeMismatch("matmul", (a.data.shape, b.data.shape),
                            "(m,k) @ (k,n)")
    out = Tensor(a.data @ b.data)
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_MATMUL, out, (a, b), None))
    return out


def concat_rows(parts) -> Tensor:
    parts = tuple(parts)
    if not parts:
        raise ShapeMismatch("concat_rows", (), "at least one input")
    cols = parts[0].data.shape[1]
    for p in parts:
        if p.data.shape[1] != cols:
            raise ShapeMismatch("concat_rows",
                                [p.data.shape for p in parts],
                                "equal column counts")
    out = Tensor(np.concatenate([p.data for p in parts], axis=0))
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        sizes = tuple(p.data.shape[0] for p in parts)
        tape._records.append((_CONCAT, out, parts, sizes))
    return out


def tanh(a: Tensor) -> Tensor:
    out = Tensor(np.tanh(a.data))
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_TANH, out, (a,), None))
    return out


def sigmoid(a: Tensor) -> Tensor:
    out = Tensor(expit(a.data))
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_SIGMOID, out, (a,), None))
    return out


def elementwise_max(a: Tensor, b: Tensor) -> Tensor:
    """Per-component max; gradient routes to the argmax, ties to ``a``."""
    if a.data.shape != b.data.shape:
        raise ShapeMismatch("elementwise_max", (a.data.shape, b.data.shape),
                            "equal shapes")
    mask = a.data >= b.data
    out = Tensor(np.where(mask, a.data, b.data))
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_MAX, out, (a, b), mask))
    return out


def sum_of(parts) -> Tensor:
    """Elementwise sum of one or more same-shaped tensors.

    For three or more operands the summation order is canonicalized by
    sorting per component, so permuting the operands cannot change the
    result even at the bit level (child-sum order insensitivity).
    """
    parts = tuple(parts)
    if not parts:
        raise ShapeMismatch("sum_of", (), "at least one input")
    shape = parts[0].data.shape
    for p in parts:
        if p.data.shape != shape:
            raise ShapeMismatch("sum_of", [p.data.shape for p in parts],
                                "equal shapes")
    if len(parts) == 1:
        data = parts[0].data.copy()
    elif len(parts) == 2:
        data = parts[0].data + parts[1].data
    else:
        stacked = np.stack([p.data for p in parts], axis=0)
        stacked.sort(axis=0)
        data = stacked.sum(axis=0)
    out = Tensor(data)
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_SUMOF, out, parts, None))
    return out


def scalar_scale(a: Tensor, s: float) -> Tensor:
    out = Tensor(a.data * s)
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_SCALE, out, (a,), s))
    return out


def reduce_sum(a: Tensor) -> Tensor:
    """Sum of all components, as a (1, 1) scalar."""
    out = Tensor(np.array([[a.data.sum()]]))
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_RSUM, out, (a,), None))
    return out


def affine(w: Tensor, x: Tensor, b: Tensor) -> Tensor:
    """Fused w @ x + b."""
    if w.data.shape[1] != x.data.shape[0]:
        raise ShapeMismatch("affine", (w.data.shape, x.data.shape),
                            "(m,k) @ (k,n)")
    out_data = w.data @ x.data
    if b.data.shape != out_data.shape:
        raise ShapeMismatch("affine", b.data.shape, out_data.shape)
    out = Tensor(out_data + b.data)
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_AFFINE, out, (w, x, b), None))
    return out


def affine2(w: Tensor, x: Tensor, u: Tensor, h: Tensor, b: Tensor) -> Tensor:
    """Fused w @ x + u @ h + b (one gate pre-activation)."""
    if w.data.shape[1] != x.data.shape[0] or u.data.shape[1] != h.data.shape[0]:
        raise ShapeMismatch(
            "affine2", (w.data.shape, x.data.shape, u.data.shape, h.data.shape),
            "(m,k) @ (k,n) + (m,j) @ (j,n)")
    out_data = w.data @ x.data + u.data @ h.data
    if b.data.shape != out_data.shape:
        raise ShapeMismatch("affine2", b.data.shape, out_data.shape)
    out = Tensor(out_data + b.data)
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_AFFINE2, out, (w, x, u, h, b), None))
    return out


def embed_row(table: Tensor, index: int) -> Tensor:
    """Row ``index`` of an embedding table, as a column vector."""
    rows = table.data.shape[0]
    if not 0 <= index < rows:
        raise ShapeMismatch("embed_row", index, f"0..{rows - 1}")
    out = Tensor(table.data[index].reshape(-1, 1).copy())
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_EMBED, out, (table,), index))
    return out


def cross_entropy(logits: Tensor, label: int) -> Tensor:
    """Stable -log softmax(logits)[label], as a (1, 1) scalar."""
    z = logits.data
    if z.shape[1] != 1 or z.shape[0] < 2:
        raise ShapeMismatch("cross_entropy", z.shape, "(M,1) with M >= 2")
    if not 0 <= label < z.shape[0]:
        raise ValueError(f"label {label} out of range for {z.shape[0]} classes")
    if not np.all(np.isfinite(z)):
        raise NonFiniteLogits(f"logits contain non-finite values")
    m = z.max()
    shifted = z - m
    ez = np.exp(shifted)
    total = ez.sum()
    loss = math.log(total) + m - z[label, 0]
    out = Tensor(np.array([[loss]]))
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_XENT, out, (logits,), (ez / total, label)))
    return out


def cosine_similarity(a: Tensor, b: Tensor) -> Tensor:
    """Cosine of two nonzero vectors, as a (1, 1) scalar in [-1, 1]."""
    if a.data.shape != b.data.shape or a.data.shape[1] != 1:
        raise ShapeMismatch("cosine_similarity",
                            (a.data.shape, b.data.shape),
                            "equal (n,1) shapes")
    av = a.data[:, 0]
    bv = b.data[:, 0]
    na = math.sqrt(av @ av)
    nb = math.sqrt(bv @ bv)
    if na < 1e-12 or nb < 1e-12:
        raise DegenerateVector(f"vector norms {na:.3e}, {nb:.3e}")
    y = (av @ bv) / (na * nb)
    out = Tensor(np.array([[y]]))
    tape = getattr(_TLS, "tape", None)
    if tape is not None:
        out._tape = tape
        tape._records.append((_COSINE, out, (a, b), (na, nb, y)))
    return out


# --- backward -------------------------------------------------------------


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    # Intermediates carry their adjoint in _adj; requires_grad leaves
    # accumulate into .grad. _adj is never mutated in place because the
    # same array object may be routed to several inputs.
    if t._tape is not None:
        t._adj = g if t._adj is None else t._adj + g
    elif t.requires_grad:
        if t.grad is None:
            t.grad = g.copy()
        else:
            t.grad += g


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into every reachable requires_grad leaf."""
    if loss.data.shape != (1, 1):
        raise NotScalar(f"backward on shape {loss.data.shape}")
    tape = loss._tape
    if tape is None:
        raise DetachedFromTape("loss was not recorded on a tape")
    loss._adj = np.ones((1, 1))
    records = tape._records
    acc = _accumulate
    for i in range(len(records) - 1, -1, -1):
        op, out, ins, aux = records[i]
        g = out._adj
        if g is None:
            continue
        out._adj = None
        if op == _AFFINE2:
            w, x, u, h, b = ins
            acc(w, g @ x.data.T)
            acc(x, w.data.T @ g)
            acc(u, g @ h.data.T)
            acc(h, u.data.T @ g)
            acc(b, g)
        elif op == _AFFINE:
            w, x, b = ins
            acc(w, g @ x.data.T)
            acc(x, w.data.T @ g)
            acc(b, g)
        elif op == _SIGMOID:
            y = out.data
            acc(ins[0], g * (y * (1.0 - y)))
        elif op == _TANH:
            y = out.data
            acc(ins[0], g * (1.0 - y * y))
        elif op == _MUL:
            a, b = ins
            acc(a, g * b.data)
            acc(b, g * a.data)
        elif op == _ADD:
            acc(ins[0], g)
            acc(ins[1], g)
        elif op == _SUMOF:
            for t in ins:
                acc(t, g)
        elif op == _EMBED:
            table = ins[0]
            if table._tape is not None or table.requires_grad:
                gt = np.zeros_like(table.data)
                gt[aux, :] = g[:, 0]
                acc(table, gt)
        elif op == _MATMUL:
            a, b = ins
            acc(a, g @ b.data.T)
            acc(b, a.data.T @ g)
        elif op == _CONCAT:
            offset = 0
            for t, size in zip(ins, aux):
                acc(t, g[offset:offset + size])
                offset += size
        elif op == _MAX:
            a, b = ins
            acc(a, g * aux)
            acc(b, g * ~aux)
        elif op == _SUB:
            acc(ins[0], g)
            acc(ins[1], -g)
        elif op == _SCALE:
            acc(ins[0], g * aux)
        elif op == _RSUM:
            acc(ins[0], np.full_like(ins[0].data, g[0, 0]))
        elif op == _XENT:
            p, label = aux
            gl = p.copy()
            gl[label, 0] -= 1.0
            acc(ins[0], g[0, 0] * gl)
        elif op == _COSINE:
            a, b = ins
            na, nb, y = aux
            gs = g[0, 0]
            acc(a, gs * (b.data / (na * nb) - (y / (na * na)) * a.data))
            acc(b, gs * (a.data / (na * nb) - (y / (nb * nb)) * b.data))
        else:  # pragma: no cover
            raise AssertionError(f"unknown opcode {op}")


# --- verification ---------------------------------------------------------


def grad_check(f, inputs, eps: float = 1e-5, tol: float | None = None) -> float:
    """Max relative error between tape gradients and central differences.

    ``f`` must map the given Tensors to a scalar Tensor. Each input
    component is perturbed by +-eps; the relative error per component is
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-8). When ``tol``
    is given a ValueError is raised if the worst error exceeds it.

    Inputs sitting on a subgradient point (e.g. an exact tie inside
    elementwise_max) are outside this check's domain: the central
    difference straddles the kink and may disagree arbitrarily.
    """
    inputs = list(inputs)
    for t in inputs:
        t.grad = None
    with Tape():
        y = f(*inputs)
        if y.data.shape != (1, 1):
            raise NotScalar(f"grad_check function returned {y.data.shape}")
        if not math.isfinite(y.data[0, 0]):
            raise NonFiniteValue("grad_check: f(inputs)")
        backward(y)
    worst = 0.0
    for t in inputs:
        analytic = t.grad if t.grad is not None else np.zeros_like(t.data)
        analytic = analytic.reshape(-1)
        flat = t.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            y_plus = f(*inputs).data[0, 0]
            flat[i] = orig - eps
            y_minus = f(*inputs).data[0, 0]
            flat[i] = orig
            if not (math.isfinite(y_plus) and math.isfinite(y_minus)):
                raise NonFiniteValue(f"grad_check: perturbed component {i}")
            numeric = (y_plus - y_minus) / (2.0 * eps)
            a = analytic[i]
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            if err > worst:
                worst = err
    if tol is not None and worst > tol:
        raise ValueError(f"gradient check failed: {worst:.3e} > {tol:.3e}")
    return worst

"""Reverse-mode automatic differentiation over dense tensors.

Define-by-run: every forward pass records primitive applications on a
Tape in topological order; backward replays the tape in exact reverse
recording order and accumulates vector-Jacobian products additively
into each Variable's grad. An independent central-difference checker
(fd_check) is the oracle for every backward rule.

Conventions:
  * only scalar (single-element) broadcast in binary ops; the gradient
    for a broadcast scalar operand is the sum over the output,
  * at non-differentiable points the left-continuous subgradient is
    used (ties in `maximum` send the gradient to the second operand,
    so maximum(x, 0) has zero slope at x = 0),
  * replaying backward twice without a grad reset doubles every grad.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _normal, tensor
from .tensor import Tensor


class TapeMixError(ValueError):
    """An operation mixed Variables registered on different Tapes."""


class Variable:
    """Autodiff node: a value Tensor plus an accumulated gradient Tensor."""

    __slots__ = ("value", "grad", "tape", "node_id", "requires_grad", "name")

    def __init__(self, value: Tensor, tape: "Tape", node_id: int,
                 requires_grad: bool, name: str | None = None):
        self.value = value
        self.grad = Tensor._wrap(np.zeros(value.shape))
        self.tape = tape
        self.node_id = node_id
        self.requires_grad = requires_grad
        self.name = name

    def _accumulate(self, g: np.ndarray) -> None:
        self.grad = Tensor._wrap(self.grad.data + g)

    def zero_grad(self) -> None:
        self.grad = Tensor._wrap(np.zeros(self.value.shape))

    def __repr__(self) -> str:
        tag = f" {self.name!r}" if self.name else ""
        return f"Variable(#{self.node_id}{tag}, shape={self.value.shape}, requires_grad={self.requires_grad})"

    # Arithmetic sugar; everything funnels through the module-level ops.
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)


@dataclass
class _Entry:
    out: Variable
    inputs: tuple[Variable, ...]
    vjps: tuple  # one callable (np.ndarray -> np.ndarray) or None per input


class Tape:
    """Ordered record of primitive applications for one forward pass."""

    def __init__(self):
        self._entries: list[_Entry] = []
        self._next_id = 0

    def _new_variable(self, value: Tensor, requires_grad: bool, name=None) -> Variable:
        var = Variable(value, self, self._next_id, requires_grad, name)
        self._next_id += 1
        return var

    def variable(self, value, requires_grad: bool = False, name: str | None = None) -> Variable:
        value = value if isinstance(value, Tensor) else Tensor(value)
        return self._new_variable(value, requires_grad, name)

    def constant(self, value) -> Variable:
        if isinstance(value, (int, float)):
            value = tensor.full((1,), float(value))
        return self.variable(value, requires_grad=False)

    def __len__(self) -> int:
        return len(self._entries)


def record(tape: Tape, op: str, inputs: tuple[Variable, ...], forward: Tensor,
           vjps: tuple) -> Variable:
    """Append one primitive application; returns the output Variable.

    `vjps[i]` maps the upstream gradient to the contribution for
    `inputs[i]` (already reduced to that input's shape); None marks a
    gradient-blocking path.
    """
    for v in inputs:
        if v.tape is not tape:
            raise TapeMixError(f"op {op!r} mixes Variables from different tapes")
    requires = any(v.requires_grad for v in inputs)
    out = tape._new_variable(forward, requires, name=op)
    if requires:
        tape._entries.append(_Entry(out, tuple(inputs), tuple(vjps)))
    return out


def backward(loss: Variable) -> None:
    """Accumulate d(loss)/d(var) into every requires-grad Variable's grad."""
    if loss.value.size != 1:
        raise ValueError(f"loss must be scalar, got shape {loss.value.shape}")
    adjoint: dict[int, np.ndarray] = {loss.node_id: np.ones(loss.value.shape)}
    holders: dict[int, Variable] = {loss.node_id: loss}
    for entry in reversed(loss.tape._entries):
        g = adjoint.pop(entry.out.node_id, None)
        holders.pop(entry.out.node_id, None)
        if g is None:
            continue
        if entry.out.requires_grad:
            entry.out._accumulate(g)
        for var, vjp in zip(entry.inputs, entry.vjps):
            if vjp is None or not var.requires_grad:
                continue
            contrib = vjp(g)
            nid = var.node_id
            if nid in adjoint:
                adjoint[nid] = adjoint[nid] + contrib
            else:
                adjoint[nid] = contrib
                holders[nid] = var
    # Whatever remains belongs to leaves (Variables no entry produced).
    for nid, g in adjoint.items():
        var = holders[nid]
        if var.requires_grad:
            var._accumulate(g)


# ---------------------------------------------------------------------------
# Operand coercion and broadcast helpers.
# ---------------------------------------------------------------------------

def _as_variable(x, tape: Tape) -> Variable:
    if isinstance(x, Variable):
        return x
    return tape.constant(x)


def _binary_operands(a, b) -> tuple[Variable, Variable]:
    if isinstance(a, Variable):
        tape = a.tape
    elif isinstance(b, Variable):
        tape = b.tape
    else:
        raise TypeError("at least one operand must be a Variable")
    return _as_variable(a, tape), _as_variable(b, tape)


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    if int(np.prod(shape)) == 1:
        # Only scalar broadcast exists, so the adjoint is the total sum.
        return np.asarray(g, dtype=np.float64).sum().reshape(shape)
    raise tensor.ShapeError(f"cannot reduce gradient of shape {g.shape} to {shape}")


# ---------------------------------------------------------------------------
# Primitive operations.
# ---------------------------------------------------------------------------

def add(a, b) -> Variable:
    a, b = _binary_operands(a, b)
    out = tensor.ewise("add", a.value, b.value)
    return record(a.tape, "add", (a, b), out, (
        lambda g: _unbroadcast(g, a.value.shape),
        lambda g: _unbroadcast(g, b.value.shape),
    ))


def sub(a, b) -> Variable:
    a, b = _binary_operands(a, b)
    out = tensor.ewise("sub", a.value, b.value)
    return record(a.tape, "sub", (a, b), out, (
        lambda g: _unbroadcast(g, a.value.shape),
        lambda g: _unbroadcast(-g, b.value.shape),
    ))


def mul(a, b) -> Variable:
    a, b = _binary_operands(a, b)
    out = tensor.ewise("mul", a.value, b.value)
    ad, bd = a.value.data, b.value.data
    return record(a.tape, "mul", (a, b), out, (
        lambda g: _unbroadcast(g * bd, a.value.shape),
        lambda g: _unbroadcast(g * ad, b.value.shape),
    ))


def div(a, b) -> Variable:
    a, b = _binary_operands(a, b)
    out = tensor.ewise("div", a.value, b.value)
    ad, bd = a.value.data, b.value.data
    return record(a.tape, "div", (a, b), out, (
        lambda g: _unbroadcast(g / bd, a.value.shape),
        lambda g: _unbroadcast(-g * ad / (bd * bd), b.value.shape),
    ))


def maximum(a, b) -> Variable:
    """Elementwise max; ties route the gradient to the second operand."""
    a, b = _binary_operands(a, b)
    out = tensor.ewise("max", a.value, b.value)
    mask = a.value.data > b.value.data
    return record(a.tape, "maximum", (a, b), out, (
        lambda g: _unbroadcast(g * mask, a.value.shape),
        lambda g: _unbroadcast(g * (~mask), b.value.shape),
    ))


def neg(a) -> Variable:
    out = Tensor._wrap(-a.value.data)
    return record(a.tape, "neg", (a,), out, (lambda g: -g,))


def exp(a) -> Variable:
    with np.errstate(over="ignore"):
        out = Tensor._wrap(np.exp(a.value.data))  # overflow -> finiteness error
    od = out.data
    return record(a.tape, "exp", (a,), out, (lambda g: g * od,))


def log(a) -> Variable:
    if np.any(a.value.data <= 0.0):
        raise ValueError("log needs strictly positive inputs")
    out = Tensor._wrap(np.log(a.value.data))
    ad = a.value.data
    return record(a.tape, "log", (a,), out, (lambda g: g / ad,))


def sqrt(a) -> Variable:
    if np.any(a.value.data < 0.0):
        raise ValueError("sqrt needs non-negative inputs")
    out = Tensor._wrap(np.sqrt(a.value.data))
    od = out.data

    def vjp(g):
        # 0 upstream stays 0 even at the root's singular point.
        return np.where(g == 0.0, 0.0, g / np.maximum(2.0 * od, 1e-300))

    return record(a.tape, "sqrt", (a,), out, (vjp,))


def sigmoid(a) -> Variable:
    """Logistic 1/(1+e^-x), overflow-free for the whole float64 range."""
    x = a.value.data
    t = np.exp(-np.abs(x))
    s = np.where(x >= 0.0, 1.0 / (1.0 + t), t / (1.0 + t))
    out = Tensor._wrap(s)
    return record(a.tape, "sigmoid", (a,), out, (lambda g: g * s * (1.0 - s),))


def tanh(a) -> Variable:
    th = np.tanh(a.value.data)
    out = Tensor._wrap(th)
    return record(a.tape, "tanh", (a,), out, (lambda g: g * (1.0 - th * th),))


def softplus(a) -> Variable:
    """ln(1+e^x) in the overflow-free max(x,0)+log1p(e^-|x|) form."""
    x = a.value.data
    out = Tensor._wrap(np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x))))
    t = np.exp(-np.abs(x))
    s = np.where(x >= 0.0, 1.0 / (1.0 + t), t / (1.0 + t))
    return record(a.tape, "softplus", (a,), out, (lambda g: g * s,))


def gauss_cdf(a) -> Variable:
    """Standard normal CDF, with the density as its derivative."""
    x = a.value.data
    out = Tensor._wrap(_normal.norm_cdf(x))
    return record(a.tape, "gauss_cdf", (a,), out,
                  (lambda g: g * _normal.norm_pdf(x),))


def heaviside(a) -> Variable:
    """Unit step: 1 for x > 0, 0 for x <= 0. Blocks all gradient flow."""
    out = Tensor._wrap((a.value.data > 0.0).astype(np.float64))
    return record(a.tape, "heaviside", (a,), out, (None,))


def stop_gradient(a) -> Variable:
    """Identity forward; treated as a constant by backward."""
    return record(a.tape, "stop_gradient", (a,), a.value, (None,))


def sum_all(a) -> Variable:
    out = Tensor._wrap(np.array([np.sum(a.value.data)]))
    shape = a.value.shape
    return record(a.tape, "sum", (a,), out,
                  (lambda g: np.full(shape, g.reshape(-1)[0]),))


def mean_all(a) -> Variable:
    n = a.value.size
    out = Tensor._wrap(np.array([np.sum(a.value.data) / n]))
    shape = a.value.shape
    return record(a.tape, "mean", (a,), out,
                  (lambda g: np.full(shape, g.reshape(-1)[0] / n),))


def matmul(a, b) -> Variable:
    a, b = _binary_operands(a, b)
    out = tensor.matmul(a.value, b.value)
    ad, bd = a.value.data, b.value.data
    return record(a.tape, "matmul", (a, b), out, (
        lambda g: tensor._matmul_arrays(g, np.ascontiguousarray(bd.T)),
        lambda g: tensor._matmul_arrays(np.ascontiguousarray(ad.T), g),
    ))


def reshape(a, shape) -> Variable:
    out = a.value.reshape(shape)
    old = a.value.shape
    return record(a.tape, "reshape", (a,), out, (lambda g: g.reshape(old),))


# ---------------------------------------------------------------------------
# Finite-difference gradient oracle.
# ---------------------------------------------------------------------------

@dataclass
class GradCheckReport:
    max_rel_err: float
    worst_index: tuple[int, ...]
    analytic: np.ndarray
    numeric: np.ndarray


def _eval_scalar(f, arr: np.ndarray) -> float:
    t = Tape()
    out = f(t.variable(Tensor(arr)))
    val = out.value.item()
    if not np.isfinite(val):
        raise ValueError(f"non-finite f evaluation ({val}) during fd_check")
    return val


def fd_check(f, x, h: float = 1e-6) -> GradCheckReport:
    """Compare reverse-mode gradients of a scalar function to central
    differences (f(x+h*e_i) - f(x-h*e_i)) / 2h, coordinate by coordinate.

    `f` takes a Variable and must build its whole graph on that
    Variable's tape. Relative error uses max(|analytic|, |numeric|,
    1e-8) as the denominator.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = x if isinstance(x, Tensor) else Tensor(x)
    t = Tape()
    xv = t.variable(x, requires_grad=True)
    out = f(xv)
    if out.value.size != 1:
        raise ValueError("fd_check needs a scalar-valued function")
    backward(out)
    analytic = np.array(xv.grad.data)

    base = np.array(x.data)
    numeric = np.zeros_like(base)
    flat_num = numeric.reshape(-1)
    for i in range(base.size):
        pert = base.copy()
        pert.reshape(-1)[i] += h
        fp = _eval_scalar(f, pert)
        pert.reshape(-1)[i] -= 2.0 * h
        fm = _eval_scalar(f, pert)
        flat_num[i] = (fp - fm) / (2.0 * h)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    rel = np.abs(analytic - numeric) / denom
    worst = int(np.argmax(rel))
    return GradCheckReport(
        max_rel_err=float(rel.reshape(-1)[worst]),
        worst_index=np.unravel_index(worst, base.shape),
        analytic=analytic,
        numeric=numeric,
    )

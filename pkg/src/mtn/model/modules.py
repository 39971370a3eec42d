"""The per-node-type combination functions and the gated unit.

Every module maps its children's hidden states to one intermediate vector
h~, which the surrounding unit then gates:

    FuncDef/While/DoWhile/Switch   tanh(W [h_left : h_right] + b)
    If (2 children)                tanh(W [h_cond : h_then] + b)
    If (3 children)                elementwise max of the 2-child form
                                   applied to (cond, then) and (cond, else)
    For                            inner tanh over [init : cond : next],
                                   outer layer over [inner : body]
    Case                           tanh(W [h_expr : LSTM(stmts)] + b)
    Seq                            last hidden state of an LSTM scan

The unit (child-sum gating) computes, for input embedding x, children
states (h_k, c_k) and intermediate h~:

    i = sigmoid(W_i x + U_i h~ + b_i)        o, u analogous (tanh for u)
    f_k = sigmoid(W_f x + U_f h_k + b_f)     one forget gate per child
    c = i * u + sum_k f_k * c_k              h = o * tanh(c)
"""
from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

from ..autodiff import (
    Tensor,
    affine,
    affine2,
    concat_rows,
    elementwise_max,
    mul_elem,
    sigmoid,
    sum_of,
    tanh,
    zeros,
)
from .params import CaseModule, ForModule, GateBundle, PairModule, SeqModule


class ArityViolation(Exception):
    def __init__(self, module_type: str, got: int):
        super().__init__(f"{module_type} module got {got} children")
        self.module_type = module_type
        self.got = got


class UnitState(NamedTuple):
    h: Tensor
    c: Tensor


def lstm_last_hidden(cell: GateBundle, xs: Sequence[Tensor]) -> Tensor:
    """Scan an LSTM cell over xs from a zero state; return the last h."""
    h: Optional[Tensor] = None
    c: Optional[Tensor] = None
    for x in xs:
        if h is None:
            i = sigmoid(affine(cell.W_i, x, cell.b_i))
            o = sigmoid(affine(cell.W_o, x, cell.b_o))
            u = tanh(affine(cell.W_u, x, cell.b_u))
            c = mul_elem(i, u)
        else:
            i = sigmoid(affine2(cell.W_i, x, cell.U_i, h, cell.b_i))
            f = sigmoid(affine2(cell.W_f, x, cell.U_f, h, cell.b_f))
            o = sigmoid(affine2(cell.W_o, x, cell.U_o, h, cell.b_o))
            u = tanh(affine2(cell.W_u, x, cell.U_u, h, cell.b_u))
            c = sum_of((mul_elem(f, c), mul_elem(i, u)))
        h = mul_elem(o, tanh(c))
    if h is None:
        raise ArityViolation("LSTM scan", 0)
    return h


def module_forward(module_type: str, child_hidden: Sequence[Tensor],
                   params, for_outer_tanh: bool = True) -> Tensor:
    """Apply one neural module to its children's hidden states."""
    n = len(child_hidden)
    if module_type in ("FuncDef", "While", "DoWhile", "Switch"):
        if n != 2:
            raise ArityViolation(module_type, n)
        assert isinstance(params, PairModule)
        return tanh(affine(params.W, concat_rows(child_hidden), params.b))
    if module_type == "If":
        if n not in (2, 3):
            raise ArityViolation(module_type, n)
        assert isinstance(params, PairModule)
        cond = child_hidden[0]
        then_arm = tanh(affine(params.W, concat_rows((cond, child_hidden[1])),
                               params.b))
        if n == 2:
            return then_arm
        else_arm = tanh(affine(params.W, concat_rows((cond, child_hidden[2])),
                               params.b))
        return elementwise_max(then_arm, else_arm)
    if module_type == "For":
        if n != 4:
            raise ArityViolation(module_type, n)
        assert isinstance(params, ForModule)
        controller = tanh(affine(params.W1, concat_rows(child_hidden[:3]),
                                 params.b1))
        out = affine(params.W0, concat_rows((controller, child_hidden[3])),
                     params.b0)
        return tanh(out) if for_outer_tanh else out
    if module_type == "Case":
        if n < 1:
            raise ArityViolation(module_type, n)
        assert isinstance(params, CaseModule)
        label = child_hidden[0]
        stmts = child_hidden[1:]
        if stmts:
            summary = lstm_last_hidden(params.cell, stmts)
        else:
            summary = zeros(label.data.shape[0])
        return tanh(affine(params.W, concat_rows((label, summary)), params.b))
    if module_type == "Seq":
        if n < 1:
            raise ArityViolation(module_type, n)
        assert isinstance(params, SeqModule)
        return lstm_last_hidden(params.cell, child_hidden)
    raise ValueError(f"unknown module type {module_type!r}")


def mtn_unit_forward(x: Tensor, children: Sequence[UnitState],
                     h_tilde: Optional[Tensor],
                     container: GateBundle) -> UnitState:
    """Gate an intermediate vector into a new (h, c) state.

    ``h_tilde`` is None for leaves (the empty child-hidden sum); callers
    pass the module output or the children's hidden-state sum otherwise.
    """
    if h_tilde is None:
        i = sigmoid(affine(container.W_i, x, container.b_i))
        o = sigmoid(affine(container.W_o, x, container.b_o))
        u = tanh(affine(container.W_u, x, container.b_u))
        c = mul_elem(i, u)
    else:
        i = sigmoid(affine2(container.W_i, x, container.U_i, h_tilde,
                            container.b_i))
        o = sigmoid(affine2(container.W_o, x, container.U_o, h_tilde,
                            container.b_o))
        u = tanh(affine2(container.W_u, x, container.U_u, h_tilde,
                         container.b_u))
        terms = [mul_elem(i, u)]
        for state in children:
            f_k = sigmoid(affine2(container.W_f, x, container.U_f, state.h,
                                  container.b_f))
            terms.append(mul_elem(f_k, state.c))
        c = sum_of(terms)
    h = mul_elem(o, tanh(c))
    return UnitState(h, c)

"""The reverse-mode tape in isolation: record, backward, verify.

Run: python3 demos/02_autodiff_basics.py
"""
import numpy as np

from mtn.autodiff import (
    Tape,
    Tensor,
    affine,
    backward,
    grad_check,
    reduce_sum,
    sigmoid,
    tanh,
)

rng = np.random.default_rng(0)

# Parameters are leaves with requires_grad=True; everything recorded while a
# tape is active can be replayed backwards.
W = Tensor(rng.uniform(-0.5, 0.5, (4, 4)), requires_grad=True)
b = Tensor(np.zeros((4, 1)), requires_grad=True)
x = Tensor(rng.uniform(-1, 1, (4, 1)))

with Tape():
    y = reduce_sum(tanh(affine(W, x, b)))
    backward(y)

print("loss:", y.item())
print("dL/db:", b.grad[:, 0])

# Gradients ACCUMULATE across tapes until zeroed. One backward per example,
# one optimizer step per batch: that is the whole batching story here.
first = W.grad.copy()
with Tape():
    backward(reduce_sum(tanh(affine(W, x, b))))
assert np.allclose(W.grad, 2 * first)
print("second backward doubled the gradient:", np.allclose(W.grad, 2 * first))

# Central finite differences check any scalar-valued composition.
W.grad = None
b.grad = None
err = grad_check(
    lambda W, b: reduce_sum(sigmoid(affine(W, x, b))), [W, b])
print(f"grad_check max relative error: {err:.2e}")

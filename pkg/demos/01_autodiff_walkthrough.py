"""Walk through the tape-based autodiff engine on a tiny regression problem.

Builds a two-layer perceptron by hand, checks one gradient against finite
differences, then fits a 1-D curve with Adam.  Run:

    python3 demos/01_autodiff_walkthrough.py
"""

import numpy as np

from beamgat import tensor_ad as T
from beamgat.tensor_ad import Tape, Tensor
from beamgat.trainer import AdamState, adam_step


def loss_on(params, x, y, tape=None):
    W1 = Tensor(params["W1"], tape)
    b1 = Tensor(params["b1"], tape)
    W2 = Tensor(params["W2"], tape)
    b2 = Tensor(params["b2"], tape)
    h = T.leaky_relu(T.add(T.matmul(Tensor(x, tape), W1), b1), 0.01)
    pred = T.add(T.matmul(h, W2), b2)
    return (W1, b1, W2, b2), T.mse_loss(T.reshape(pred, (-1,)), y)


def main():
    rng = np.random.default_rng(0)
    x = np.linspace(-2, 2, 64)[:, None]
    y = np.sin(2 * x[:, 0]) + 0.1 * rng.normal(size=64)

    params = {
        "W1": rng.normal(scale=0.5, size=(1, 16)),
        "b1": np.zeros(16),
        "W2": rng.normal(scale=0.5, size=(16, 1)),
        "b2": np.zeros(1),
    }

    # --- gradient of the loss wrt W2, tape vs central finite differences ----
    tape = Tape()
    bound, loss = loss_on(params, x, y, tape)
    tape.backward(loss)
    analytic = bound[2].grad.copy()

    h = 1e-6
    numeric = np.zeros_like(params["W2"])
    for i in range(params["W2"].shape[0]):
        for delta, sign in ((h, 1.0), (-h, -1.0)):
            probe = {k: v.copy() for k, v in params.items()}
            probe["W2"][i, 0] += delta
            numeric[i, 0] += sign * float(loss_on(probe, x, y)[1].data)
    numeric /= 2 * h
    print(f"max |tape - finite difference| on W2: {np.abs(analytic - numeric).max():.3e}")

    # --- fit with Adam -----------------------------------------------------
    state = AdamState.zeros_like(params)
    for step in range(400):
        tape = Tape()
        bound, loss = loss_on(params, x, y, tape)
        tape.backward(loss)
        names = ("W1", "b1", "W2", "b2")
        grads = {n: t.grad for n, t in zip(names, bound)}
        adam_step(params, grads, state, lr=1e-2)
        if step % 100 == 0:
            print(f"step {step:3d}  mse {float(loss.data):.4f}")
    print(f"final mse {float(loss_on(params, x, y)[1].data):.4f}")


if __name__ == "__main__":
    main()

"""Central finite-difference gradient oracle shared by the nn tests.

All checks run in float64: the probe size (1e-5) leaves only ~1e-11 of
signal, far below float32 resolution.
"""

import numpy as np

from specinpaint import nn

EPS = 1e-5
TOL = 1e-4


def finite_difference(f, x: np.ndarray, eps: float = EPS) -> np.ndarray:
    """Gradient of scalar-valued ``f`` at ``x`` by central differences."""
    x = x.copy()
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        saved = x[idx]
        x[idx] = saved + eps
        fp = f(x)
        x[idx] = saved - eps
        fm = f(x)
        x[idx] = saved
        g[idx] = (fp - fm) / (2.0 * eps)
    return g


def rel_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0), 1e-8)
    return float(np.abs(analytic - numeric).max(initial=0.0) / scale)


def check_gradients(build, inputs: list[np.ndarray], tol: float = TOL) -> None:
    """Compare analytic gradients of ``build(*tensors).sum-along-probe``
    against finite differences for every input array.

    ``build`` maps Tensors to an output Tensor; the output is reduced to
    a scalar with a fixed random probe so the whole Jacobian is exercised.
    """
    with nn.using_dtype(np.float64):
        tensors = [nn.Tensor(x.astype(np.float64), requires_grad=True) for x in inputs]
        out = build(*tensors)
        probe = np.random.default_rng(1234).standard_normal(out.shape)
        loss = nn.tensor_sum(nn.mul(out, nn.Tensor(probe)))
        loss.backward()
        analytic = [t.grad if t.grad is not None else np.zeros_like(t.data) for t in tensors]

        for i, x in enumerate(inputs):
            def scalar(xi, i=i):
                args = [nn.Tensor(inputs[j].astype(np.float64)) for j in range(len(inputs))]
                args[i] = nn.Tensor(xi)
                return float(nn.tensor_sum(nn.mul(build(*args), nn.Tensor(probe))).data)

            numeric = finite_difference(scalar, x.astype(np.float64))
            err = rel_error(analytic[i], numeric)
            assert err <= tol, f"input {i}: gradient mismatch {err:.3e} > {tol}"

import numpy as np
import pytest

from kattn import tensor as T


def rel_err(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return np.linalg.norm(a - b) / denom


def finite_diff(f, wrt, eps=1e-4):
    """Central finite differences of scalar f() w.r.t. tensor ``wrt``."""
    grad = np.zeros_like(wrt.data)
    flat = wrt.data.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = f()
        flat[i] = orig - eps
        lo = f()
        flat[i] = orig
        gflat[i] = (hi - lo) / (2 * eps)
    return grad


def check_grad(build_loss, params, tol=1e-4, eps=1e-4):
    """Analytic vs central-finite-difference gradients for every param."""
    T.zero_grad(params)
    build_loss().backward()  # ones seed: differentiates sum of the output
    for p in params:
        fd = finite_diff(lambda: float(build_loss().data.sum()), p, eps=eps)
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        err = rel_err(analytic, fd)
        assert err < tol, f"gradient mismatch: rel err {err:.2e}"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

"""Central-finite-difference checking of reverse-mode gradients."""

from __future__ import annotations

import numpy as np

from ..errors import DivergenceError, ParameterError
from .tensor import Tensor


def grad_check(
    fn,
    params: list[Tensor],
    epsilon: float = 1e-5,
    max_coords_per_tensor: int = 32,
    seed: int = 0,
) -> float:
    """Max relative error between backprop and finite-difference gradients.

    ``fn`` must rebuild the (deterministic) scalar computation from the
    given parameter tensors on every call. The error per coordinate is
    |g_fd - g_bp| / max(|g_fd|, |g_bp|, 1e-12); coordinates are sampled
    when a tensor is large.
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise ParameterError(f"epsilon must lie in [1e-7, 1e-3], got {epsilon}")
    for p in params:
        p.zero_grad()
    loss = fn()
    if not np.isfinite(loss.data):
        raise DivergenceError("grad_check: non-finite loss from fn()")
    loss.backward()
    analytic = []
    for i, p in enumerate(params):
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        if not np.all(np.isfinite(g)):
            raise DivergenceError(f"grad_check: non-finite gradient for parameter {i}")
        analytic.append(g.reshape(-1).copy())

    rng = np.random.default_rng(seed)
    worst = 0.0
    for p, bp in zip(params, analytic):
        flat = p.data.reshape(-1)
        n = flat.size
        if n <= max_coords_per_tensor:
            coords = np.arange(n)
        else:
            coords = rng.choice(n, size=max_coords_per_tensor, replace=False)
        for c in coords:
            orig = flat[c]
            flat[c] = orig + epsilon
            hi = fn().data.item()
            flat[c] = orig - epsilon
            lo = fn().data.item()
            flat[c] = orig
            if not (np.isfinite(hi) and np.isfinite(lo)):
                raise DivergenceError("grad_check: non-finite perturbed loss")
            fd = (hi - lo) / (2.0 * epsilon)
            rel = abs(fd - bp[c]) / max(abs(fd), abs(bp[c]), 1e-12)
            worst = max(worst, rel)
    return worst

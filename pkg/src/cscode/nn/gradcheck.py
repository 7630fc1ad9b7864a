"""Central finite-difference verification of the analytic gradients.

The numeric side only ever calls the forward pass, so it stays independent of
the backward implementation it checks.  For large networks a seeded random
subset of coordinates is checked in every parameter array; small networks can
be checked exhaustively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GradCheckResult", "gradient_check"]


@dataclass
class GradCheckResult:
    max_rel_err: float
    n_checked: int
    worst_param: int  # index into model.params()
    worst_coord: tuple

    def passed(self, tol: float = 1e-4) -> bool:
        return self.max_rel_err <= tol


def _relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-6)


def gradient_check(model, x, targets, step: float = 1e-5,
                   coords_per_array: int | None = None, rng=None) -> GradCheckResult:
    """Compare model.backward gradients against central differences.

    coords_per_array limits how many coordinates are probed in each parameter
    array (None checks all of them); the subset is drawn from ``rng``.
    """
    if coords_per_array is not None and rng is None:
        rng = np.random.default_rng(0)
    _, grads = model.backward(x, targets)
    params = model.params()
    max_rel = 0.0
    checked = 0
    worst = (0, ())
    for p_idx, (param, grad) in enumerate(zip(params, grads)):
        flat_p = param.reshape(-1)
        flat_g = grad.reshape(-1)
        if coords_per_array is None or coords_per_array >= flat_p.size:
            coords = np.arange(flat_p.size)
        else:
            coords = rng.choice(flat_p.size, size=coords_per_array, replace=False)
        for c in coords:
            orig = flat_p[c]
            flat_p[c] = orig + step
            loss_plus = model.loss(x, targets)
            flat_p[c] = orig - step
            loss_minus = model.loss(x, targets)
            flat_p[c] = orig
            numeric = (loss_plus - loss_minus) / (2.0 * step)
            rel = _relative_error(float(flat_g[c]), numeric)
            checked += 1
            if rel > max_rel:
                max_rel = rel
                worst = (p_idx, np.unravel_index(int(c), param.shape))
    return GradCheckResult(
        max_rel_err=max_rel, n_checked=checked, worst_param=worst[0], worst_coord=worst[1]
    )

import numpy as np


def hard_sigmoid(x, a: float, b: float):
    """Clamp ``x`` to ``[a, b]``. Scalars in, scalar out."""
    if not a < b:
        raise ValueError(f"hard_sigmoid needs a < b, got a={a}, b={b}")
    out = np.clip(x, a, b)
    return float(out) if np.ndim(out) == 0 else out


def l2_loss(w, w_star) -> float:
    """Squared Euclidean distance ``sum((w - w_star)**2)``."""
    w = np.asarray(w, dtype=float).ravel()
    w_star = np.asarray(w_star, dtype=float).ravel()
    if w.shape != w_star.shape:
        raise ValueError(f"length mismatch: {w.size} vs {w_star.size}")
    diff = w - w_star
    return float(diff @ diff)

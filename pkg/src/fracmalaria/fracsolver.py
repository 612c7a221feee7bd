"""Adams-type predictor-corrector for Caputo fractional initial value problems.

Solves ``D^alpha y(t) = f(t, y)``, ``y(0) = y0`` for ``0 < alpha <= 1`` on a
uniform grid.  Each step is one fractional Adams-Bashforth prediction
followed by one Adams-Moulton correction (PECE).  The memory term makes a
solve of ``n`` steps cost ``O(n^2)``; the per-step history sums are done as
single matrix-vector products against precomputed weight sequences.

At ``alpha = 1`` the predictor reduces to forward Euler and the corrector to
the trapezoid rule, i.e. the scheme becomes Heun's method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "FractionalOrder",
    "TimeGrid",
    "SystemFunction",
    "Trajectory",
    "NonFiniteStateError",
    "predictor_weight",
    "corrector_weight",
    "predictor_weights",
    "corrector_weights",
    "predict",
    "correct",
    "solve",
]


class NonFiniteStateError(ArithmeticError):
    """Raised when a solve produces an overflow or NaN."""

    def __init__(self, step: int, state: np.ndarray):
        self.step = step
        self.state = state
        super().__init__(f"non-finite state at step {step}: {state!r}")


@dataclass(frozen=True)
class FractionalOrder:
    """Caputo order, shared by every equation of the system."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not math.isfinite(a) or not 0.0 < a <= 1.0:
            raise ValueError(f"fractional order must lie in (0, 1], got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    def __float__(self) -> float:
        return self.alpha


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = k * h`` for ``k = 0 .. n_steps``."""

    h: float
    n_steps: int
    t0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValueError(f"step size must be positive, got {self.h!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        if self.t0 != 0.0:
            raise ValueError("only t0 = 0 is supported")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @classmethod
    def from_horizon(cls, h: float, horizon: float) -> "TimeGrid":
        n = int(round(horizon / h))
        if not math.isclose(n * h, horizon, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"horizon {horizon} is not a multiple of h = {h}")
        return cls(h=h, n_steps=n)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    def time(self, k: int) -> float:
        return self.t0 + k * self.h


@dataclass(frozen=True)
class SystemFunction:
    """Right-hand side ``f(t, y)`` of fixed dimension."""

    dimension: int
    eval: Callable[[float, np.ndarray], np.ndarray]

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        return self.eval(t, y)


@dataclass(frozen=True)
class Trajectory:
    grid: TimeGrid
    states: np.ndarray  # (n_steps + 1, dimension), read-only
    order: FractionalOrder
    derivatives: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.states.shape[0]


def _as_order(order) -> FractionalOrder:
    return order if isinstance(order, FractionalOrder) else FractionalOrder(order)


def predictor_weight(j: int, k: int, order, h: float) -> float:
    """Weight ``b_{j,k+1}`` of history point ``j`` in the prediction of ``y_{k+1}``."""
    if not 0 <= j <= k:
        raise ValueError(f"predictor weight needs 0 <= j <= k, got j={j}, k={k}")
    if h <= 0:
        raise ValueError("h must be positive")
    a = _as_order(order).alpha
    m = k - j
    return h**a / a * ((m + 1) ** a - m**a)


def corrector_weight(j: int, k: int, order, h: float) -> float:
    """Weight ``a_{j,k+1}`` of history point ``j`` in the correction of ``y_{k+1}``.

    ``j = k + 1`` is the weight on the predicted point.
    """
    if not 0 <= j <= k + 1:
        raise ValueError(f"corrector weight needs 0 <= j <= k+1, got j={j}, k={k}")
    if h <= 0:
        raise ValueError("h must be positive")
    a = _as_order(order).alpha
    pre = h**a / (a * (a + 1))
    if j == k + 1:
        return pre
    if j == 0:
        return pre * (k ** (a + 1) - (k - a) * (k + 1) ** a)
    m = k - j
    return pre * ((m + 2) ** (a + 1) + m ** (a + 1) - 2 * (m + 1) ** (a + 1))


def predictor_weights(n: int, alpha: float, h: float) -> np.ndarray:
    """``w[m] = b_{k-m,k+1}`` for ``m = 0 .. n-1`` (depends on ``k - j`` only)."""
    m = np.arange(n + 1, dtype=float)
    p = m**alpha
    return h**alpha / alpha * np.diff(p)


def corrector_weights(n: int, alpha: float, h: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Corrector weight tables for steps ``k = 0 .. n-1``.

    Returns ``(interior, first, last)`` where ``interior[m]`` is the weight of
    history point ``j = k - m`` for ``1 <= j <= k``, ``first[k]`` the weight of
    ``j = 0`` and ``last`` the weight on the predicted point.
    """
    pre = h**alpha / (alpha * (alpha + 1))
    m = np.arange(n + 2, dtype=float)
    q = m ** (alpha + 1)
    interior = pre * (q[2:] + q[:-2] - 2 * q[1:-1])
    k = np.arange(n, dtype=float)
    first = pre * (k ** (alpha + 1) - (k - alpha) * (k + 1) ** alpha)
    return interior[:n], first, pre


def predict(states, f_history, order, grid: TimeGrid) -> np.ndarray:
    """Predicted state at ``k + 1`` from ``k + 1`` history points (rectangle product rule)."""
    states = np.asarray(states, dtype=float)
    f_history = np.asarray(f_history, dtype=float)
    a = _as_order(order).alpha
    k = len(states) - 1
    if f_history.shape[0] != k + 1:
        raise ValueError("f_history must hold one derivative per history state")
    w = predictor_weights(k + 1, a, grid.h)[::-1]
    return states[0] + (w @ f_history) / math.gamma(a)


def correct(states, f_history, predicted, order, grid: TimeGrid, f: Callable) -> np.ndarray:
    """Corrected state at ``k + 1`` (product trapezoid rule), one pass.

    ``f`` is evaluated once, at the predicted point.
    """
    states = np.asarray(states, dtype=float)
    f_history = np.asarray(f_history, dtype=float)
    a = _as_order(order).alpha
    k = len(states) - 1
    if f_history.shape[0] != k + 1:
        raise ValueError("f_history must hold one derivative per history state")
    interior, first, last = corrector_weights(k + 1, a, grid.h)
    acc = first[k] * f_history[0]
    if k >= 1:
        acc = acc + interior[:k][::-1] @ f_history[1:]
    fp = np.asarray(f(grid.time(k + 1), np.asarray(predicted, dtype=float)), dtype=float)
    return states[0] + (acc + last * fp) / math.gamma(a)


def solve(f, y0: Sequence[float], order, grid: TimeGrid) -> Trajectory:
    """Integrate ``D^alpha y = f(t, y)`` from ``y(0) = y0`` across ``grid``.

    ``f`` is a :class:`SystemFunction` or any callable ``f(t, y) -> dy``.
    Raises :class:`NonFiniteStateError` naming the first step whose state
    is not finite.
    """
    order = _as_order(order)
    a = order.alpha
    rhs = f.eval if isinstance(f, SystemFunction) else f
    y0 = np.array(y0, dtype=float)
    if y0.ndim != 1:
        raise ValueError("y0 must be a flat state vector")
    if isinstance(f, SystemFunction) and f.dimension != y0.size:
        raise ValueError(f"y0 has length {y0.size}, system has dimension {f.dimension}")
    if not np.all(np.isfinite(y0)):
        raise NonFiniteStateError(0, y0)

    n = grid.n_steps
    h = grid.h
    d = y0.size
    inv_gamma = 1.0 / math.gamma(a)

    # Reversed weight tables: entry k - j of the natural order sits at index
    # n - 1 - (k - j), so the slice for step k is a contiguous view.
    b_rev = predictor_weights(n, a, h)[::-1].copy() * inv_gamma
    interior, first, last = corrector_weights(n, a, h)
    c_rev = interior[::-1].copy() * inv_gamma
    first = first * inv_gamma
    last *= inv_gamma

    ys = np.empty((n + 1, d))
    fs = np.empty((n + 1, d))
    ys[0] = y0
    fs[0] = rhs(0.0, y0)
    if not np.all(np.isfinite(fs[0])):
        raise NonFiniteStateError(0, y0)

    for k in range(n):
        hist = fs[: k + 1]
        yp = y0 + b_rev[n - 1 - k :] @ hist
        if not np.all(np.isfinite(yp)):
            raise NonFiniteStateError(k + 1, yp)
        t1 = (k + 1) * h
        fp = rhs(t1, yp)
        acc = first[k] * hist[0] + last * fp
        if k:
            acc += c_rev[n - k :] @ hist[1:]
        y1 = y0 + acc
        if not np.all(np.isfinite(y1)):
            raise NonFiniteStateError(k + 1, y1)
        ys[k + 1] = y1
        fs[k + 1] = rhs(t1, y1)

    ys.flags.writeable = False
    fs.flags.writeable = False
    return Trajectory(grid=grid, states=ys, order=order, derivatives=fs)

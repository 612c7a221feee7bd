"""Fractional-order malaria model with temporary immunity.

State is the vector of proportions ``(s_h, i_h, r_h, s_v, i_v)``: susceptible,
infected and immune humans, then susceptible and infected mosquitoes.  Every
rate constant enters the fractional system raised to the power ``alpha`` so
that the time dimension matches that of ``D^alpha``; the dimensionless
``b``, ``c`` and ``m`` are left alone.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq

from .fracsolver import SystemFunction, _as_order

__all__ = [
    "ModelParams",
    "PoweredParams",
    "EpiState",
    "EndemicPoint",
    "EquilibriumSet",
    "RootFindingError",
    "DEFAULT_PARAMS",
    "DEFAULT_INITIAL_STATE",
    "STATE_NAMES",
    "alpha_power_params",
    "rhs",
    "system_function",
    "simplex_defect",
    "basic_reproduction_number",
    "disease_free_equilibrium",
    "endemic_equilibrium",
    "endemic_residual",
    "equilibria",
]

STATE_NAMES = ("s_h", "i_h", "r_h", "s_v", "i_v")

SCAN_CELLS = 1024
ROOT_XTOL = 1e-12
DENOM_GUARD = 1e-9
SIMPLEX_TOL = 1e-9


class RootFindingError(RuntimeError):
    """A bracketed endemic root did not polish to tolerance."""


@dataclass(frozen=True)
class ModelParams:
    """Biological parameters, stored un-powered.

    a: daily biting rate of one mosquito.  b: proportion of bites on humans
    that infect.  c: probability a mosquito becomes infectious.  m: female
    mosquitoes per human.  nu: human recovery rate.  gamma: loss of
    immunity.  r: rate of acquiring immunity.  delta: disease-induced death
    rate.  lambda_h, lambda_v: per-capita birth rates.
    """

    a: float
    b: float
    c: float
    m: float
    nu: float
    gamma: float
    r: float
    delta: float
    lambda_h: float
    lambda_v: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"parameter {f.name} must be a finite number, got {v!r}")
            if v < 0:
                raise ValueError(f"parameter {f.name} must be non-negative, got {v!r}")
            object.__setattr__(self, f.name, float(v))
        for name in ("b", "c"):
            if getattr(self, name) > 1:
                raise ValueError(f"parameter {name} is a probability, got {getattr(self, name)!r}")
        for name in ("lambda_h", "lambda_v"):
            if getattr(self, name) <= 0:
                raise ValueError(f"parameter {name} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown parameter(s): {sorted(unknown)}")
        missing = names - set(d)
        if missing:
            raise ValueError(f"missing parameter(s): {sorted(missing)}")
        return cls(**d)

    def replace(self, **changes) -> "ModelParams":
        return ModelParams(**{**asdict(self), **changes})


class PoweredParams(NamedTuple):
    lambda_h: float
    lambda_v: float
    a: float
    nu: float
    gamma: float
    delta: float
    r: float
    b: float
    m: float
    c: float

    @property
    def human_exit(self) -> float:
        """Total removal rate from the infected-human class at the DFE."""
        return self.nu + self.r + self.lambda_h + self.delta


def alpha_power_params(p: ModelParams, order) -> PoweredParams:
    al = _as_order(order).alpha
    return PoweredParams(
        lambda_h=p.lambda_h**al,
        lambda_v=p.lambda_v**al,
        a=p.a**al,
        nu=p.nu**al,
        gamma=p.gamma**al,
        delta=p.delta**al,
        r=p.r**al,
        b=p.b,
        m=p.m,
        c=p.c,
    )


@dataclass(frozen=True)
class EpiState:
    s_h: float
    i_h: float
    r_h: float
    s_v: float
    i_v: float

    @classmethod
    def from_array(cls, y) -> "EpiState":
        y = np.asarray(y, dtype=float)
        if y.shape != (5,):
            raise ValueError(f"an epidemic state has 5 components, got shape {y.shape}")
        return cls(*(float(v) for v in y))

    def as_array(self) -> np.ndarray:
        return np.array([self.s_h, self.i_h, self.r_h, self.s_v, self.i_v])

    def __iter__(self):
        return iter((self.s_h, self.i_h, self.r_h, self.s_v, self.i_v))


def _fields(y):
    if isinstance(y, EpiState):
        return tuple(y)
    y = np.asarray(y, dtype=float)
    return y[0], y[1], y[2], y[3], y[4]


def _rhs_powered(q: PoweredParams, y) -> np.ndarray:
    s_h, i_h, r_h, s_v, i_v = _fields(y)
    bite_h = q.a * q.b * q.m * s_h * i_v
    bite_v = q.a * q.c * i_h * s_v
    return np.array(
        [
            q.lambda_h * (1 - s_h) - bite_h + q.nu * i_h + q.gamma * r_h + q.delta * s_h * i_h,
            bite_h - q.human_exit * i_h + q.delta * i_h * i_h,
            q.r * i_h - (q.gamma + q.lambda_h) * r_h + q.delta * i_h * r_h,
            q.lambda_v * (1 - s_v) - bite_v,
            bite_v - q.lambda_v * i_v,
        ]
    )


def rhs(t: float, y, p: ModelParams, order) -> np.ndarray:
    """Right-hand side of the fractional malaria system (autonomous; ``t`` is ignored)."""
    return _rhs_powered(alpha_power_params(p, order), y)


def system_function(p: ModelParams, order) -> SystemFunction:
    q = alpha_power_params(p, order)
    return SystemFunction(dimension=5, eval=lambda t, y: _rhs_powered(q, y))


def simplex_defect(y) -> tuple[float, float]:
    s_h, i_h, r_h, s_v, i_v = _fields(y)
    return (float(s_h + i_h + r_h - 1), float(s_v + i_v - 1))


def basic_reproduction_number(p: ModelParams, order) -> float:
    q = alpha_power_params(p, order)
    return math.sqrt(q.a * q.a * q.b * q.m * q.c / (q.lambda_v * q.human_exit))


def disease_free_equilibrium() -> EpiState:
    return EpiState(1.0, 0.0, 0.0, 1.0, 0.0)


class EndemicPoint(NamedTuple):
    state: EpiState
    i_h_star: float
    residual: float


@dataclass(frozen=True)
class EquilibriumSet:
    disease_free: EpiState
    endemic: Optional[EndemicPoint]


def _endemic_components(q: PoweredParams, i_h: float):
    """Remaining equilibrium coordinates as functions of ``i_h``, plus the two denominators."""
    lv_ac = q.lambda_v + q.a * q.c * i_h
    d_r = q.lambda_h + q.gamma - q.delta * i_h
    d_s = (q.lambda_h - q.delta * i_h) * lv_ac + q.a * q.a * q.b * q.m * q.c * i_h
    r_h = q.r * i_h / d_r
    s_h = lv_ac * (d_r * (q.lambda_h + q.nu * i_h) + q.gamma * q.r * i_h) / (d_r * d_s)
    s_v = q.lambda_v / lv_ac
    i_v = q.a * q.c * i_h / lv_ac
    return s_h, r_h, s_v, i_v, d_r, d_s


def _reduced_residual(q: PoweredParams, i_h: float) -> float:
    """Infected-human equation divided by ``i_h``.

    Dividing out the trivial root at ``i_h = 0`` leaves a function whose
    value there is ``V11 (R0^2 - 1)``, so its sign at the left end is the
    sign of ``R0 - 1``.
    """
    s_h, _, _, _, _, _ = _endemic_components(q, i_h)
    iv_over_ih = q.a * q.c / (q.lambda_v + q.a * q.c * i_h)
    return q.a * q.b * q.m * s_h * iv_over_ih - q.human_exit + q.delta * i_h


def endemic_residual(p: ModelParams, order, i_h: float) -> float:
    """Infected-human right-hand side after substituting the other equilibrium coordinates."""
    return i_h * _reduced_residual(alpha_power_params(p, order), i_h)


def _assemble(q: PoweredParams, i_h: float) -> EpiState:
    s_h, r_h, s_v, i_v, _, _ = _endemic_components(q, i_h)
    return EpiState(s_h, i_h, r_h, s_v, i_v)


def _admissible(state: EpiState) -> bool:
    """Interior and on the double simplex.

    The closed-form s_h* agrees with 1 - i_h - r_h only where
    lambda_h != delta i_h; at that crossing the residual has a root that is
    an equilibrium of the unconstrained system but lies off the simplex.
    """
    comps = state.as_array()
    if not np.all((comps > 0) & (comps < 1)):
        return False
    dh, dv = simplex_defect(state)
    return abs(dh) <= SIMPLEX_TOL and abs(dv) <= SIMPLEX_TOL


def endemic_equilibrium(p: ModelParams, order) -> Optional[EndemicPoint]:
    """Interior equilibrium, or ``None`` when the scan finds no admissible root in (0, 1).

    The scalar residual is scanned on a uniform mesh.  Each cell with a sign
    change and no denominator zero is polished with Brent's method; the
    first root that assembles into an interior point on the double simplex
    is returned.  Raises :class:`RootFindingError` if a bracketed root fails
    to converge.
    """
    order = _as_order(order)
    q = alpha_power_params(p, order)
    xs = np.linspace(0.0, 1.0, SCAN_CELLS + 1)

    def guarded(x):
        *_, d_r, d_s = _endemic_components(q, x)
        return abs(d_r) > DENOM_GUARD and abs(d_s) > DENOM_GUARD

    with np.errstate(divide="ignore", invalid="ignore"):
        vals = [_reduced_residual(q, x) if guarded(x) else math.nan for x in xs]

    for lo, hi, flo, fhi in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
        if not (math.isfinite(flo) and math.isfinite(fhi)):
            continue
        *_, dr_lo, ds_lo = _endemic_components(q, lo)
        *_, dr_hi, ds_hi = _endemic_components(q, hi)
        if dr_lo * dr_hi <= 0 or ds_lo * ds_hi <= 0:
            # a pole inside the cell would fake a sign change
            continue
        if fhi == 0.0 and hi < 1.0:
            root = float(hi)
        elif flo == 0.0 or fhi == 0.0 or (flo > 0) == (fhi > 0):
            continue
        else:
            try:
                root, info = brentq(
                    lambda x: _reduced_residual(q, x), lo, hi, xtol=ROOT_XTOL, rtol=1e-15, full_output=True
                )
            except (RuntimeError, ValueError) as exc:
                raise RootFindingError(f"endemic root in [{lo}, {hi}] did not converge: {exc}") from exc
            if not info.converged:
                raise RootFindingError(f"endemic root in [{lo}, {hi}] did not converge")
        state = _assemble(q, root)
        if _admissible(state):
            residual = float(np.max(np.abs(_rhs_powered(q, state))))
            return EndemicPoint(state, float(root), residual)
    return None


def equilibria(p: ModelParams, order) -> EquilibriumSet:
    return EquilibriumSet(disease_free_equilibrium(), endemic_equilibrium(p, order))


# Default biology, rates per day.  m is chosen so that R0 = 1.5 at alpha = 1
# (a^2 b m c = 2.25 * lambda_v * (nu + r + lambda_h + delta)); with these rates
# the classical system spirals into the endemic point within a few hundred days.
DEFAULT_PARAMS = ModelParams(
    a=0.3, b=0.5, c=0.5, m=1.11, nu=0.05, gamma=0.02, r=0.05, delta=0.001, lambda_h=0.01, lambda_v=0.1
)

DEFAULT_INITIAL_STATE = EpiState(0.9, 0.1, 0.0, 0.95, 0.05)

"""Local stability of the malaria model's equilibria.

Fractional linearisations are stable when every Jacobian eigenvalue
satisfies ``|arg(lambda)| > alpha * pi / 2`` (Matignon).  The disease-free
point factorises into three explicit eigenvalues and a 2x2 block; the
endemic point is handled in reduced ``(s_h, i_h, i_v)`` coordinates through
its characteristic cubic.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .fracsolver import _as_order
from .model import (
    EndemicPoint,
    EpiState,
    ModelParams,
    alpha_power_params,
    basic_reproduction_number,
    endemic_equilibrium,
)

__all__ = [
    "NextGenMatrices",
    "CubicCoefficients",
    "StabilityReport",
    "next_generation",
    "jacobian_dfe",
    "dfe_block",
    "dfe_eigenvalues",
    "jacobian_endemic",
    "reduced_rhs",
    "characteristic_coefficients",
    "cubic_discriminant",
    "cubic_roots",
    "matignon_stable",
    "matignon_verdict",
    "classify_endemic",
    "full_report",
]

BOUNDARY_TOL = 1e-9
EQUALITY_RTOL = 1e-9


class NextGenMatrices(NamedTuple):
    F: np.ndarray
    V: np.ndarray
    FV_inv: np.ndarray
    spectral_radius: float


class CubicCoefficients(NamedTuple):
    """``lambda^3 + b1 lambda^2 + b2 lambda + b3``."""

    b1: float
    b2: float
    b3: float


def next_generation(p: ModelParams, order) -> NextGenMatrices:
    q = alpha_power_params(p, order)
    F = np.array([[0.0, q.a * q.b * q.m], [q.a * q.c, 0.0]])
    V = np.diag([q.human_exit, q.lambda_v])
    # V is diagonal, so its inverse is exact entrywise
    FV_inv = F @ np.diag([1.0 / q.human_exit, 1.0 / q.lambda_v])
    rho = math.sqrt(FV_inv[0, 1] * FV_inv[1, 0])
    return NextGenMatrices(F, V, FV_inv, rho)


def jacobian_dfe(p: ModelParams, order) -> np.ndarray:
    """Jacobian of the full 5-D system at ``(1, 0, 0, 1, 0)``."""
    q = alpha_power_params(p, order)
    abm = q.a * q.b * q.m
    ac = q.a * q.c
    return np.array(
        [
            [-q.lambda_h, q.nu + q.delta, q.gamma, 0.0, -abm],
            [0.0, -q.human_exit, 0.0, 0.0, abm],
            [0.0, q.r, -(q.lambda_h + q.gamma), 0.0, 0.0],
            [0.0, -ac, 0.0, -q.lambda_v, 0.0],
            [0.0, ac, 0.0, 0.0, -q.lambda_v],
        ]
    )


def dfe_block(p: ModelParams, order) -> np.ndarray:
    """The infected-compartment block ``(i_h, i_v)`` of the DFE Jacobian."""
    J = jacobian_dfe(p, order)
    return J[np.ix_([1, 4], [1, 4])]


def dfe_eigenvalues(p: ModelParams, order) -> np.ndarray:
    """Eigenvalues of the DFE Jacobian from its block factorisation.

    Three are ``-lambda_h``, ``-(lambda_h + gamma)``, ``-lambda_v`` (powered);
    the other two are the roots of the 2x2 infected block's characteristic
    quadratic.
    """
    q = alpha_power_params(p, order)
    B = dfe_block(p, order)
    tr = B[0, 0] + B[1, 1]
    det = B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0]
    disc = tr * tr - 4 * det
    if disc >= 0:
        s = math.sqrt(disc)
        # stable form: avoid cancellation in the smaller root
        big = (tr - s) / 2 if tr <= 0 else (tr + s) / 2
        small = det / big if big != 0 else 0.0
        pair = [complex(big), complex(small)]
    else:
        s = math.sqrt(-disc)
        pair = [complex(tr / 2, s / 2), complex(tr / 2, -s / 2)]
    return np.array([-q.lambda_h, -(q.lambda_h + q.gamma), -q.lambda_v, *pair], dtype=complex)


def reduced_rhs(p: ModelParams, order, x) -> np.ndarray:
    """The system on the double simplex in ``(s_h, i_h, i_v)`` coordinates."""
    q = alpha_power_params(p, order)
    s_h, i_h, i_v = x
    r_h = 1 - s_h - i_h
    s_v = 1 - i_v
    bite_h = q.a * q.b * q.m * s_h * i_v
    return np.array(
        [
            q.lambda_h * (1 - s_h) - bite_h + q.nu * i_h + q.gamma * r_h + q.delta * s_h * i_h,
            bite_h - q.human_exit * i_h + q.delta * i_h * i_h,
            q.a * q.c * s_v * i_h - q.lambda_v * i_v,
        ]
    )


def jacobian_endemic(p: ModelParams, order, endemic) -> np.ndarray:
    """Jacobian of :func:`reduced_rhs` at an endemic point (``EpiState`` or ``EndemicPoint``)."""
    if isinstance(endemic, EndemicPoint):
        endemic = endemic.state
    q = alpha_power_params(p, order)
    s_h, i_h, i_v = endemic.s_h, endemic.i_h, endemic.i_v
    abm = q.a * q.b * q.m
    return np.array(
        [
            [-(q.lambda_h + q.gamma + abm * i_v - q.delta * i_h), q.nu + q.delta * s_h - q.gamma, -abm * s_h],
            [abm * i_v, -(q.human_exit - 2 * q.delta * i_h), abm * s_h],
            [0.0, q.a * q.c * (1 - i_v), -(q.lambda_v + q.a * q.c * i_h)],
        ]
    )


def characteristic_coefficients(J) -> CubicCoefficients:
    J = np.asarray(J, dtype=float)
    if J.shape != (3, 3):
        raise ValueError("expected a 3x3 matrix")
    minors = (
        J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]
        + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1]
    )
    det = (
        J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
        - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
        + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0])
    )
    return CubicCoefficients(float(-np.trace(J)), float(minors), float(-det))


def cubic_discriminant(c: CubicCoefficients) -> float:
    """Discriminant of ``x^3 + b1 x^2 + b2 x + b3``.

    The terms cancel heavily near repeated roots, so the polynomial is
    evaluated exactly on the (rational) float inputs and rounded once.
    Non-finite inputs fall back to float arithmetic.
    """
    if not all(math.isfinite(x) for x in c):
        b1, b2, b3 = map(float, c)
    else:
        b1, b2, b3 = (Fraction(float(x)) for x in c)
    D = 18 * b1 * b2 * b3 + (b1 * b2) ** 2 - 4 * b3 * b1**3 - 4 * b2**3 - 27 * b3**2
    try:
        return float(D)
    except OverflowError:
        return math.inf if D > 0 else -math.inf


def cubic_roots(c: CubicCoefficients) -> np.ndarray:
    """Roots of the monic cubic, via the depressed form.

    Three real roots use the trigonometric formula; otherwise Cardano gives
    the real root and the complex pair comes from deflation.  Each root gets
    one Newton polish.
    """
    b1, b2, b3 = (float(v) for v in c)
    # rescale x = s y so the working coefficients are O(1)
    s = max(abs(b1), math.sqrt(abs(b2)), abs(b3) ** (1 / 3))
    if s == 0:
        return np.zeros(3, dtype=complex)
    return s * _monic_cubic_roots(b1 / s, b2 / s / s, b3 / s / s / s)


def _monic_cubic_roots(b1: float, b2: float, b3: float) -> np.ndarray:
    shift = b1 / 3
    p = b2 - b1 * b1 / 3
    q = 2 * b1**3 / 27 - b1 * b2 / 3 + b3
    disc = (q / 2) ** 2 + (p / 3) ** 3

    if p == 0 and q == 0:
        roots = [complex(-shift)] * 3
    elif disc <= 0 and p < 0:
        rad = 2 * math.sqrt(-p / 3)
        arg = 3 * q / (p * rad)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3
        roots = [complex(rad * math.cos(theta - 2 * math.pi * k / 3) - shift) for k in range(3)]
    else:
        s = math.sqrt(max(disc, 0.0))
        # pick the sign that avoids cancellation
        u = np.cbrt(-q / 2 - s if q > 0 else -q / 2 + s)
        v = -p / (3 * u) if u != 0 else np.cbrt(-q)
        x1 = float(u + v - shift)
        # x^2 + (b1 + x1) x + (b2 + x1 (b1 + x1)) after dividing out (x - x1)
        e1 = b1 + x1
        e0 = b2 + x1 * e1
        d2 = cmath.sqrt(e1 * e1 - 4 * e0)
        big = (-e1 - d2) / 2 if e1 >= 0 else (-e1 + d2) / 2
        other = e0 / big if big != 0 else -e1 - big
        roots = [complex(x1), complex(big), complex(other)]

    def poly(z):
        return ((z + b1) * z + b2) * z + b3

    def dpoly(z):
        return (3 * z + 2 * b1) * z + b2

    polished = []
    for z in roots:
        d = dpoly(z)
        if d != 0:
            znew = z - poly(z) / d
            if abs(poly(znew)) <= abs(poly(z)):
                z = znew
        polished.append(z)
    return np.array(polished, dtype=complex)


def _zero_scale(eigs) -> float:
    return 1e-12 * max(1.0, max((abs(z) for z in eigs), default=1.0))


def matignon_stable(eigenvalue: complex, order) -> bool:
    """Strict ``|arg(lambda)| > alpha pi / 2``; a zero eigenvalue is not stable."""
    al = _as_order(order).alpha
    z = complex(eigenvalue)
    if z == 0:
        return False
    return abs(cmath.phase(z)) > al * math.pi / 2


def matignon_verdict(eigenvalues, order) -> str:
    """``stable``, ``unstable`` or ``marginal`` for a whole spectrum.

    Marginal means no eigenvalue violates the condition outright but at
    least one is zero or within ``BOUNDARY_TOL`` (in angle) of the boundary.
    """
    al = _as_order(order).alpha
    eigs = [complex(z) for z in eigenvalues]
    tiny = _zero_scale(eigs)
    bound = al * math.pi / 2
    marginal = False
    for z in eigs:
        if abs(z) <= tiny:
            marginal = True
            continue
        gap = abs(cmath.phase(z)) - bound
        if abs(gap) <= BOUNDARY_TOL:
            marginal = True
        elif gap < 0:
            return "unstable"
    return "marginal" if marginal else "stable"


def classify_endemic(c: CubicCoefficients, D: float, order) -> tuple[str, str]:
    """First matching branch of the endemic stability conditions and its verdict.

    (i)   D > 0, b1 > 0, b3 > 0, b1 b2 > b3          -> stable
    (ii)  D < 0, b1 >= 0, b2 >= 0, b3 > 0, alpha < 2/3 -> stable
    (iii) D < 0, b1 > 0, b2 > 0, b1 b2 = b3, 0 < alpha < 1 -> stable
    (iv)  D < 0, b1 < 0, b2 < 0, alpha > 2/3          -> unstable
    """
    al = _as_order(order).alpha
    b1, b2, b3 = c
    if D > 0 and b1 > 0 and b3 > 0 and b1 * b2 > b3:
        return "i", "stable"
    if D < 0 and b1 >= 0 and b2 >= 0 and b3 > 0 and al < 2 / 3:
        return "ii", "stable"
    if D < 0 and b1 > 0 and b2 > 0 and 0 < al < 1:
        if abs(b1 * b2 - b3) <= EQUALITY_RTOL * max(abs(b1 * b2), abs(b3)):
            return "iii", "stable"
    if D < 0 and b1 < 0 and b2 < 0 and al > 2 / 3:
        return "iv", "unstable"
    return "indeterminate", "indeterminate"


@dataclass(frozen=True)
class StabilityReport:
    alpha: float
    r0: float
    dfe_eigenvalues: np.ndarray
    dfe_verdict: str
    endemic: Optional[EndemicPoint]
    endemic_eigenvalues: Optional[np.ndarray]
    coefficients: Optional[CubicCoefficients]
    discriminant: Optional[float]
    proposition_branch: Optional[str]
    endemic_verdict: Optional[str]

    @property
    def endemic_present(self) -> bool:
        return self.endemic is not None

    def to_json_dict(self) -> dict:
        def pairs(z):
            return None if z is None else [[float(v.real), float(v.imag)] for v in z]

        endemic = None
        if self.endemic is not None:
            endemic = {
                "state": [float(v) for v in self.endemic.state],
                "i_h_star": float(self.endemic.i_h_star),
                "residual": float(self.endemic.residual),
            }
        co = self.coefficients
        return {
            "alpha": self.alpha,
            "r0": self.r0,
            "dfe_eigenvalues": pairs(self.dfe_eigenvalues),
            "dfe_verdict": self.dfe_verdict,
            "endemic": endemic,
            "endemic_eigenvalues": pairs(self.endemic_eigenvalues),
            "b1": None if co is None else co.b1,
            "b2": None if co is None else co.b2,
            "b3": None if co is None else co.b3,
            "discriminant": self.discriminant,
            "proposition_branch": self.proposition_branch,
            "endemic_verdict": self.endemic_verdict,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "StabilityReport":
        def cplx(v):
            return None if v is None else np.array([complex(re, im) for re, im in v])

        endemic = None
        if d["endemic"] is not None:
            e = d["endemic"]
            endemic = EndemicPoint(EpiState(*e["state"]), e["i_h_star"], e["residual"])
        co = None if d["b1"] is None else CubicCoefficients(d["b1"], d["b2"], d["b3"])
        return cls(
            alpha=d["alpha"],
            r0=d["r0"],
            dfe_eigenvalues=cplx(d["dfe_eigenvalues"]),
            dfe_verdict=d["dfe_verdict"],
            endemic=endemic,
            endemic_eigenvalues=cplx(d.get("endemic_eigenvalues")),
            coefficients=co,
            discriminant=d["discriminant"],
            proposition_branch=d["proposition_branch"],
            endemic_verdict=d["endemic_verdict"],
        )


def full_report(p: ModelParams, order) -> StabilityReport:
    order = _as_order(order)
    eigs = dfe_eigenvalues(p, order)
    endemic = endemic_equilibrium(p, order)
    coeffs = disc = branch = verdict = endo_eigs = None
    if endemic is not None:
        coeffs = characteristic_coefficients(jacobian_endemic(p, order, endemic))
        disc = cubic_discriminant(coeffs)
        endo_eigs = cubic_roots(coeffs)
        branch, verdict = classify_endemic(coeffs, disc, order)
    return StabilityReport(
        alpha=order.alpha,
        r0=basic_reproduction_number(p, order),
        dfe_eigenvalues=eigs,
        dfe_verdict=matignon_verdict(eigs, order),
        endemic=endemic,
        endemic_eigenvalues=endo_eigs,
        coefficients=coeffs,
        discriminant=disc,
        proposition_branch=branch,
        endemic_verdict=verdict,
    )

"""Smooth profile functions: fold bumps, clamp ramps, and plateau transitions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class BumpProfile:
    """Even smooth bump with compact support in (-1, 1), value 1 at 0.

    Carries evaluators for the profile and its first three derivatives.
    """

    f: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]
    d3: Callable[[np.ndarray], np.ndarray]
    name: str = "bump"

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.f(t)


def _mollifier_parts(t: np.ndarray):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    # Clip to the open interval so the expressions below stay finite; the
    # inside mask zeroes everything else.
    tc = np.where(inside, t, 0.0)
    u = 1.0 - tc * tc
    g = 1.0 / u
    psi = np.where(inside, np.exp(1.0 - g), 0.0)
    return inside, tc, u, g, psi


def _mollifier(t):
    return _mollifier_parts(t)[4]


def _mollifier_d1(t):
    inside, tc, u, g, psi = _mollifier_parts(t)
    gp = 2.0 * tc / (u * u)
    return np.where(inside, -gp * psi, 0.0)


def _mollifier_d2(t):
    inside, tc, u, g, psi = _mollifier_parts(t)
    gp = 2.0 * tc / (u * u)
    gpp = 2.0 / (u * u) + 8.0 * tc * tc / (u**3)
    return np.where(inside, (gp * gp - gpp) * psi, 0.0)


def _mollifier_d3(t):
    inside, tc, u, g, psi = _mollifier_parts(t)
    gp = 2.0 * tc / (u * u)
    gpp = 2.0 / (u * u) + 8.0 * tc * tc / (u**3)
    gppp = 24.0 * tc / (u**3) + 48.0 * tc**3 / (u**4)
    return np.where(inside, (-gp**3 + 3.0 * gp * gpp - gppp) * psi, 0.0)


#: Normalized mollifier exp(1 - 1/(1 - t^2)) on (-1, 1).
MOLLIFIER = BumpProfile(
    f=_mollifier, d1=_mollifier_d1, d2=_mollifier_d2, d3=_mollifier_d3,
    name="mollifier",
)


def _raised_cosine(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    return np.where(inside, np.cos(0.5 * np.pi * t) ** 2, 0.0)


def _raised_cosine_d1(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    return np.where(inside, -0.5 * np.pi * np.sin(np.pi * t), 0.0)


def _raised_cosine_d2(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    return np.where(inside, -0.5 * np.pi**2 * np.cos(np.pi * t), 0.0)


def _raised_cosine_d3(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    return np.where(inside, 0.5 * np.pi**3 * np.sin(np.pi * t), 0.0)


#: Raised cosine cos^2(pi t / 2) on (-1, 1). One continuous derivative at the
#: support edge (curvature jumps there), but the smallest curvature-to-slope
#: ratio of the candidate fold profiles: the energy evaluator handles the
#: front jump, and this profile reproduces the basic laminate fold exactly.
RAISED_COSINE = BumpProfile(
    f=_raised_cosine,
    d1=_raised_cosine_d1,
    d2=_raised_cosine_d2,
    d3=_raised_cosine_d3,
    name="raised_cosine",
)


_CSTAR_CACHE: dict[str, float] = {}


def bump_derivative_sq_integral(psi: BumpProfile, n: int = 4097) -> float:
    """c_* = integral of psi'(t)^2 over [0, 1] by composite trapezoid."""
    key = psi.name
    if key not in _CSTAR_CACHE:
        t = np.linspace(0.0, 1.0, n)
        vals = psi.d1(t) ** 2
        _CSTAR_CACHE[key] = float(np.trapezoid(vals, t))
    return _CSTAR_CACHE[key]


def cubic_ramp(t: np.ndarray) -> np.ndarray:
    """Cubic 0->1 ramp t^2 (3 - 2t) with zero slope at both ends, clamped."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def cubic_ramp_d1(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.clip(t, 0.0, 1.0)
    return np.where(inside, 6.0 * tc * (1.0 - tc), 0.0)


def smoothstep5(t: np.ndarray) -> np.ndarray:
    """Quintic 0->1 ramp with zero first and second derivatives at the ends."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t * t)


def smoothstep5_d1(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.clip(t, 0.0, 1.0)
    return np.where(inside, 30.0 * tc**2 * (1.0 - tc) ** 2, 0.0)


PLATEAU_FRACTION = 0.0625  # flat run at each end of a plateau ramp


def plateau_ramp(t: np.ndarray, plateau: float = PLATEAU_FRACTION) -> np.ndarray:
    """0->1 quintic ramp that is exactly flat on [0, plateau] and [1-plateau, 1].

    The flat runs give transition profiles vanishing first and second
    derivatives in a neighbourhood of both endpoints, not just at the points
    themselves.
    """
    t = np.asarray(t, dtype=float)
    s = (t - plateau) / (1.0 - 2.0 * plateau)
    return smoothstep5(s)


def plateau_ramp_d1(t: np.ndarray, plateau: float = PLATEAU_FRACTION) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    scale = 1.0 / (1.0 - 2.0 * plateau)
    s = (t - plateau) * scale
    return smoothstep5_d1(s) * scale


def fold_center_curve(x: np.ndarray, h: float, length: float) -> np.ndarray:
    """Transition phi: [0, L] -> [0, h/2] with phi(0) = h/2, phi(L) = 0.

    phi' = phi'' = 0 on plateaus near both ends and |phi'| <= 2.5 h / L.
    """
    return 0.5 * h * (1.0 - plateau_ramp(np.asarray(x, dtype=float) / length))


def fold_width_curve(x: np.ndarray, delta: float, lam: float, length: float) -> np.ndarray:
    """Width transition from lam*delta at x=0 to delta at x=L, flat near ends."""
    r = plateau_ramp(np.asarray(x, dtype=float) / length)
    return delta * (lam + (1.0 - lam) * r)

"""Phase-diagram classification, predicted scalings, and pattern scales."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class Regime:
    """One cell of the (sigma, gamma) phase diagram.

    ``upper_exponents`` are the exact rationals (a, b) of the predicted
    minimal-energy scaling sigma^a gamma^b per unit area.
    """

    label: str
    name: str
    upper_exponents: tuple[Fraction, Fraction]


REGIME_A = Regime("A", "flat", (Fraction(0), Fraction(0)))
REGIME_B = Regime("B", "laminate", (Fraction(2, 5), Fraction(2, 5)))
REGIME_C = Regime("C", "localized branching", (Fraction(1, 2), Fraction(5, 8)))
REGIME_D = Regime("D", "uniform branching", (Fraction(1), Fraction(0)))

REGIMES = {r.label: r for r in (REGIME_A, REGIME_B, REGIME_C, REGIME_D)}


def _check_sigma(sigma: float) -> None:
    if not (0.0 < sigma < 1.0):
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")


def classify(sigma: float, gamma: float) -> Regime:
    """Unique regime of a parameter point; boundaries use closed inequalities
    gamma >= sigma^(-1) -> A, gamma >= sigma^(-4/9) -> B, gamma >= sigma^(4/5) -> C.
    """
    _check_sigma(sigma)
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if gamma >= sigma ** (-1.0):
        return REGIME_A
    if gamma >= sigma ** (-4.0 / 9.0):
        return REGIME_B
    if gamma >= sigma ** (4.0 / 5.0):
        return REGIME_C
    return REGIME_D


def upper_bound_scaling(sigma: float, gamma: float, l1: float = 1.0, l2: float = 1.0) -> float:
    """Predicted upper-bound value l1 l2 sigma^a gamma^b (constant omitted)."""
    regime = classify(sigma, gamma)
    if regime.label == "A":
        return l1 * l2
    if regime.label == "B":
        return l1 * l2 * (sigma * gamma) ** 0.4
    if regime.label == "C":
        return l1 * l2 * sigma**0.5 * gamma**0.625
    return l1 * l2 * sigma


def lower_bound_scaling(sigma: float, gamma: float, l1: float = 1.0, l2: float = 1.0) -> float:
    """Proven lower-bound value (constant omitted): 1, (sigma gamma)^(2/3), or sigma."""
    _check_sigma(sigma)
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if gamma >= sigma ** (-1.0):
        return l1 * l2
    if gamma >= sigma**0.5:
        return l1 * l2 * (sigma * gamma) ** (2.0 / 3.0)
    return l1 * l2 * sigma


def pattern_scales(sigma: float, gamma: float, l1: float = 1.0) -> tuple[float, float, float]:
    """Coarsest-pattern scales (h0, delta0, A0) of the branching construction:
    l1 (sigma^{1/4} gamma^{1/16}, sigma^{3/4} gamma^{-5/16}, sigma^{1/2} gamma^{-1/8}).

    Stated for regime C; outside it a warning is emitted, not an error.
    """
    _check_sigma(sigma)
    if gamma <= 0.0:
        raise ValueError("pattern scales need gamma > 0")
    regime = classify(sigma, gamma)
    if regime.label != "C":
        warnings.warn(
            f"pattern scales are calibrated for regime C; point is in {regime.label}",
            stacklevel=2,
        )
    h0 = l1 * sigma**0.25 * gamma ** (1.0 / 16.0)
    delta0 = l1 * sigma**0.75 * gamma ** (-5.0 / 16.0)
    a0 = l1 * sigma**0.5 * gamma ** (-0.125)
    return h0, delta0, a0


def regime_report(sigma: float, gamma: float, l1: float = 1.0, l2: float = 1.0) -> dict:
    """CLI-facing summary: regime, exponents, both scaling values, scales."""
    regime = classify(sigma, gamma)
    a, b = regime.upper_exponents
    report = {
        "sigma": sigma,
        "gamma": gamma,
        "regime": regime.label,
        "name": regime.name,
        "a": str(a),
        "b": str(b),
        "upper": upper_bound_scaling(sigma, gamma, l1, l2),
        "lower": lower_bound_scaling(sigma, gamma, l1, l2),
    }
    if gamma > 0.0:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            h0, d0, a0 = pattern_scales(sigma, gamma, l1)
        report["scales"] = {"h0": h0, "delta0": d0, "A0": a0}
    return report

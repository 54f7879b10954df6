"""Perturbative closed-form steady-state amplitudes and correlators.

Weak-drive solution of the driven, lossy resonator pair restricted to at
most three total excitations. Serves as an independent oracle for the
master-equation pipeline: populations are |C_mn|^2 with C00 = 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import SystemParams

__all__ = [
    "Intermediates",
    "AmplitudeSet",
    "AnalyticObservables",
    "SingularParameterError",
    "steady_amplitudes",
    "analytic_observables",
]

# canonical state order: ascending N = m + n, then ascending m
AMPLITUDE_STATES = (
    (0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0),
    (0, 3), (1, 2), (2, 1), (3, 0),
)

WEAK_DRIVE_WARNING_RATIO = 0.1


class SingularParameterError(ValueError):
    """A closed-form denominator vanished; carries the offending factor."""

    def __init__(self, factor: str, value: complex):
        self.factor = factor
        self.value = value
        super().__init__(f"singular parameter point: |{factor}| = {abs(value):.3e}")


@dataclass(frozen=True)
class Intermediates:
    """Detuning combinations and denominators of the closed-form solution."""

    d1: complex
    d2: complex
    d3: complex
    d4: complex
    d5: complex
    d6: complex
    eta1: complex
    eta2: complex
    eta3: complex
    xi1: complex
    xi2: complex
    mu: complex


@dataclass(frozen=True)
class AmplitudeSet:
    """Steady-state probability amplitudes C_mn up to N = m + n = 3."""

    c00: complex
    c01: complex
    c10: complex
    c02: complex
    c11: complex
    c20: complex
    c03: complex
    c12: complex
    c21: complex
    c30: complex
    intermediates: Intermediates

    def amplitude(self, m: int, n: int) -> complex:
        return getattr(self, f"c{m}{n}")

    def populations(self) -> dict[tuple[int, int], float]:
        """P_mn = |C_mn|^2 for every retained state."""
        return {(m, n): abs(self.amplitude(m, n)) ** 2 for m, n in AMPLITUDE_STATES}


@dataclass(frozen=True)
class AnalyticObservables:
    n1: float
    n2: float
    g2: float
    g2_approx: float
    g3: float


def _intermediates(p: SystemParams) -> Intermediates:
    d1 = p.delta - 0.5j * p.gamma1_prime
    d2 = p.delta - 0.5j * p.gamma2_prime
    d3 = d1 + p.chi
    d4 = d1 + 2 * p.chi
    d5 = 2 * d3 + d2
    d6 = d1 + 2 * d2
    J2 = p.J**2
    eta1 = d1 * d2 - J2
    xi1 = d1 * d3 + d2 * d3 - J2
    eta2 = 2 * xi1 * d2 - 2 * J2 * d3
    eta3 = J2 - d2 * d6
    xi2 = J2 - 4 * d2 * d4 - d4 * d5
    mu = J2 * xi2 - J2 * d2 * d6 + d2 * d4 * d5 * d6
    return Intermediates(d1, d2, d3, d4, d5, d6, eta1, eta2, eta3, xi1, xi2, mu)


def steady_amplitudes(p: SystemParams, *, warn_strong_drive: bool = True) -> AmplitudeSet:
    """Closed-form steady amplitudes for the weak-drive regime.

    Raises SingularParameterError naming the vanishing denominator (eta1,
    eta2 or mu) instead of regularizing; warns when Omega exceeds a tenth
    of gamma_1', where the perturbative ladder starts to degrade.
    """
    if warn_strong_drive and p.omega_drive_amp > WEAK_DRIVE_WARNING_RATIO * p.gamma1_prime:
        warnings.warn(
            "drive exceeds 0.1*gamma_1'; perturbative amplitudes degrade",
            stacklevel=2,
        )

    t = _intermediates(p)
    base = max(abs(p.delta), p.J, abs(p.chi), p.gamma1_prime, p.gamma2_prime, 1e-300)
    for name, value, power in (("eta1", t.eta1, 2), ("eta2", t.eta2, 3), ("mu", t.mu, 4)):
        if abs(value) < 1e-12 * base**power:
            raise SingularParameterError(name, value)

    om = p.omega_drive_amp * np.exp(1j * p.drive_phase)
    J = p.J
    d1, d2, d3, d4, d5, d6 = t.d1, t.d2, t.d3, t.d4, t.d5, t.d6
    eta1, eta2, eta3, mu, xi2 = t.eta1, t.eta2, t.eta3, t.mu, t.xi2

    c01 = J * om / eta1
    c10 = -om * d2 / eta1
    c02 = np.sqrt(2) * om**2 * J**2 * (d3 + d2) / (eta1 * eta2)
    c20 = np.sqrt(2) * om**2 * d2**2 * (d1 + d2) / (eta1 * eta2)
    c11 = -2 * om**2 * d2 * J * (d3 + d2) / (eta1 * eta2)

    w3 = xi2 * (d2 + d3) - 2 * d2**2 * (d1 + d2)
    c03 = -np.sqrt(6) * J**3 * om**3 * w3 / (3 * eta1 * eta2 * mu)
    c12 = np.sqrt(2) * J**2 * om**3 * d2 * w3 / (eta1 * eta2 * mu)
    v3 = d2**2 * (4 * J**2 * d2 + d5 * eta3) * (d1 + d2) - 2 * J**2 * d2**2 * d6 * (d2 + d3)
    c30 = np.sqrt(6) * om**3 * v3 / (3 * eta1 * eta2 * mu)
    u3 = d2**2 * eta3 * (d1 + d2) - 2 * d2**2 * d4 * d6 * (d2 + d3)
    c21 = -np.sqrt(2) * J * om**3 * u3 / (eta1 * eta2 * mu)

    return AmplitudeSet(
        c00=1.0 + 0.0j, c01=c01, c10=c10, c02=c02, c11=c11, c20=c20,
        c03=c03, c12=c12, c21=c21, c30=c30, intermediates=t,
    )


def analytic_observables(amps: AmplitudeSet) -> AnalyticObservables:
    """Mean occupations and equal-time correlators from the amplitudes.

    g2 carries the full numerator 2*P20 + 6*P30 + 2*P21 over the full N1
    (the form matching the master-equation numerics); g2_approx is the
    leading-order 2*P20/P10^2, whose algebra collapses to exactly 1 for a
    linear system. g3 = 6*P30 / N1^3.
    """
    P = amps.populations()
    n1 = sum(m * pr for (m, n), pr in P.items())
    n2 = sum(n * pr for (m, n), pr in P.items())
    if n1 < 1e-30:
        raise ValueError("N1 vanishes: correlation functions are undefined")
    g2 = (2 * P[(2, 0)] + 6 * P[(3, 0)] + 2 * P[(2, 1)]) / n1**2
    g2_approx = 2 * P[(2, 0)] / P[(1, 0)] ** 2 if P[(1, 0)] > 0 else float("nan")
    g3 = 6 * P[(3, 0)] / n1**3
    return AnalyticObservables(n1=n1, n2=n2, g2=g2, g2_approx=g2_approx, g3=g3)

"""Physical parameters, SI conversions, and Hamiltonian construction.

The default unit system is ``normalized``: every rate is expressed in units
of the total loss of the nonlinear resonator (gamma_1' = gamma_1 + gamma_ex
= 1) and omega_c = 0, i.e. frequencies are offsets from the bare cavity
resonance. SI conversions enter only at the parameter boundary; internally
hbar = 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np
from scipy import constants as _const

from .hilbert import ComplexOperator, FockBasis, mode_operator

__all__ = [
    "SystemParams",
    "DerivedRates",
    "kerr_coefficient",
    "drive_amplitude",
    "derived_rates",
    "build_hamiltonian",
    "preset",
    "preset_names",
    "load_params",
    "apply_overrides",
    "si_reference_rates",
    "CHI_SI_REFERENCE",
]

HAMILTONIAN_VARIANTS = (
    "isolated",
    "rotating_driven",
    "effective_nonhermitian",
    "excitation_conserving_nonhermitian",
)

# chi for lambda = 1550 nm, chi^(3)/eps_r^2 = 2e-17 m^2/V^2, V_eff = 100 um^3,
# evaluated directly from kerr_coefficient with CODATA constants.
CHI_SI_REFERENCE = 2638495.9760940145  # rad/s


@dataclass(frozen=True)
class SystemParams:
    """All rates and drive settings of the two-resonator model (rad/s)."""

    chi: float
    J: float
    gamma_1: float
    gamma_ex: float
    gamma_2: float
    gamma_tip: float
    omega_drive_amp: float
    omega_c: float = 0.0
    delta: float = 0.0
    drive_phase: float = 0.0
    unit_system: str = "normalized"

    def __post_init__(self):
        for name in ("J", "gamma_1", "gamma_ex", "gamma_2", "gamma_tip", "omega_drive_amp"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.unit_system not in ("normalized", "si"):
            raise ValueError("unit_system must be 'normalized' or 'si'")

    @property
    def gamma1_prime(self) -> float:
        return self.gamma_1 + self.gamma_ex

    @property
    def gamma2_prime(self) -> float:
        return self.gamma_2 + self.gamma_tip

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DerivedRates:
    """Total losses plus the mean-loss / loss-contrast combinations."""

    gamma1_prime: float
    gamma2_prime: float
    Gamma: float
    beta: float


def kerr_coefficient(wavelength: float, chi3_over_eps_r2: float, v_eff: float) -> float:
    """Kerr shift chi = 3*hbar*omega_c^2*(chi3/eps_r^2) / (4*eps0*V_eff), rad/s.

    Parameters
    ----------
    wavelength : float
        Resonance wavelength in m.
    chi3_over_eps_r2 : float
        Nonlinear susceptibility over relative permittivity squared, m^2/V^2.
    v_eff : float
        Effective mode volume in m^3.
    """
    if wavelength <= 0 or v_eff <= 0:
        raise ValueError("wavelength and v_eff must be > 0")
    if chi3_over_eps_r2 < 0:
        raise ValueError("chi3_over_eps_r2 must be >= 0")
    omega_c = 2 * np.pi * _const.c / wavelength
    return 3 * _const.hbar * omega_c**2 * chi3_over_eps_r2 / (4 * _const.epsilon_0 * v_eff)


def drive_amplitude(p_in: float, gamma_ex: float, wavelength: float) -> float:
    """Drive amplitude Omega = sqrt(gamma_ex * P_in / (hbar * omega_l)), rad/s."""
    if p_in < 0 or gamma_ex < 0:
        raise ValueError("p_in and gamma_ex must be >= 0")
    if wavelength <= 0:
        raise ValueError("wavelength must be > 0")
    omega_l = 2 * np.pi * _const.c / wavelength
    return float(np.sqrt(gamma_ex * p_in / (_const.hbar * omega_l)))


def derived_rates(p: SystemParams) -> DerivedRates:
    g1p, g2p = p.gamma1_prime, p.gamma2_prime
    return DerivedRates(
        gamma1_prime=g1p,
        gamma2_prime=g2p,
        Gamma=(g1p + g2p) / 4,
        beta=(g2p - g1p) / 4,
    )


def build_hamiltonian(p: SystemParams, basis: FockBasis, variant: str) -> ComplexOperator:
    """Assemble one of the four Hamiltonian variants on the given basis.

    isolated:
        omega_c*(n1+n2) + chi*a1'a1'a1 a1 + J*(a1'a2 + a2'a1), Hermitian.
    rotating_driven:
        same with delta replacing omega_c, plus the drive Omega*(a1' + a1).
    effective_nonhermitian:
        rotating_driven - i*sum_j (gamma_j'/2)*n_j.
    excitation_conserving_nonhermitian:
        isolated - i*sum_j (gamma_j'/2)*n_j (lab frame, undriven).
    """
    if variant not in HAMILTONIAN_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {HAMILTONIAN_VARIANTS}")

    a1 = mode_operator(basis, 1, "annihilate").data
    a2 = mode_operator(basis, 2, "annihilate").data
    n1 = a1.conj().T @ a1
    n2 = a2.conj().T @ a2
    kerr = a1.conj().T @ a1.conj().T @ a1 @ a1
    hop = a1.conj().T @ a2 + a2.conj().T @ a1

    freq = p.omega_c if variant in ("isolated", "excitation_conserving_nonhermitian") else p.delta
    h = freq * (n1 + n2) + p.chi * kerr + p.J * hop

    if variant == "rotating_driven" or variant == "effective_nonhermitian":
        drive = p.omega_drive_amp * np.exp(1j * p.drive_phase)
        h = h + drive * a1.conj().T + np.conj(drive) * a1

    if variant in ("effective_nonhermitian", "excitation_conserving_nonhermitian"):
        h = h - 0.5j * (p.gamma1_prime * n1 + p.gamma2_prime * n2)

    return ComplexOperator(basis, h)


# ---------------------------------------------------------------------------
# presets and parameter files

def _params_from_dict(cfg: dict) -> SystemParams:
    fields = {
        k: cfg[k]
        for k in (
            "omega_c", "delta", "chi", "J", "gamma_1", "gamma_ex",
            "gamma_2", "gamma_tip", "omega_drive_amp", "drive_phase",
        )
        if k in cfg
    }
    return SystemParams(unit_system=cfg.get("unit_system", "normalized"), **fields)


def load_params(path) -> tuple[SystemParams, dict]:
    """Read a flat JSON parameter file; returns (params, full config dict)."""
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    return _params_from_dict(cfg.get("params", cfg)), cfg


def preset(name: str) -> tuple[SystemParams, dict]:
    """Load one of the shipped presets (``paper_fig1``/``paper_fig2``/``paper_fig3``)."""
    try:
        text = resources.files("kerrdimer").joinpath(f"presets/{name}.json").read_text()
    except FileNotFoundError:
        raise KeyError(f"unknown preset {name!r}; available: {preset_names()}") from None
    cfg = json.loads(text)
    return _params_from_dict(cfg["params"]), cfg


def preset_names() -> list[str]:
    root = resources.files("kerrdimer").joinpath("presets")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def apply_overrides(p: SystemParams, overrides: dict[str, float]) -> SystemParams:
    """Apply key=value overrides (applied after preset load)."""
    return p.with_(**overrides)


def si_reference_rates(
    wavelength: float = 1550e-9,
    q_intrinsic: float = 2e9,
    chi3_over_eps_r2: float = 2e-17,
    v_eff: float = 100e-18,
    p_in: float = 4e-15,
) -> dict[str, float]:
    """SI rates for a critically coupled resonator pair.

    gamma_1 = omega_c / Q is the intrinsic loss, gamma_ex = gamma_1
    (critical coupling), so gamma_1' = 2*omega_c/Q. Returns the rates in
    rad/s together with their values in units of gamma_1'.
    """
    omega_c = 2 * np.pi * _const.c / wavelength
    gamma_1 = omega_c / q_intrinsic
    gamma_ex = gamma_1
    g1p = gamma_1 + gamma_ex
    chi = kerr_coefficient(wavelength, chi3_over_eps_r2, v_eff)
    omega = drive_amplitude(p_in, gamma_ex, wavelength)
    return {
        "omega_c": omega_c,
        "gamma_1": gamma_1,
        "gamma_ex": gamma_ex,
        "gamma1_prime": g1p,
        "chi": chi,
        "omega_drive_amp": omega,
        "chi_over_gamma1p": chi / g1p,
        "omega_drive_over_gamma1p": omega / g1p,
    }

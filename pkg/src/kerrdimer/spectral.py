"""Eigenanalysis of the excitation-conserving non-Hermitian Hamiltonian.

Closed forms for the one- and two-photon excitation subspaces, a dense
block eigensolver for any excitation number, exceptional-point location,
and eigenstate localization diagnostics.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .hilbert import build_basis
from .model import SystemParams, build_hamiltonian, derived_rates
from .search import golden_section_minimize

__all__ = [
    "SubspaceEigensystem",
    "one_photon_eigensystem_closed",
    "two_photon_eigensystem_closed",
    "subspace_eigensystem_numeric",
    "hep_location",
    "hep_locate_numeric",
    "localization",
    "eigenvector_condition",
    "match_branches",
    "branch_sweep",
]

# relative half-width of the declared degeneracy neighborhood around EPs
DEGENERACY_TOL = 1e-6


@dataclass
class SubspaceEigensystem:
    """Eigenpairs of one N-excitation block.

    ``eigenvectors[:, k]`` is the unit-norm amplitude vector of branch
    ``labels[k]`` over ``basis_states`` (ordered by ascending m).
    """

    n_excitation: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    labels: tuple[str, ...]
    basis_states: tuple[tuple[int, int], ...]
    degenerate: bool = False
    used_fallback: bool = False

    @property
    def omega(self) -> np.ndarray:
        """Eigenfrequencies (real parts)."""
        return self.eigenvalues.real

    @property
    def kappa(self) -> np.ndarray:
        """Linewidths (-2 x imaginary parts)."""
        return -2.0 * self.eigenvalues.imag


def _n_block_states(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((m, n - m) for m in range(n + 1))


def _normalize_columns(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=0, keepdims=True)


def one_photon_eigensystem_closed(p: SystemParams) -> SubspaceEigensystem:
    """Closed-form eigenpairs of the one-photon block.

    lambda_1(+/-) = -i*Gamma + omega_c +/- sqrt(J^2 - beta^2), with the
    pair flagged degenerate when the discriminant root falls below the
    declared EP neighborhood.
    """
    r = derived_rates(p)
    s = np.sqrt(complex(p.J**2 - r.beta**2))
    lam = np.array([p.omega_c - 1j * r.Gamma + s, p.omega_c - 1j * r.Gamma - s])

    # eigenvectors of [[i*beta, J], [J, -i*beta]] in the ((0,1), (1,0)) state
    # order; two algebraically equivalent forms, keep the better-conditioned
    vecs = np.empty((2, 2), dtype=complex)
    for k, lam_red in enumerate((s, -s)):  # reduced eigenvalue (loss offset removed)
        v_a = np.array([-(1j * r.beta - lam_red), p.J])  # (C01, C10) ~ (-(i b -/+ s), J)
        v_b = np.array([p.J, lam_red + 1j * r.beta])
        v = v_a if np.linalg.norm(v_a) >= np.linalg.norm(v_b) else v_b
        vecs[:, k] = v / np.linalg.norm(v)

    degenerate = abs(s) < DEGENERACY_TOL * max(p.J, abs(r.beta), 1e-300)
    return SubspaceEigensystem(
        n_excitation=1,
        eigenvalues=lam,
        eigenvectors=vecs,
        labels=("+", "-"),
        basis_states=_n_block_states(1),
        degenerate=degenerate,
    )


def hep_location(J: float, gamma1_prime: float, gamma_2: float) -> float:
    """Nanotip loss at which the one-photon eigenvalues coalesce.

    gamma_tip_EP = 4J + gamma_1' - gamma_2; a negative result means no
    physical EP is reachable and a warning is emitted.
    """
    if J < 0 or gamma1_prime < 0 or gamma_2 < 0:
        raise ValueError("J, gamma1_prime and gamma_2 must be >= 0")
    gt = 4.0 * J + gamma1_prime - gamma_2
    if gt < 0:
        warnings.warn("EP condition gives gamma_tip < 0: no physical EP", stacklevel=2)
    return gt


def _two_photon_closed_eigenvalues(p: SystemParams):
    g1p, g2p = p.gamma1_prime, p.gamma2_prime
    dg = g1p - g2p
    A = 2 * p.omega_c + 2 * p.chi - 1j * g1p
    B = 2 * p.omega_c - 0.5j * (g1p + g2p)
    C = 2 * p.omega_c - 1j * g2p
    # pairwise sums of the intermediates limit cancellation between terms
    D = np.sum(np.array([
        36 * p.J**2 * p.chi,
        4.5 * p.chi * dg**2,
        -16 * p.chi**3,
        18j * p.chi**2 * dg,
    ]))
    E = np.sum(np.array([
        -12 * p.J**2,
        0.75 * dg**2,
        -4 * p.chi**2,
        3j * p.chi * dg,
    ]))
    F = (D + np.sqrt(4 * E**3 + D**2 + 0j)) ** (1.0 / 3.0)  # principal branches
    G = (A + B + C) / 3.0
    return A, B, C, D, E, F, G


def _two_photon_closed_roots(p: SystemParams):
    """Cubic roots labeled ('0', '+', '-'), or None when the closed
    expressions are numerically unreliable."""
    A, B, C, D, E, F, G = _two_photon_closed_eigenvalues(p)
    scale = max(p.J, abs(p.chi), p.gamma1_prime, p.gamma2_prime, abs(p.omega_c), 1e-300)
    if abs(F) < 1e-9 * scale:
        return None
    rt3 = 1j * np.sqrt(3)
    lam0 = G - (1 - rt3) * E / (3 * 2 ** (2 / 3) * F) + (1 + rt3) * F / (6 * 2 ** (1 / 3))
    lam_p = G - (1 + rt3) * E / (3 * 2 ** (2 / 3) * F) + (1 - rt3) * F / (6 * 2 ** (1 / 3))
    lam_m = G + 2 ** (1 / 3) * E / (3 * F) - F / (3 * 2 ** (1 / 3))
    return np.array([lam0, lam_p, lam_m]), (A, C), scale


def _dense_block_eig(p: SystemParams, n: int):
    states = _n_block_states(n)
    basis = build_basis(total=n)
    h = build_hamiltonian(p, basis, "excitation_conserving_nonhermitian").data
    idx = [basis.index_of(m, k) for m, k in states]
    lam, vecs = np.linalg.eig(h[np.ix_(idx, idx)])
    return lam, _normalize_columns(vecs), states


def two_photon_eigensystem_closed(p: SystemParams) -> SubspaceEigensystem:
    """Closed-form eigenpairs of the two-photon block (cubic roots).

    Falls back to the dense 3x3 eigensolver (flagged) when the cubic-root
    intermediate or an eigenvector amplitude is too small for the closed
    expressions to be reliable.
    """
    closed = _two_photon_closed_roots(p)
    fallback = closed is None
    if not fallback:
        lam, (A, C), scale = closed
        # eigenvector (C02, C11, C20) ~ (sqrt2*J*(A-l), -(C-l)*(A-l), sqrt2*J*(C-l))
        sq2J = np.sqrt(2) * p.J
        vecs = np.empty((3, 3), dtype=complex)
        for k, l in enumerate(lam):
            v = np.array([sq2J * (A - l), -(C - l) * (A - l), sq2J * (C - l)])
            nrm = np.linalg.norm(v)
            if nrm < 1e-12 * scale**2:
                fallback = True
                break
            vecs[:, k] = v / nrm

    if fallback:
        lam_n, vecs, states = _dense_block_eig(p, 2)
        order = np.lexsort((lam_n.imag, lam_n.real))
        lam, vecs = lam_n[order], vecs[:, order]
        labels = ("b0", "b1", "b2")
    else:
        labels = ("0", "+", "-")
        states = _n_block_states(2)

    scale = max(np.max(np.abs(lam)), 1e-300)
    dists = [abs(lam[i] - lam[j]) for i in range(3) for j in range(i + 1, 3)]
    return SubspaceEigensystem(
        n_excitation=2,
        eigenvalues=lam,
        eigenvectors=vecs,
        labels=labels,
        basis_states=states,
        degenerate=min(dists) < DEGENERACY_TOL * scale,
        used_fallback=fallback,
    )


def subspace_eigensystem_numeric(p: SystemParams, n: int) -> SubspaceEigensystem:
    """Dense eigensolve of the N-excitation block of the lab-frame
    excitation-conserving non-Hermitian Hamiltonian."""
    if n < 0:
        raise ValueError("excitation number must be >= 0")
    if n == 0:
        return SubspaceEigensystem(
            n_excitation=0,
            eigenvalues=np.array([0.0 + 0.0j]),
            eigenvectors=np.array([[1.0 + 0.0j]]),
            labels=("0",),
            basis_states=_n_block_states(0),
        )

    lam, vecs, states = _dense_block_eig(p, n)

    reference = None
    if n == 1:
        closed = one_photon_eigensystem_closed(p)
        reference = (closed.eigenvalues, closed.labels, closed.degenerate)
    elif n == 2:
        closed = _two_photon_closed_roots(p)
        if closed is not None:
            roots, _, scale = closed
            dists = [abs(roots[i] - roots[j]) for i in range(3) for j in range(i + 1, 3)]
            reference = (roots, ("0", "+", "-"), min(dists) < DEGENERACY_TOL * scale)

    if reference is not None:
        ref_vals, labels, degenerate = reference
        order = match_branches(ref_vals, lam)
        lam, vecs = lam[order], vecs[:, order]
    else:
        order = np.lexsort((lam.imag, lam.real))
        lam, vecs = lam[order], vecs[:, order]
        labels = tuple(f"b{k}" for k in range(n + 1))
        dists = [abs(a - b) for i, a in enumerate(lam) for b in lam[i + 1:]]
        scale = max(np.max(np.abs(lam)), 1e-300)
        degenerate = bool(dists) and min(dists) < DEGENERACY_TOL * scale

    return SubspaceEigensystem(
        n_excitation=n,
        eigenvalues=lam,
        eigenvectors=vecs,
        labels=labels,
        basis_states=states,
        degenerate=degenerate,
    )


def hep_locate_numeric(
    p: SystemParams, lo: float, hi: float, tol: float = 1e-9
) -> float:
    """Locate the one-photon eigenvalue coalescence by minimizing the
    numeric eigenvalue gap over gamma_tip in [lo, hi]."""

    def gap(gt: float) -> float:
        eig = subspace_eigensystem_numeric(p.with_(gamma_tip=gt), 1)
        return abs(eig.eigenvalues[0] - eig.eigenvalues[1])

    res = golden_section_minimize(gap, lo, hi, tol=tol)
    return res.x


def localization(eig: SubspaceEigensystem) -> np.ndarray:
    """Per-branch basis-state populations |amplitude|^2.

    Returns an array of shape (n_branches, n_states) whose rows sum to 1,
    aligned with ``eig.labels`` and ``eig.basis_states``.
    """
    return (np.abs(eig.eigenvectors) ** 2).T


def eigenvector_condition(eig: SubspaceEigensystem) -> float:
    """Conditioning diagnostic 1/|det V|; diverges as eigenvectors coalesce."""
    return 1.0 / abs(np.linalg.det(eig.eigenvectors))


def match_branches(reference: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Permutation aligning ``candidates`` with ``reference`` eigenvalues.

    Minimum-total-distance assignment in the complex plane; used for
    nearest-neighbor branch continuation across parameter sweeps.
    """
    cost = np.abs(reference[:, None] - candidates[None, :])
    _, cols = linear_sum_assignment(cost)
    return cols


def branch_sweep(p: SystemParams, gamma_tip_grid, n_excitation: int = 1) -> list[dict]:
    """Eigen-branch rows (continuation-labeled) over a gamma_tip grid.

    Each row carries gamma_tip, branch label, Re/Im of the eigenvalue and
    the per-state populations, in basis-state order.
    """
    rows = []
    prev = None
    labels = None
    for gt in gamma_tip_grid:
        eig = subspace_eigensystem_numeric(p.with_(gamma_tip=gt), n_excitation)
        lam, vecs = eig.eigenvalues, eig.eigenvectors
        if prev is None:
            labels = eig.labels
        else:
            order = match_branches(prev, lam)
            lam, vecs = lam[order], vecs[:, order]
        prev = lam
        pops = (np.abs(vecs) ** 2).T
        for k, lab in enumerate(labels):
            row = {
                "gamma_tip": float(gt),
                "branch": lab,
                "re_lambda": float(lam[k].real),
                "im_lambda": float(lam[k].imag),
            }
            for s, (m, n) in enumerate(eig.basis_states):
                row[f"pop_{m}{n}"] = float(pops[k, s])
            rows.append(row)
    return rows

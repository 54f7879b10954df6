"""Lindblad superoperator, steady state, time evolution, and Liouvillian EPs.

Vectorization is column-stacking throughout: vec(A X B) = (B^T kron A) vec(X),
so rho[r, c] lives at vec index c*d + r.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.linalg import lu_factor, lu_solve

from .hilbert import FockBasis, build_basis, mode_operator
from .model import SystemParams, build_hamiltonian
from .search import golden_section_minimize

__all__ = [
    "Superoperator",
    "DensityMatrix",
    "LiouvillianSpectrum",
    "LepResult",
    "ResourceLimitError",
    "DegenerateSteadyStateError",
    "NumericalFailureError",
    "LepNotFoundError",
    "vec",
    "unvec",
    "build_liouvillian",
    "apply_superoperator",
    "steady_state",
    "time_evolve",
    "liouvillian_spectrum",
    "coherence_sector_pair",
    "lep_locate",
]

MAX_HILBERT_DIM = 64  # superoperators stay at most 4096 x 4096


class ResourceLimitError(RuntimeError):
    pass


class DegenerateSteadyStateError(RuntimeError):
    pass


class NumericalFailureError(RuntimeError):
    pass


class LepNotFoundError(RuntimeError):
    pass


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((d, d), order="F")


@dataclass(frozen=True)
class Superoperator:
    """Dense Liouvillian matrix acting on column-stacked density matrices."""

    basis: FockBasis
    data: np.ndarray
    driven: bool

    @property
    def dim(self) -> int:
        return self.basis.size


@dataclass(frozen=True)
class DensityMatrix:
    """State over a FockBasis; Hermitian, unit trace, PSD within tolerance."""

    basis: FockBasis
    data: np.ndarray
    residual: float = 0.0

    def validate(self, hermiticity_tol: float = 1e-10, trace_tol: float = 1e-10,
                 psd_floor: float = -1e-8) -> "DensityMatrix":
        rho = self.data
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > hermiticity_tol:
            raise ValueError(f"not Hermitian: max |rho - rho^+| = {herm:.3e}")
        tr = np.trace(rho)
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
        lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
        if lo < psd_floor:
            raise ValueError(f"not PSD: min eigenvalue {lo:.3e}")
        return self

    def populations(self) -> dict[tuple[int, int], float]:
        diag = np.real(np.diag(self.data))
        return {s: float(diag[i]) for i, s in enumerate(self.basis.states)}

    def to_json(self) -> str:
        """Serialize with basis labels; entries as [re, im] pairs."""
        return json.dumps({
            "basis": [[m, n] for m, n in self.basis.states],
            "data": [[[z.real, z.imag] for z in row] for row in self.data],
            "residual": self.residual,
        })

    def mode1_marginal(self) -> np.ndarray:
        """P_m: probability of m photons in mode 1, any occupation of mode 2."""
        n_max = max(m for m, _ in self.basis.states)
        p = np.zeros(n_max + 1)
        for i, (m, _) in enumerate(self.basis.states):
            p[m] += self.data[i, i].real
        return p

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(op @ self.data))


@dataclass
class LiouvillianSpectrum:
    """Leading Liouvillian eigenvalues with optional eigenmatrices."""

    eigenvalues: np.ndarray
    eigenmatrices: list[np.ndarray] | None = None
    tracked_pair: tuple[int, int] | None = None
    gap: float | None = None
    overlap: float | None = None


@dataclass(frozen=True)
class LepResult:
    """Located Liouvillian EP with its coalescence diagnostics."""

    gamma_tip: float
    gap: float
    overlap: float
    bracket: tuple[float, float]
    grid_rows: list[dict] = field(hash=False, compare=False, default=None)


def build_liouvillian(p: SystemParams, basis: FockBasis, driven: bool = True,
                      max_dim: int = MAX_HILBERT_DIM) -> Superoperator:
    """Lindblad generator L rho = -i[H, rho] + sum_j gamma_j' D[a_j] rho.

    driven=True uses the rotating-frame driven Hamiltonian; driven=False the
    lab-frame isolated one (the generator used for the LEP analysis).
    """
    d = basis.size
    if d > max_dim:
        raise ResourceLimitError(
            f"basis size {d} exceeds the dense-superoperator cap {max_dim}"
        )
    h = build_hamiltonian(p, basis, "rotating_driven" if driven else "isolated").data
    # assembled through sparse Kronecker products (the factors are nearly
    # diagonal), then densified once; the public type stays dense
    hs = sparse.csr_matrix(h)
    eye = sparse.identity(d, dtype=complex, format="csr")
    lind = -1j * (sparse.kron(eye, hs) - sparse.kron(hs.T, eye))
    for rate, mode in ((p.gamma1_prime, 1), (p.gamma2_prime, 2)):
        a = sparse.csr_matrix(mode_operator(basis, mode, "annihilate").data)
        n = (a.conj().T @ a).tocsr()
        lind = lind + rate * (
            sparse.kron(a.conj(), a)
            - 0.5 * sparse.kron(eye, n)
            - 0.5 * sparse.kron(n.T, eye)
        )
    return Superoperator(basis=basis, data=np.asarray(lind.todense()), driven=driven)


def apply_superoperator(sop: Superoperator, rho: np.ndarray) -> np.ndarray:
    return unvec(sop.data @ vec(rho), sop.dim)


def _trace_row(d: int) -> np.ndarray:
    row = np.zeros(d * d, dtype=complex)
    row[np.arange(d) * d + np.arange(d)] = 1.0
    return row


def steady_state(sop: Superoperator) -> DensityMatrix:
    """Trace-normalized null vector of the generator.

    Solved through a bordered linear system (one row replaced by the trace
    constraint). A second bordered system with a different replaced row,
    solved from the same LU factorization by a Woodbury update, guards
    against a degenerate null space, which is reported rather than
    silently resolved.
    """
    d = sop.dim
    n = d * d
    lmat = sop.data
    i00 = sop.basis.index_of(0, 0)
    r1 = i00 * d + i00
    alt = d - 1 if i00 != d - 1 else 0
    r2 = alt * d + alt

    trace = _trace_row(d)
    m1 = lmat.copy()
    m1[r1, :] = trace
    b1 = np.zeros(n, dtype=complex)
    b1[r1] = 1.0
    try:
        lu, piv = lu_factor(m1)
        v1 = lu_solve((lu, piv), b1)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DegenerateSteadyStateError(
            f"bordered steady-state solve is singular: {exc}"
        ) from exc
    scale = float(np.max(np.abs(lmat)))
    residual = float(np.max(np.abs(lmat @ v1)))
    if not np.all(np.isfinite(v1)) or residual > 1e-8 * max(scale, 1.0):
        raise DegenerateSteadyStateError(
            f"steady-state solve did not converge (residual {residual:.3e})"
        )

    # second bordered system M2 (row r1 restored, row r2 replaced) via a
    # rank-2 Woodbury update of M1
    b2 = np.zeros(n, dtype=complex)
    b2[r2] = 1.0
    u = np.zeros((n, 2), dtype=complex)
    u[r1, 0] = 1.0
    u[r2, 1] = 1.0
    vt = np.vstack([lmat[r1, :] - trace, trace - lmat[r2, :]])
    y = lu_solve((lu, piv), b2)
    z = lu_solve((lu, piv), u)
    core = np.eye(2, dtype=complex) + vt @ z
    try:
        w = np.linalg.solve(core, vt @ y)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSteadyStateError(
            f"degeneracy-guard system is singular: {exc}"
        ) from exc
    v2 = y - z @ w
    if not np.all(np.isfinite(v2)) or np.max(np.abs(v1 - v2)) > 1e-6 * max(
        np.max(np.abs(v1)), 1.0
    ):
        raise DegenerateSteadyStateError(
            "steady state is not unique: two trace-normalized null vectors differ"
        )

    rho = DensityMatrix(basis=sop.basis, data=unvec(v1, d), residual=residual)
    return rho.validate()


def time_evolve(sop: Superoperator, rho0: DensityMatrix, t_grid,
                rtol: float = 1e-8, atol: float = 1e-12) -> list[DensityMatrix]:
    """Integrate d rho/dt = L rho through the ascending time grid.

    Adaptive high-order Runge-Kutta stepping on the real/imaginary split of
    the vectorized state; snapshots are validated within the integration
    tolerance.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) < 1 or np.any(np.diff(t) <= 0) or t[0] < 0:
        raise ValueError("t_grid must be ascending with t0 >= 0")
    if rho0.basis != sop.basis:
        raise ValueError("state and generator act on different bases")

    d = sop.dim
    n = d * d
    lmat = sop.data

    def rhs(_t, y):
        z = lmat @ (y[:n] + 1j * y[n:])
        return np.concatenate((z.real, z.imag))

    z0 = vec(rho0.data)
    y0 = np.concatenate((z0.real, z0.imag))
    sol = solve_ivp(rhs, (t[0], t[-1]), y0, t_eval=t, method="DOP853",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericalFailureError(f"time integration failed: {sol.message}")

    snap_tol = max(1e-8, 100 * rtol)
    out = []
    for k in range(len(t)):
        z = sol.y[:n, k] + 1j * sol.y[n:, k]
        rho = DensityMatrix(basis=sop.basis, data=unvec(z, d))
        out.append(rho.validate(hermiticity_tol=snap_tol, trace_tol=snap_tol,
                                psd_floor=-snap_tol))
    return out


def liouvillian_spectrum(sop: Superoperator, count: int,
                         with_eigenmatrices: bool = True) -> LiouvillianSpectrum:
    """The ``count`` eigenvalues of largest real part, with eigenmatrices."""
    n = sop.dim**2
    if not 1 <= count <= n:
        raise ValueError(f"count must be in [1, {n}]")
    try:
        vals, vecs = np.linalg.eig(sop.data)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"dense eigensolve failed: {exc}") from exc
    order = np.lexsort((vals.imag, -vals.real))[:count]
    vals = vals[order]
    mats = None
    if with_eigenmatrices:
        mats = []
        for k in range(count):
            m = unvec(vecs[:, order[k]], sop.dim)
            mats.append(m / np.linalg.norm(m))
    return LiouvillianSpectrum(eigenvalues=vals, eigenmatrices=mats)


def coherence_sector_pair(sop: Superoperator) -> LiouvillianSpectrum:
    """Eigenvalue pair living on the one-excitation x vacuum coherence block.

    For the undriven generator this sector is exactly invariant and its two
    eigenvalues are -i times the one-photon eigenvalues of the non-Hermitian
    Hamiltonian; their coalescence defines the tracked LEP.

    Beyond the EP the sector eigenvalues are real and exactly degenerate
    with their bra-sector mirrors, so the eigensolver may hand back
    cross-sector mixtures; the pair is therefore chosen one per distinct
    eigenvalue and the overlap diagnostic is evaluated on the sector
    projection, which is itself an exact eigenvector.
    """
    d = sop.dim
    basis = sop.basis
    i00 = basis.index_of(0, 0)
    k10 = i00 * d + basis.index_of(1, 0)
    k01 = i00 * d + basis.index_of(0, 1)
    vals, vecs = np.linalg.eig(sop.data)
    weight = (np.abs(vecs[k10, :]) ** 2 + np.abs(vecs[k01, :]) ** 2) / np.sum(
        np.abs(vecs) ** 2, axis=0
    )
    order = np.argsort(weight)[::-1]
    if weight[order[1]] < 0.25:
        raise NumericalFailureError(
            "could not isolate the single-photon coherence sector "
            f"(top weights {weight[order[:2]]})"
        )
    first = order[0]
    deg_tol = 1e-10 * max(1.0, abs(vals[first]))
    second = None
    for idx in order[1:]:
        if weight[idx] < 0.25:
            break
        if abs(vals[idx] - vals[first]) > deg_tol:
            second = idx
            break
    if second is None:
        second = order[1]  # genuine coalescence: all candidates share the value

    def sector_vec(col: int) -> np.ndarray:
        proj = np.zeros(2, dtype=complex)
        proj[0] = vecs[k10, col]
        proj[1] = vecs[k01, col]
        nrm = np.linalg.norm(proj)
        if nrm == 0.0:
            raise NumericalFailureError("selected eigenvector has no sector support")
        return proj / nrm

    pa, pb = sector_vec(first), sector_vec(second)
    overlap = abs(np.vdot(pa, pb))
    gap = abs(vals[first] - vals[second])
    mats = [unvec(vecs[:, first], d) / np.linalg.norm(vecs[:, first]),
            unvec(vecs[:, second], d) / np.linalg.norm(vecs[:, second])]
    return LiouvillianSpectrum(
        eigenvalues=np.array([vals[first], vals[second]]), eigenmatrices=mats,
        tracked_pair=(int(first), int(second)), gap=float(gap),
        overlap=float(overlap),
    )


def lep_locate(p: SystemParams, gamma_tip_range: tuple[float, float],
               grid: int = 41, *, cutoff: tuple[int, int] = (2, 2),
               gap_threshold: float = 1e-3, overlap_threshold: float = 0.99,
               tol: float = 1e-9) -> LepResult:
    """Locate the Liouvillian EP as the gap minimum of the tracked pair.

    Scans the undriven lab-frame generator over gamma_tip, requires an
    interior gap minimum, refines it by golden-section search, and checks
    the coalescence diagnostics (gap below ``gap_threshold`` in units of
    gamma_1', eigenmatrix overlap above ``overlap_threshold``).
    """
    lo, hi = gamma_tip_range
    if not lo < hi:
        raise ValueError("gamma_tip_range must be increasing")
    basis = build_basis(per_mode=cutoff)

    def pair_at(gt: float) -> LiouvillianSpectrum:
        sop = build_liouvillian(p.with_(gamma_tip=gt), basis, driven=False)
        return coherence_sector_pair(sop)

    gts = np.linspace(lo, hi, grid)
    rows = []
    gaps = np.empty(grid)
    prev = None
    for i, gt in enumerate(gts):
        sp = pair_at(float(gt))
        gaps[i] = sp.gap
        pair = sp.eigenvalues
        if prev is not None and abs(pair[0] - prev[1]) + abs(pair[1] - prev[0]) < \
                abs(pair[0] - prev[0]) + abs(pair[1] - prev[1]):
            pair = pair[::-1]  # nearest-neighbor continuation of branch tags
        prev = pair
        for tag, lam in zip(("a", "b"), pair):
            rows.append({
                "gamma_tip": float(gt), "branch": tag,
                "re_Lambda": lam.real, "im_Lambda": lam.imag,
                "gap": sp.gap, "overlap": sp.overlap,
            })

    imin = int(np.argmin(gaps))
    if imin == 0 or imin == grid - 1:
        raise LepNotFoundError(
            f"no interior gap minimum in gamma_tip range [{lo}, {hi}]"
        )
    res = golden_section_minimize(
        lambda gt: pair_at(gt).gap, float(gts[imin - 1]), float(gts[imin + 1]), tol=tol
    )
    best = pair_at(res.x)
    if best.gap > gap_threshold * p.gamma1_prime or best.overlap < overlap_threshold:
        raise LepNotFoundError(
            f"gap minimum at gamma_tip = {res.x:.6f} fails the coalescence "
            f"criteria (gap {best.gap:.3e}, overlap {best.overlap:.6f})"
        )
    return LepResult(gamma_tip=res.x, gap=best.gap, overlap=best.overlap,
                     bracket=res.bracket, grid_rows=rows)

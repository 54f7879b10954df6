"""Parameter sweeps, critical-point extraction, and figure-level datasets.

Every experiment produces a tidy row set that serializes to CSV with full
double precision plus a JSON provenance sidecar; re-running with the same
configuration reproduces byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import __version__
from .analytic import (
    AMPLITUDE_STATES,
    SingularParameterError,
    analytic_observables,
    steady_amplitudes,
)
from .hilbert import build_basis, mode_operator
from .liouvillian import (
    LepNotFoundError,
    Superoperator,
    build_liouvillian,
    lep_locate,
    steady_state,
)
from .model import SystemParams
from .observables import excitation_spectrum, photon_statistics
from .formatting import format_value
from .search import bisect_root, golden_section_minimize
from .spectral import hep_location, one_photon_eigensystem_closed

__all__ = [
    "SweepTable",
    "CriticalPoint",
    "CriticalPoints",
    "SpectrumMap",
    "resolve_delta",
    "sweep_loss",
    "critical_points",
    "spectrum_map",
    "ep_agreement",
    "write_csv",
    "write_provenance",
]

BACKENDS = ("analytic", "lindblad")
DEFAULT_CUTOFF = (5, 5)
REFINE_TOL = 1e-3  # gamma_tip critical points resolved to 1e-3 * gamma_1'


def _sidecar_path(path) -> str:
    s = str(path)
    return (s[:-4] if s.endswith(".csv") else s) + ".provenance.json"


def resolve_delta(p: SystemParams, protocol) -> float:
    """Drive detuning for one sweep point.

    ``track_upper_branch`` puts the drive on the upper one-photon branch:
    omega_l = Re lambda_1^+, i.e. delta = omega_c - Re lambda_1^+ (zero at
    and beyond the EP, where the branches coalesce at omega_c). A
    ``("fixed", value)`` protocol returns the value unchanged.
    """
    if protocol == "track_upper_branch":
        eig = one_photon_eigensystem_closed(p)
        lam_plus = eig.eigenvalues[list(eig.labels).index("+")]
        return float(p.omega_c - lam_plus.real)
    if isinstance(protocol, (tuple, list)) and len(protocol) == 2 and protocol[0] == "fixed":
        return float(protocol[1])
    raise ValueError(f"unknown detuning protocol {protocol!r}")


def _protocol_tag(protocol) -> str:
    if protocol == "track_upper_branch":
        return "track_upper_branch"
    return f"fixed({protocol[1]!r})"


@dataclass
class SweepTable:
    """One row per sweep point plus a provenance block."""

    columns: list[str]
    rows: list[dict]
    provenance: dict

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)

    def to_csv(self, path) -> None:
        write_csv(path, self.columns, self.rows)
        write_provenance(_sidecar_path(path), self.provenance)


@dataclass(frozen=True)
class CriticalPoint:
    value: float
    bracket: tuple[float, float]
    residual: float


@dataclass(frozen=True)
class CriticalPoints:
    """Loss values of the intensity minimum, g2 = 1 crossings, and EPs."""

    cp_c: CriticalPoint | None = None
    cp_q_down: CriticalPoint | None = None
    cp_q_up: CriticalPoint | None = None
    ep: float | None = None
    lep: CriticalPoint | None = None


def _sweep_columns(backends) -> list[str]:
    cols = ["gamma_tip", "delta_used", "omega_plus", "omega_minus",
            "kappa_plus", "kappa_minus"]
    for bk in backends:
        cols += [f"{bk}_n1", f"{bk}_n2", f"{bk}_g2", f"{bk}_g3"]
        if bk == "analytic":
            cols.append("analytic_g2_approx")
        cols += [f"{bk}_p{m}{n}" for m, n in AMPLITUDE_STATES]
        cols.append(f"{bk}_failed")
    return cols


class _LindbladEvaluator:
    """Steady-state observables with the gamma_tip/delta dependence of the
    generator assembled once and updated by linear combination."""

    def __init__(self, p: SystemParams, cutoff=DEFAULT_CUTOFF):
        self.p = p
        self.basis = build_basis(per_mode=cutoff)
        base = p.with_(gamma_tip=0.0, delta=0.0)
        self.l_base = build_liouvillian(base, self.basis, driven=True).data
        eye = np.eye(self.basis.size)
        a1 = mode_operator(self.basis, 1, "annihilate").data
        a2 = mode_operator(self.basis, 2, "annihilate").data
        n2 = a2.conj().T @ a2
        ntot = a1.conj().T @ a1 + n2
        self.l_tip = (np.kron(a2.conj(), a2) - 0.5 * np.kron(eye, n2)
                      - 0.5 * np.kron(n2.T, eye))
        self.l_delta = -1j * (np.kron(eye, ntot) - np.kron(ntot.T, eye))

    def __call__(self, gamma_tip: float, delta: float):
        data = self.l_base + gamma_tip * self.l_tip + delta * self.l_delta
        sop = Superoperator(basis=self.basis, data=data, driven=True)
        rho = steady_state(sop)
        return photon_statistics(rho)


def sweep_loss(p: SystemParams, gamma_tip_grid, protocol="track_upper_branch",
               backends=BACKENDS, cutoff=DEFAULT_CUTOFF,
               provenance_extra: dict | None = None) -> SweepTable:
    """Evaluate all observables over an ascending gamma_tip grid.

    The detuning is resolved per point by the protocol; a backend failure
    at a point marks the row and the sweep continues.
    """
    gts = np.asarray(gamma_tip_grid, dtype=float)
    if np.any(np.diff(gts) <= 0):
        raise ValueError("gamma_tip grid must be strictly ascending")
    for bk in backends:
        if bk not in BACKENDS:
            raise ValueError(f"unknown backend {bk!r}")

    lind = _LindbladEvaluator(p, cutoff) if "lindblad" in backends else None
    rows = []
    for gt in gts:
        pg = p.with_(gamma_tip=float(gt))
        delta = resolve_delta(pg, protocol)
        pg = pg.with_(delta=delta)
        eig = one_photon_eigensystem_closed(pg)
        i_plus = list(eig.labels).index("+")
        i_minus = 1 - i_plus
        row = {
            "gamma_tip": float(gt),
            "delta_used": delta,
            "omega_plus": float(eig.omega[i_plus]),
            "omega_minus": float(eig.omega[i_minus]),
            "kappa_plus": float(eig.kappa[i_plus]),
            "kappa_minus": float(eig.kappa[i_minus]),
        }
        if "analytic" in backends:
            try:
                amps = steady_amplitudes(pg)
                obs = analytic_observables(amps)
                pops = amps.populations()
                row.update(analytic_n1=obs.n1, analytic_n2=obs.n2,
                           analytic_g2=obs.g2, analytic_g3=obs.g3,
                           analytic_g2_approx=obs.g2_approx)
                row.update({f"analytic_p{m}{n}": pops[(m, n)]
                            for m, n in AMPLITUDE_STATES})
                row["analytic_failed"] = 0
            except (SingularParameterError, ValueError):
                row["analytic_failed"] = 1
        if "lindblad" in backends:
            try:
                stats = lind(float(gt), delta)
                row.update(lindblad_n1=stats.n1, lindblad_n2=stats.n2,
                           lindblad_g2=stats.g2, lindblad_g3=stats.g3)
                row.update({f"lindblad_p{m}{n}": stats.p_mn[(m, n)]
                            for m, n in AMPLITUDE_STATES})
                row["lindblad_failed"] = 0
            except (np.linalg.LinAlgError, ValueError, RuntimeError):
                row["lindblad_failed"] = 1
        rows.append(row)

    provenance = {
        "experiment": "sweep_loss",
        "params": asdict(p),
        "protocol": _protocol_tag(protocol),
        "backends": list(backends),
        "cutoff": list(cutoff),
        "gamma_tip_grid": {"start": float(gts[0]), "stop": float(gts[-1]),
                           "num": int(len(gts))},
        "tolerances": {"critical_point_refine": REFINE_TOL},
        "code_version": __version__,
    }
    if provenance_extra:
        provenance.update(provenance_extra)
    return SweepTable(columns=_sweep_columns(backends), rows=rows,
                      provenance=provenance)


def _table_protocol(table: SweepTable):
    tag = table.provenance.get("protocol", "track_upper_branch")
    if tag == "track_upper_branch":
        return tag
    if tag.startswith("fixed(") and tag.endswith(")"):
        return ("fixed", float(tag[6:-1]))
    raise ValueError(f"cannot parse protocol tag {tag!r}")


def _analytic_evaluator(p: SystemParams, protocol):
    def eval_obs(gt: float):
        pg = p.with_(gamma_tip=float(gt))
        pg = pg.with_(delta=resolve_delta(pg, protocol))
        return analytic_observables(steady_amplitudes(pg))
    return eval_obs


def critical_points(table: SweepTable, p: SystemParams | None = None) -> CriticalPoints:
    """Extract CP_c, CP_q(down/up), the Eq.-(3) EP and the located LEP.

    Brackets come from the (sorted) table; refinement runs on the analytic
    evaluator when ``p`` is given, otherwise on a cubic interpolant of the
    table columns. Missing sign changes leave the corresponding fields
    unset rather than fabricated.
    """
    if len(table.rows) < 5:
        raise ValueError("need at least 5 sweep rows")
    rows = sorted(table.rows, key=lambda r: r["gamma_tip"])
    gts = np.array([r["gamma_tip"] for r in rows])

    backend = "lindblad" if "lindblad_n1" in rows[0] else "analytic"
    n1 = np.array([r.get(f"{backend}_n1", np.nan) for r in rows])
    g2 = np.array([r.get(f"{backend}_g2", np.nan) for r in rows])

    if p is not None:
        protocol = _table_protocol(table)
        obs = _analytic_evaluator(p, protocol)
        n1_of = lambda gt: obs(gt).n1
        g2_of = lambda gt: obs(gt).g2
    else:
        n1_spline = CubicSpline(gts, n1)
        g2_spline = CubicSpline(gts, g2)
        n1_of = lambda gt: float(n1_spline(gt))
        g2_of = lambda gt: float(g2_spline(gt))

    # classical critical point: discrete minimum + golden-section refinement
    cp_c = None
    imin = int(np.argmin(n1))
    if 0 < imin < len(gts) - 1:
        lo, hi = float(gts[imin - 1]), float(gts[imin + 1])
        res = golden_section_minimize(n1_of, lo, hi, tol=REFINE_TOL)
        cp_c = CriticalPoint(value=res.x, bracket=res.bracket,
                             residual=res.bracket[1] - res.bracket[0])

    # quantum critical points: bisection inside g2 - 1 sign-change brackets;
    # a grid point sitting exactly on the crossing is taken as-is
    sgn = np.sign(g2 - 1.0)
    crossings = []
    for i in np.where(sgn == 0.0)[0]:
        crossings.append(CriticalPoint(value=float(gts[i]),
                                       bracket=(float(gts[i]), float(gts[i])),
                                       residual=0.0))
    for i in np.where(sgn[:-1] * sgn[1:] < 0)[0]:
        res = bisect_root(lambda gt: g2_of(gt) - 1.0, float(gts[i]),
                          float(gts[i + 1]), tol=REFINE_TOL)
        crossings.append(CriticalPoint(value=res.x, bracket=res.bracket,
                                       residual=abs(res.fx)))
    crossings.sort(key=lambda cp: cp.value)
    cp_q_down = crossings[0] if crossings else None
    cp_q_up = crossings[-1] if len(crossings) >= 2 else None

    ep = None
    lep = None
    if p is not None:
        ep = hep_location(p.J, p.gamma1_prime, p.gamma_2)
        try:
            res = lep_locate(p, (max(ep - 0.5, 0.0), ep + 0.5), grid=21)
            lep = CriticalPoint(value=res.gamma_tip, bracket=res.bracket,
                                residual=res.gap)
        except LepNotFoundError:
            lep = None

    return CriticalPoints(cp_c=cp_c, cp_q_down=cp_q_down, cp_q_up=cp_q_up,
                          ep=ep, lep=lep)


@dataclass
class SpectrumMap:
    """S1 over a (gamma_tip, delta) grid with per-row peak positions."""

    gamma_tip: np.ndarray
    delta: np.ndarray
    s1: np.ndarray  # shape (len(gamma_tip), len(delta))
    peak_rows: list[dict]
    provenance: dict

    def to_csv(self, path) -> None:
        rows = []
        for i, gt in enumerate(self.gamma_tip):
            for j, d in enumerate(self.delta):
                rows.append({"gamma_tip": float(gt), "delta": float(d),
                             "s1": float(self.s1[i, j])})
        write_csv(path, ["gamma_tip", "delta", "s1"], rows)
        write_provenance(_sidecar_path(path), self.provenance)


def spectrum_map(p: SystemParams, gamma_tip_grid, delta_grid,
                 backend: str = "analytic") -> SpectrumMap:
    """Excitation-spectrum map with peak positions and branch overlay."""
    gts = np.asarray(gamma_tip_grid, dtype=float)
    deltas = np.asarray(delta_grid, dtype=float)
    if gts.size == 0 or deltas.size == 0:
        raise ValueError("grids must be nonempty")

    s1 = np.empty((len(gts), len(deltas)))
    peak_rows = []
    for i, gt in enumerate(gts):
        pg = p.with_(gamma_tip=float(gt))
        spec = excitation_spectrum(pg, deltas, backend=backend)
        s1[i] = spec.s1
        eig = one_photon_eigensystem_closed(pg)
        i_plus = list(eig.labels).index("+")
        row = {
            "gamma_tip": float(gt),
            "n_peaks": spec.peak_count,
            "peak_delta_1": spec.peak_deltas[0] if spec.peak_count > 0 else None,
            "peak_delta_2": spec.peak_deltas[1] if spec.peak_count > 1 else None,
            "omega_plus": float(eig.omega[i_plus]),
            "omega_minus": float(eig.omega[1 - i_plus]),
        }
        peak_rows.append(row)

    provenance = {
        "experiment": "spectrum_map",
        "params": asdict(p),
        "backend": backend,
        "gamma_tip_grid": {"start": float(gts[0]), "stop": float(gts[-1]),
                           "num": int(len(gts))},
        "delta_grid": {"start": float(deltas[0]), "stop": float(deltas[-1]),
                       "num": int(len(deltas))},
        "code_version": __version__,
    }
    return SpectrumMap(gamma_tip=gts, delta=deltas, s1=s1,
                       peak_rows=peak_rows, provenance=provenance)


def ep_agreement(p: SystemParams, j_grid, *, lep_halfwidth: float = 1.0,
                 lep_grid: int = 21) -> list[dict]:
    """Hamiltonian vs Liouvillian EP location per coupling strength.

    Rows carry the closed-form HEP, the located LEP and their relative
    discrepancy; a failed LEP search marks the row instead of aborting.
    """
    js = np.asarray(j_grid, dtype=float)
    if np.any(np.diff(js) <= 0) or np.any(js <= 0):
        raise ValueError("J grid must be ascending and positive")
    rows = []
    for j in js:
        pj = p.with_(J=float(j))
        hep = hep_location(pj.J, pj.gamma1_prime, pj.gamma_2)
        row = {"J": float(j), "hep": hep, "lep": None, "rel_discrepancy": None,
               "found": 0}
        try:
            res = lep_locate(pj, (max(hep - lep_halfwidth, 0.0), hep + lep_halfwidth),
                             grid=lep_grid)
            row.update(lep=res.gamma_tip,
                       rel_discrepancy=abs(res.gamma_tip - hep) / hep, found=1)
        except LepNotFoundError:
            pass
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# dataset writers

def write_csv(path, columns, rows, meta: dict | None = None) -> None:
    """CSV with shortest round-trip float formatting; optional '#' metadata
    header lines carrying the full parameter set."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if meta:
            for key in sorted(meta):
                fh.write(f"# {key} = {format_value(meta[key])}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(c)) for c in columns])


def write_provenance(path, provenance: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(provenance, fh, indent=2, sort_keys=True)
        fh.write("\n")

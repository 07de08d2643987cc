"""Measured quantities: frequencies, fidelities, probabilities, peak tracks.

Projection conventions
----------------------
Strip (Landau-gauge) runs prepare states of the form phi_n(x) e^{i k_s y}
times a slowly varying longitudinal envelope set by the storage stage.
The level-resolved diagnostics first collapse the coherence onto the
known winding sector,

    psi(x) = integral dy e^{-i k_s y} rho21(x, y),

and project the result on the transverse eigenfunctions.  This matches
what the level populations mean physically: the longitudinal envelope is
a spectator (all windings in the same level are degenerate) and its slow
erosion at the medium boundaries would otherwise masquerade as level
decay.  The full-2D projection against box-normalized strip states is
available via ``reduce="full2d"``.

Oscillator runs are y-uniform after retrieval, and the same collapse
(k_s = 0, i.e. the plain y-marginal) is used before projecting on the
1D oscillator eigenstates.

Frequencies use the pointwise phase-rotation estimator
Re[i (d rho/dt) / rho] with centered differences across snapshots,
aggregated by an amplitude-weighted median over nodes above 1% of the
peak amplitude (the raw ratio diverges at nodes of rho21).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, TimeGridMismatchError
from .model import GridSpec
from .numerics import parabolic_peak, weighted_median
from .series import TimeSeries
from .states import BasisSet, ComplexField2D, landau_strip_transverse


@dataclass
class DiagnosticRecord:
    """Per-snapshot scalars exported to the analysis CSV."""

    t: float
    omega_inst: float | None
    fidelities: dict = field(default_factory=dict)
    probabilities: dict = field(default_factory=dict)
    peak_x: float | None = None
    norm: float = 0.0


class TransverseBasis:
    """1D x-profiles phi_n for the winding-collapsed projections."""

    def __init__(self, grid: GridSpec, length: float, max_n: int, center: float = 0.0,
                 k_s: float = 0.0):
        self.grid = grid
        self.length = length
        self.max_n = max_n
        self.center = center
        self.k_s = k_s
        x = grid.x()
        self.modes = []
        for n in range(max_n + 1):
            v = landau_strip_transverse(n, x, center, length).astype(np.complex128)
            v /= math.sqrt(np.sum(np.abs(v) ** 2) * grid.dx)
            self.modes.append(v)

    def collapse(self, f: ComplexField2D) -> np.ndarray:
        """Winding-sector marginal psi(x) = sum_y e^{-i k_s y} rho(x,y) dy."""
        if self.k_s != 0.0:
            w = np.exp(-1j * self.k_s * f.grid.y())[:, None]
            return np.sum(f.values * w, axis=0) * f.grid.dy
        return np.sum(f.values, axis=0) * f.grid.dy

    def coefficients(self, f: ComplexField2D) -> tuple[np.ndarray, float]:
        """Projection coefficients of the collapsed profile and its norm^2."""
        psi = self.collapse(f)
        nrm = float(np.sum(np.abs(psi) ** 2) * self.grid.dx)
        coeffs = np.array([np.sum(np.conj(m) * psi) * self.grid.dx for m in self.modes])
        return coeffs, nrm


def _as_projector(basis):
    if isinstance(basis, (BasisSet, TransverseBasis)):
        return basis
    raise TypeError(f"unsupported basis type {type(basis)!r}")


def fidelity(series: TimeSeries, basis, reduce: str = "collapse") -> dict:
    """F_{n'}(t) = |<n'|rho21(t)>|^2 / <rho21(t)|rho21(t)>.

    ``reduce="collapse"`` (default) projects in the winding-collapsed
    sector as described in the module docstring; ``reduce="full2d"``
    uses box-normalized 2D inner products (requires a :class:`BasisSet`).
    Returns a dict n' -> array over snapshots.
    """
    basis = _as_projector(basis)
    nmax = basis.max_n
    out = {n: np.empty(len(series)) for n in range(nmax + 1)}
    for i, f in enumerate(series.fields):
        if reduce == "collapse" and isinstance(basis, TransverseBasis):
            coeffs, nrm = basis.coefficients(f)
        elif reduce == "full2d" and isinstance(basis, BasisSet):
            coeffs = basis.project(f)
            nrm = f.norm_sq()
        else:
            raise ParameterError(f"reduce={reduce!r} incompatible with {type(basis).__name__}")
        if nrm == 0:
            raise ParameterError(f"zero-norm snapshot at t={series.times[i]:g}s")
        for n in range(nmax + 1):
            out[n][i] = abs(coeffs[n]) ** 2 / nrm
    return out


def state_probability(series: TimeSeries, basis, t0: float, reduce: str = "collapse") -> dict:
    """P_{n'}(t) = |<n'|rho21(t)>|^2 / <rho21(t0)|rho21(t0)> (decaying total)."""
    basis = _as_projector(basis)
    i0 = series.index_at(t0, tol=None)
    nmax = basis.max_n
    coeff_list = []
    for f in series.fields:
        if reduce == "collapse" and isinstance(basis, TransverseBasis):
            coeffs, _ = basis.coefficients(f)
        elif reduce == "full2d" and isinstance(basis, BasisSet):
            coeffs = basis.project(f)
        else:
            raise ParameterError(f"reduce={reduce!r} incompatible with {type(basis).__name__}")
        coeff_list.append(coeffs)
    if reduce == "collapse":
        ref_norm = basis.coefficients(series.fields[i0])[1]
    else:
        ref_norm = series.fields[i0].norm_sq()
    if ref_norm == 0:
        raise ParameterError("zero-norm reference snapshot")
    return {
        n: np.array([abs(c[n]) ** 2 for c in coeff_list]) / ref_norm for n in range(nmax + 1)
    }


def instantaneous_frequency(
    series: TimeSeries, window: tuple[float, float] | None = None, floor: float = 0.01
) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude-weighted median of Re[i (drho/dt)/rho] per interior snapshot.

    Returns (times, omega).  ``window`` restricts to t in [t0, t1];
    nodes below ``floor`` times the peak amplitude are excluded.
    """
    idx = range(1, len(series) - 1) if window is None else [
        i for i in series.window(*window) if 0 < i < len(series) - 1
    ]
    idx = list(idx)
    if len(idx) < 1:
        raise ParameterError("frequency extraction needs at least 3 snapshots in the window")
    ts, oms = [], []
    for i in idx:
        r_prev = series.fields[i - 1].values
        r_next = series.fields[i + 1].values
        r_mid = series.fields[i].values
        dt2 = series.times[i + 1] - series.times[i - 1]
        amp = np.abs(r_mid)
        mask = amp > floor * amp.max()
        if not np.any(mask):
            continue
        ratio = 1j * (r_next[mask] - r_prev[mask]) / dt2 / r_mid[mask]
        oms.append(weighted_median(np.real(ratio), amp[mask] ** 2))
        ts.append(series.times[i])
    return np.asarray(ts), np.asarray(oms)


def track_peak(series: TimeSeries, y_slice: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Parabolic-interpolated argmax of |rho21(x, y_slice)|^2 per snapshot."""
    g = series.grid
    iy = 0 if g.ny == 1 else int(round((y_slice - g.y_min) / g.dy))
    if not 0 <= iy < g.ny:
        raise ParameterError(f"y_slice={y_slice:g} outside the grid")
    x = g.x()
    out = []
    for f in series.fields:
        row = np.abs(f.values[iy, :]) ** 2
        if row.max() == 0:
            raise ParameterError("zero slice; cannot track a peak")
        out.append(parabolic_peak(x, row))
    return series.times_array(), np.asarray(out)


def _collapse_to_1d(f: ComplexField2D) -> np.ndarray:
    return np.sum(f.values, axis=0) * f.grid.dy


def cross_overlap(series_a: TimeSeries, series_b: TimeSeries,
                  t_tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Normalized overlap |<a|b>|^2 / (||a||^2 ||b||^2) at common snapshot times.

    Grids must match; when exactly one series is 1D (ny == 1), the other
    is collapsed to its y-marginal first.  Raises
    :class:`TimeGridMismatchError` when no snapshot times align.
    """
    ga, gb = series_a.grid, series_b.grid
    collapse_a = collapse_b = False
    if ga.ny != gb.ny:
        if ga.ny == 1:
            collapse_b = True
        elif gb.ny == 1:
            collapse_a = True
    if ga.nx != gb.nx or abs(ga.dx - gb.dx) > 1e-15:
        raise TimeGridMismatchError(
            f"incompatible x-grids: nx {ga.nx} vs {gb.nx}, dx {ga.dx:g} vs {gb.dx:g}"
        )
    if not (collapse_a or collapse_b) and (ga.ny != gb.ny or abs(ga.dy - gb.dy) > 1e-15):
        raise TimeGridMismatchError(f"incompatible y-grids: ny {ga.ny} vs {gb.ny}")
    ta, tb = series_a.times_array(), series_b.times_array()
    ts, vals = [], []
    for i, t in enumerate(ta):
        j = int(np.argmin(np.abs(tb - t)))
        if abs(tb[j] - t) > t_tol:
            continue
        fa, fb = series_a.fields[i], series_b.fields[j]
        if collapse_a or collapse_b:
            va = _collapse_to_1d(fa) if collapse_a else fa.values[0, :]
            vb = _collapse_to_1d(fb) if collapse_b else fb.values[0, :]
            num = abs(np.vdot(va, vb)) ** 2
            den = float(np.sum(np.abs(va) ** 2) * np.sum(np.abs(vb) ** 2))
        else:
            num = abs(np.vdot(fa.values, fb.values)) ** 2
            den = float(np.sum(np.abs(fa.values) ** 2) * np.sum(np.abs(fb.values) ** 2))
        if den == 0:
            raise ParameterError(f"zero-norm snapshot at t={t:g}s")
        ts.append(t)
        vals.append(num / den)
    if not ts:
        raise TimeGridMismatchError("no common snapshot times within tolerance")
    return np.asarray(ts), np.asarray(vals)


def rabi_frequency(alpha: float, omega_c: float, delta_p: float, omega_E: float, n: int) -> float:
    """Drive Rabi frequency (alpha omega_c / 4) sqrt((n+1) omega_E / delta_p)."""
    if delta_p <= 0:
        raise ParameterError("rabi_frequency requires delta_p > 0")
    return alpha * omega_c / 4.0 * math.sqrt((n + 1) * omega_E / delta_p)


def perturbed_frequency(n: int, beta: float, omega_E: float, warn=None) -> float:
    """First-order level frequency (n + 1/2) w_E + beta (n^2 + n + 1/2) w_E.

    Accurate for beta << 1; ``warn`` (a callable taking a string) is
    invoked for beta > 0.3 where second-order corrections are sizeable.
    """
    if beta > 0.3 and warn is not None:
        warn(f"perturbed_frequency: beta={beta:g} outside the perturbative regime")
    return (n + 0.5) * omega_E + beta * (n * n + n + 0.5) * omega_E


def diffusion_transition_amplitudes(n: int, gamma: float, delta_p: float, omega_B: float) -> dict:
    """Matrix elements of the dissipative term between levels n and n, n +- 2.

    Returns {m: amplitude} with the common prefactor i gamma hbar w_B /
    (8 delta_p) folded in (amplitudes are per hbar, i.e. angular
    frequencies).  Entries with m < 0 are omitted.
    """
    if n < 0:
        raise ParameterError("level index must be non-negative")
    pref = 1j * gamma * omega_B / (8.0 * delta_p)
    out = {n: -pref * (2 * n + 1)}
    if n >= 2:
        out[n - 2] = pref * math.sqrt(n * (n - 1))
    out[n + 2] = pref * math.sqrt((n + 1) * (n + 2))
    return out


def first_local_minimum(
    ts: np.ndarray, values: np.ndarray, t_start: float = -math.inf, smooth: int = 3
) -> float | None:
    """Time of the first local minimum after ``t_start`` (3-point smoothed)."""
    v = np.asarray(values, dtype=float)
    if smooth > 1:
        kernel = np.ones(smooth) / smooth
        v = np.convolve(v, kernel, mode="same")
    for i in range(1, len(v) - 1):
        if ts[i] <= t_start:
            continue
        if v[i] < v[i - 1] and v[i] <= v[i + 1]:
            return float(ts[i])
    return None


def oscillation_summary(
    ts: np.ndarray, xs: np.ndarray, center: float, t_early: float, t_late: float
) -> dict:
    """Summary of a damped peak-position oscillation about ``center``.

    Returns the displacement amplitudes near the two probe times and an
    angular-frequency estimate from the first extremum pair of the
    displacement (half period between the first maximum of |d| and the
    following extremum of opposite sign).
    """
    d = np.asarray(xs) - center
    amp_early = abs(d[np.argmin(np.abs(ts - t_early))])
    amp_late = abs(d[np.argmin(np.abs(ts - t_late))])
    sign0 = np.sign(d[np.argmin(np.abs(ts - t_early))]) or 1.0
    s = sign0 * d
    # first maximum of the signed displacement, then the following minimum
    i_max = None
    for i in range(1, len(s) - 1):
        if s[i] >= s[i - 1] and s[i] > s[i + 1]:
            i_max = i
            break
    omega = None
    if i_max is not None:
        rest = s[i_max:]
        i_min = None
        for j in range(1, len(rest) - 1):
            if rest[j] <= rest[j - 1] and rest[j] < rest[j + 1] and rest[j] < 0:
                i_min = i_max + j
                break
        if i_min is not None:
            half_period = ts[i_min] - ts[i_max]
            if half_period > 0:
                omega = math.pi / half_period
    return {"amp_early": float(amp_early), "amp_late": float(amp_late), "omega": omega}


def compute_records(
    series: TimeSeries,
    basis=None,
    t0: float | None = None,
    reduce: str = "collapse",
) -> list[DiagnosticRecord]:
    """Bundle every diagnostic into one record per snapshot (for export)."""
    n_snap = len(series)
    t_arr = series.times_array()
    om_map = {}
    if n_snap >= 3:
        ts_om, oms = instantaneous_frequency(series)
        om_map = {t: o for t, o in zip(ts_om, oms)}
    fid = fidelity(series, basis, reduce=reduce) if basis is not None else {}
    prob = (
        state_probability(series, basis, t0, reduce=reduce)
        if basis is not None and t0 is not None
        else {}
    )
    _, peaks = track_peak(series)
    records = []
    for i in range(n_snap):
        records.append(
            DiagnosticRecord(
                t=float(t_arr[i]),
                omega_inst=om_map.get(t_arr[i]),
                fidelities={n: float(v[i]) for n, v in fid.items()},
                probabilities={n: float(v[i]) for n, v in prob.items()},
                peak_x=float(peaks[i]),
                norm=float(series.norms[i]),
            )
        )
    return records

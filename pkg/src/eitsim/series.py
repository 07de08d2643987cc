"""In-memory time series of coherence snapshots produced by the solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import GridSpec
from .numerics import parabolic_peak
from .states import ComplexField2D


@dataclass
class TimeSeries:
    """Sequence of ground-state-coherence snapshots plus per-snapshot scalars.

    ``norms`` holds the squared L2 norm of each snapshot; ``peak_x`` the
    parabolic-interpolated intensity peak along the y = 0 slice (or the
    single row for 1D grids).  ``meta`` is a JSON-compatible record of the
    scenario (used by the persistence layer and the analysis CLI).
    """

    grid: GridSpec
    times: list[float] = field(default_factory=list)
    fields: list[ComplexField2D] = field(default_factory=list)
    norms: list[float] = field(default_factory=list)
    peak_x: list[float] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def append(self, t: float, rho21: ComplexField2D):
        iy = self.slice_index()
        row = np.abs(rho21.values[iy, :]) ** 2
        self.times.append(float(t))
        self.fields.append(rho21)
        self.norms.append(rho21.norm_sq())
        self.peak_x.append(parabolic_peak(self.grid.x(), row))

    def slice_index(self) -> int:
        """Row index of the y = 0 slice (0 for 1D grids)."""
        if self.grid.ny == 1:
            return 0
        return int(round(-self.grid.y_min / self.grid.dy))

    def times_array(self) -> np.ndarray:
        return np.asarray(self.times)

    def index_at(self, t: float, tol: float | None = None) -> int:
        ts = self.times_array()
        i = int(np.argmin(np.abs(ts - t)))
        if tol is not None and abs(ts[i] - t) > tol:
            raise KeyError(f"no snapshot within {tol:g}s of t={t:g}s")
        return i

    def window(self, t0: float, t1: float) -> list[int]:
        ts = self.times_array()
        return [int(i) for i in np.nonzero((ts >= t0) & (ts <= t1))[0]]

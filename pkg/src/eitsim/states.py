"""Analytic wavefunctions: Hermite strips and oscillator eigenstates.

These constructors provide probe injection profiles, hot-start
coherences, and the orthonormal projection bases used by the
diagnostics.  Discrete inner products are plain Riemann sums with
dx*dy weights, matching the second-order accuracy of the solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BasisResolutionError, SupportError
from .model import GridSpec


def hermite(n: int, z):
    """Physicists' Hermite polynomial H_n(z) by the stable three-term recurrence.

    H_0 = 1, H_1 = 2z, H_{n+1} = 2 z H_n - 2 n H_{n-1}.  Accepts scalars
    or arrays.
    """
    if n < 0:
        raise ValueError(f"Hermite index must be non-negative, got {n}")
    z = np.asarray(z, dtype=float)
    h_prev = np.ones_like(z)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * z
    for m in range(1, n):
        h, h_prev = 2.0 * z * h - 2.0 * m * h_prev, h
    return h if h.ndim else float(h)


@dataclass
class ComplexField2D:
    """A complex scalar field sampled on a :class:`GridSpec`.

    ``values`` has shape ``(ny, nx)`` (row-major, x fastest).
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def copy(self) -> "ComplexField2D":
        return ComplexField2D(self.grid, self.values.copy())

    def norm_sq(self) -> float:
        """Riemann-sum L2 norm squared, sum |psi|^2 dx dy."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.cell_area)

    def inner(self, other: "ComplexField2D") -> complex:
        """Riemann-sum inner product <self|other>."""
        if other.values.shape != self.values.shape:
            raise ValueError("fields live on different grids")
        return complex(np.vdot(self.values, other.values) * self.grid.cell_area)

    def normalized(self) -> "ComplexField2D":
        n = math.sqrt(self.norm_sq())
        if n == 0:
            raise ValueError("cannot normalize a zero field")
        return ComplexField2D(self.grid, self.values / n)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ComplexField2D":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))


def _check_strip_support(n: int, k_s: float, x0: float, l_B: float, grid: GridSpec):
    # the guiding center sits at -k_s l_B^2; a displaced strip orbits it
    # with amplitude |x0 + k_s l_B^2|, so the whole orbit must fit
    center = -k_s * l_B**2
    reach = abs(x0 - center) + (math.sqrt(2 * n + 1) + 3.0) * l_B
    if center - reach < grid.x_min or center + reach > grid.x_max:
        raise SupportError(
            f"strip n={n} at x0={x0:.4g} m (guiding center {center:.4g} m) needs "
            f"x in [{center - reach:.4g}, {center + reach:.4g}] m but the grid "
            f"covers [{grid.x_min:.4g}, {grid.x_max:.4g}] m"
        )


def landau_strip_transverse(n: int, x, x0: float, l_B: float):
    """Unnormalized transverse profile H_n(u) exp(-u^2/2), u = (x - x0)/l_B."""
    u = (np.asarray(x, dtype=float) - x0) / l_B
    return hermite(n, u) * np.exp(-0.5 * u**2)


def landau_profile(
    n: int,
    k_s: float,
    grid: GridSpec,
    l_B: float,
    x0: float | None = None,
) -> ComplexField2D:
    """L2-normalized strip state H_n((x-x0)/l_B) e^{i k_s y} e^{-((x-x0)/sqrt2 l_B)^2}.

    ``x0`` defaults to the stationary guiding center -k_s l_B^2.
    """
    if x0 is None:
        x0 = -k_s * l_B**2
    _check_strip_support(n, k_s, x0, l_B, grid)
    trans = landau_strip_transverse(n, grid.x(), x0, l_B)
    phase = np.exp(1j * k_s * grid.y())
    values = np.outer(phase, trans.astype(np.complex128))
    return ComplexField2D(grid, values).normalized()


def qho_profile(n: int, l_E: float, grid: GridSpec) -> ComplexField2D:
    """L2-normalized oscillator eigenstate profile, uniform along y."""
    _check_strip_support(n, 0.0, 0.0, l_E, grid)
    trans = landau_strip_transverse(n, grid.x(), 0.0, l_E)
    values = np.broadcast_to(trans.astype(np.complex128), grid.shape).copy()
    return ComplexField2D(grid, values).normalized()


@dataclass
class BasisSet:
    """An orthonormal family of strip/oscillator states on one grid.

    ``kind`` is ``"landau"`` or ``"qho"``; ``params`` records the lengths
    and wavenumber the states were built with.  The Gram matrix of the
    fields must equal the identity within ``tol`` per entry.
    """

    kind: str
    max_n: int
    grid: GridSpec
    fields: list[ComplexField2D]
    params: dict = field(default_factory=dict)
    gram_deviation: float = 0.0

    def project(self, state: ComplexField2D) -> np.ndarray:
        """Return the complex coefficients <n|state> for n = 0..max_n."""
        return np.array([b.inner(state) for b in self.fields])


def make_basis(
    kind: str,
    max_n: int,
    grid: GridSpec,
    *,
    l_B: float | None = None,
    l_E: float | None = None,
    k_s: float = 0.0,
    x0: float | None = None,
    tol: float = 1e-6,
) -> BasisSet:
    """Build the projection basis and verify discrete orthonormality.

    Raises :class:`BasisResolutionError` when the Gram matrix deviates
    from the identity by more than ``tol`` in any entry (grid too coarse
    or domain too small for ``max_n``).
    """
    if kind == "landau":
        if l_B is None:
            raise ValueError("landau basis requires l_B")
        fields = [landau_profile(n, k_s, grid, l_B, x0=x0) for n in range(max_n + 1)]
        params = {"l_B": l_B, "k_s": k_s, "x0": -k_s * l_B**2 if x0 is None else x0}
    elif kind == "qho":
        if l_E is None:
            raise ValueError("qho basis requires l_E")
        fields = [qho_profile(n, l_E, grid) for n in range(max_n + 1)]
        params = {"l_E": l_E}
    else:
        raise ValueError(f"unknown basis kind {kind!r}")

    gram = np.array([[a.inner(b) for b in fields] for a in fields])
    dev = float(np.max(np.abs(gram - np.eye(max_n + 1))))
    if dev > tol:
        raise BasisResolutionError(
            f"{kind} basis with max_n={max_n} has Gram deviation {dev:.3e} > {tol:.1e} "
            "on this grid"
        )
    return BasisSet(
        kind=kind, max_n=max_n, grid=grid, fields=fields, params=params, gram_deviation=dev
    )

"""Physical parameters, unit conventions, and derived constants.

Conventions used throughout the package:

* SI units everywhere.  Every rate, Rabi frequency and detuning is an
  *angular* frequency in rad/s (so ``gamma = 1e6`` means a 1 MHz decay
  rate in the loose spectroscopic sense).
* ``hbar`` is fixed below; the synthetic charge is e = 1, i.e. vector
  potentials are quoted per unit charge and carry units of kg*m/s.
* ``L_x`` / ``L_y`` are the medium lengths entering the drive gradients;
  the simulation box must satisfy |x| <= L_x so that the transverse
  square-root amplitude profiles sqrt(1 +- x/L_x) stay real.

The key derived quantities for the four-beam stationary-light medium:

* light-matter coupling   eta   = Gamma * xi_x / (2 L_x) = Gamma * xi_y / (2 L_y)
* effective mass          m     = hbar eta^2 / (2 Delta_p Omega_c^2)
* cyclotron frequency     w_B   = Omega_c^2 / (xi_x Gamma)
* magnetic length         l_B   = sqrt(8 Delta_p / (xi_x Gamma)) L_x
                                = 2 sqrt(Delta_p L_x / eta)
* oscillator length       l_E   = (Omega_c / (xi_x Gamma)) sqrt(8 Delta_p / w_E) L_x
                                = sqrt(hbar / (m w_E))
* drive Rabi frequency    W_A   = (alpha Omega_c / 4) sqrt((n+1) w_E / Delta_p)
* lowest-level degeneracy D_lll = L_x L_y / (2 pi l_B^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

HBAR = 1.054571817e-34  # J*s

#: relative tolerance on the x/y coupling-constant consistency check
ETA_CONSISTENCY_RTOL = 1e-12


@dataclass(frozen=True)
class PhysParams:
    """Raw parameters of the three-level medium and its drives.

    Attributes
    ----------
    gamma : spontaneous decay rate of the excited state (rad/s).
    wavelength : probe carrier wavelength (m); sets k = 2 pi / wavelength
        for the diffraction term.
    delta_p : probe one-photon detuning used after retrieval (rad/s).
    delta_p_storage : probe detuning during the storage stage (rad/s);
        ``None`` means "derive from the stored wavenumber" (-V_F k_s).
    omega_c : total control Rabi frequency; each counter-propagating pair
        carries |W_+|^2 + |W_-|^2 = omega_c^2 (rad/s).
    xi_x, xi_y : optical depths along x and y (dimensionless).
    L_x, L_y : medium lengths along x and y (m).
    alpha : drive modulation depth, 0 <= alpha <= 1.
    beta : quartic trap perturbation strength (dimensionless).
    omega_E : harmonic trap frequency (rad/s); 0 when unused.
    omega_d : drive modulation frequency (rad/s); 0 when unused.
    """

    gamma: float
    delta_p: float
    omega_c: float
    xi_x: float
    L_x: float
    xi_y: float | None = None
    L_y: float | None = None
    wavelength: float = 500e-9
    delta_p_storage: float | None = None
    alpha: float = 0.0
    beta: float = 0.0
    omega_E: float = 0.0
    omega_d: float = 0.0

    @property
    def k(self) -> float:
        """Probe carrier wavenumber 2 pi / wavelength (1/m)."""
        return 2.0 * math.pi / self.wavelength

    def invariant_violations(self) -> list[str]:
        """Return human-readable descriptions of violated parameter invariants."""
        bad = []
        for name in ("gamma", "wavelength", "L_x", "xi_x"):
            if getattr(self, name) <= 0:
                bad.append(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("L_y", "xi_y"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                bad.append(f"{name} must be positive, got {v!r}")
        if self.omega_c < 0:
            bad.append(f"omega_c must be non-negative, got {self.omega_c!r}")
        if not 0.0 <= self.alpha <= 1.0:
            bad.append(
                f"alpha must lie in [0, 1] to keep sqrt(1 +- alpha sin) real, got {self.alpha!r}"
            )
        if self.xi_y is not None and self.L_y is not None and self.L_x > 0 and self.xi_x > 0:
            ex = self.gamma * self.xi_x / (2.0 * self.L_x)
            ey = self.gamma * self.xi_y / (2.0 * self.L_y)
            if ex > 0 and abs(ex - ey) > ETA_CONSISTENCY_RTOL * abs(ex):
                bad.append(
                    "coupling-constant consistency xi_x/L_x = xi_y/L_y violated: "
                    f"eta_x={ex:.6e}, eta_y={ey:.6e}"
                )
        return bad


@dataclass(frozen=True)
class GridSpec:
    """Uniform space-time grid for the solvers.

    Nodes sit at x_i = x_min + i dx (i = 0..nx-1) and likewise in y.
    ``ny = 1`` denotes a reduced 1D grid for x-only oscillator runs.
    """

    nx: int
    ny: int
    dx: float
    dy: float
    dt: float
    x_min: float
    y_min: float
    t_end: float

    @property
    def x_max(self) -> float:
        return self.x_min + (self.nx - 1) * self.dx

    @property
    def y_max(self) -> float:
        return self.y_min + (self.ny - 1) * self.dy

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape (ny, nx): y is the slow axis, x the fast axis."""
        return (self.ny, self.nx)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def x(self):
        import numpy as np

        return self.x_min + self.dx * np.arange(self.nx)

    def y(self):
        import numpy as np

        return self.y_min + self.dy * np.arange(self.ny)

    def invariant_violations(self) -> list[str]:
        bad = []
        if self.nx < 3:
            bad.append(f"nx must be >= 3, got {self.nx}")
        if self.ny != 1 and self.ny < 3:
            bad.append(f"ny must be >= 3 (or exactly 1 for x-only runs), got {self.ny}")
        for name in ("dx", "dy", "dt"):
            if getattr(self, name) <= 0:
                bad.append(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.t_end <= 0:
            bad.append(f"t_end must be positive, got {self.t_end!r}")
        return bad


@dataclass(frozen=True)
class DerivedConsts:
    """Derived physical constants; see the module docstring for formulas.

    ``l_E`` and ``omega_A`` are ``None`` when the trap frequency (and, for
    omega_A, the modulation depth) is not configured.  ``omega_A`` is
    quoted for the ground-to-first-excited transition (n = 0).
    ``nu_filling`` is present only when a polariton concentration was
    supplied to :func:`derive_constants`.
    """

    eta: float
    mass: float
    omega_B: float
    l_B: float
    d_lll: float
    l_E: float | None = None
    omega_A: float | None = None
    nu_filling: float | None = None

    def as_dict(self) -> dict:
        out = {
            "eta (1/(s*m))": self.eta,
            "mass (kg)": self.mass,
            "omega_B (rad/s)": self.omega_B,
            "l_B (m)": self.l_B,
            "D_lll": self.d_lll,
        }
        if self.l_E is not None:
            out["l_E (m)"] = self.l_E
        if self.omega_A is not None:
            out["omega_A (rad/s)"] = self.omega_A
        if self.nu_filling is not None:
            out["nu_filling"] = self.nu_filling
        return out


def derive_constants(params: PhysParams, n_D: float | None = None) -> DerivedConsts:
    """Compute every derived constant from the raw medium parameters.

    Parameters
    ----------
    params : validated medium parameters with ``delta_p > 0``.
    n_D : optional areal concentration of dark-state polaritons (1/m^2);
        when given, the filling factor 2 pi n_D l_B^2 is included.

    Raises
    ------
    ParameterError
        on invalid inputs, zero/negative detuning, or an inconsistent
        xi/L pair.
    """
    bad = params.invariant_violations()
    if bad:
        raise ParameterError("; ".join(bad))
    if params.delta_p == 0:
        raise ParameterError("effective mass undefined: delta_p must be non-zero")
    if params.delta_p < 0:
        raise ParameterError(
            "magnetic/oscillator lengths require delta_p > 0, got "
            f"{params.delta_p!r}"
        )
    if params.L_y is None:
        raise ParameterError("L_y is required to derive the level degeneracy")

    eta = params.gamma * params.xi_x / (2.0 * params.L_x)
    mass = HBAR * eta**2 / (2.0 * params.delta_p * params.omega_c**2)
    omega_B = params.omega_c**2 / (params.xi_x * params.gamma)
    l_B = math.sqrt(8.0 * params.delta_p / (params.xi_x * params.gamma)) * params.L_x
    l_B_alt = 2.0 * math.sqrt(params.delta_p * params.L_x / eta)
    if abs(l_B - l_B_alt) > 1e-12 * l_B:
        raise ParameterError("internal inconsistency between the two l_B closed forms")
    if abs(l_B**2 * mass * omega_B - HBAR) > 1e-10 * HBAR:
        raise ParameterError("l_B^2 * m * omega_B deviates from hbar beyond tolerance")

    l_E = None
    omega_A = None
    if params.omega_E > 0:
        l_E = (
            params.omega_c
            / (params.xi_x * params.gamma)
            * math.sqrt(8.0 * params.delta_p / params.omega_E)
            * params.L_x
        )
        if abs(l_E**2 * mass * params.omega_E - HBAR) > 1e-10 * HBAR:
            raise ParameterError("l_E^2 * m * omega_E deviates from hbar beyond tolerance")
        if params.alpha > 0:
            omega_A = rabi_drive_frequency(
                params.alpha, params.omega_c, params.delta_p, params.omega_E, 0
            )

    d_lll = params.L_x * params.L_y / (2.0 * math.pi * l_B**2)
    nu_filling = None if n_D is None else 2.0 * math.pi * n_D * l_B**2
    return DerivedConsts(
        eta=eta,
        mass=mass,
        omega_B=omega_B,
        l_B=l_B,
        d_lll=d_lll,
        l_E=l_E,
        omega_A=omega_A,
        nu_filling=nu_filling,
    )


def rabi_drive_frequency(
    alpha: float, omega_c: float, delta_p: float, omega_E: float, n: int
) -> float:
    """Effective drive Rabi frequency for the |n> -> |n+1> trap transition.

    W_A = (alpha Omega_c / 4) sqrt((n+1) omega_E / delta_p).
    """
    if delta_p <= 0:
        raise ParameterError("rabi_drive_frequency requires delta_p > 0")
    return alpha * omega_c / 4.0 * math.sqrt((n + 1) * omega_E / delta_p)


@dataclass
class ValidationReport:
    """Outcome of :func:`validate_params`: hard violations plus regime hints."""

    violations: list[str]
    warnings: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        lines = []
        for v in self.violations:
            lines.append(f"VIOLATION: {v}")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        if not lines:
            lines.append("ok: no violations")
        return "\n".join(lines)


def validate_params(params: PhysParams, grid: GridSpec) -> ValidationReport:
    """Check every parameter/grid invariant and emit regime warnings.

    This never raises; solver entry points decide what to do with the
    report.  Warnings flag regimes where the model or the discretization
    is marginal rather than wrong:

    * ``2 |delta_p| >> gamma`` keeps the kinetic term dominant over the
      diffusive one (the diffusion/kinetic ratio is gamma / (2 delta_p));
    * the slow-light front should not cross more than one cell per step
      (dt * V_F < dy).
    """
    violations = list(params.invariant_violations())
    violations += grid.invariant_violations()

    if params.L_x > 0:
        xlo, xhi = -params.L_x, params.L_x
        if grid.x_min < xlo or grid.x_min + (grid.nx - 1) * grid.dx > xhi:
            violations.append(
                "x-domain must stay inside [-L_x, L_x] = "
                f"[{xlo:.4g}, {xhi:.4g}] so sqrt(1 +- x/L_x) stays real "
                f"(got [{grid.x_min:.4g}, {grid.x_min + (grid.nx - 1) * grid.dx:.4g}])"
            )

    warnings = []
    if params.gamma > 0 and abs(2.0 * params.delta_p) < 10.0 * params.gamma:
        ratio = params.gamma / (2.0 * abs(params.delta_p)) if params.delta_p else math.inf
        warnings.append(
            "adiabaticity is marginal: |2 delta_p| >> gamma is not well satisfied "
            f"(diffusion/kinetic ratio gamma/(2 delta_p) = {ratio:.3g})"
        )
    if params.L_x > 0 and params.xi_x > 0 and params.gamma > 0 and params.omega_c > 0:
        eta = params.gamma * params.xi_x / (2.0 * params.L_x)
        v_front = params.omega_c**2 / (2.0 * eta)
        if grid.dt * v_front >= grid.dy:
            warnings.append(
                "advection resolution: slow-light front crosses more than one cell "
                f"per step (dt*V_F = {grid.dt * v_front:.3g} m >= dy = {grid.dy:.3g} m)"
            )
        lam = grid.dt * math.hypot(params.gamma / 2.0, params.delta_p)
        if lam > 1.0:
            warnings.append(
                "optical-coherence stiffness: dt*|gamma/2 + i delta_p| = "
                f"{lam:.3g} > 1; the explicit atomic step loses accuracy"
            )
    return ValidationReport(violations=violations, warnings=warnings)

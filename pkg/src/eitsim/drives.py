"""Control-field schedules for the three experiment recipes.

A schedule bundles the four control Rabi amplitudes W_c^{F,B,R,L}(x, t),
the control detuning D_c(x, t), the probe detuning D_p(t), and the probe
injection envelope/profile for one run.  Everything is evaluated
analytically at arbitrary (x, t) so that sub-stage integrator queries
see exact mid-step values; all amplitudes are real and non-negative.

Every switching event uses the ramp (1 +- tanh((t - t*)/(tau/4)))/2.
The common sequence is:

* storage: a single resonant forward control beam at full omega_c plus a
  weak probe pulse; the beam ramps down at ``t_s`` freezing the probe
  into the ground-state coherence.
* retrieval: the working beam set ramps up at ``t_r`` with D_c stepping
  to D_p (two-photon resonance), re-dressing the coherence as
  stationary light with an effective mass.
* gauge stage: at ``t_lg`` (strip recipe) the forward/backward pair
  acquires the sqrt(1 +- x/L_x) transverse gradient and D_c acquires the
  compensating quadratic x-profile; at ``t_h``/``t_d`` (oscillator
  recipe) the quadratic + quartic trap detuning and the anti-phased
  intensity modulation sqrt(1 +- alpha sin(w_d t)) switch on.

The transverse gradients are written as ramps from 1 to sqrt(1 +- x/L_x)
(resp. sqrt(1 +- alpha sin w_d t)) inside the retrieval envelope, so the
late-time amplitudes are exactly (omega_c/sqrt2) sqrt(1 +- x/L_x) with
peak omega_c/sqrt2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError, SupportError
from .model import HBAR, DerivedConsts, GridSpec, PhysParams
from .states import landau_strip_transverse

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class RampSpec:
    """Smooth tanh switch: evaluates to (1 +- tanh((t - center)/(width/4)))/2."""

    center: float
    width: float
    direction: str = "up"  # "up" | "down"

    def __post_init__(self):
        if self.width <= 0:
            raise ParameterError(f"ramp width must be positive, got {self.width!r}")
        if self.direction not in ("up", "down"):
            raise ParameterError(f"ramp direction must be 'up' or 'down', got {self.direction!r}")

    def __call__(self, t):
        s = np.tanh((t - self.center) / (self.width / 4.0))
        return 0.5 * (1.0 + s) if self.direction == "up" else 0.5 * (1.0 - s)


@dataclass(frozen=True)
class SequenceTiming:
    """Switch times for one run; fields unused by a recipe stay ``None``.

    ``t_probe_off`` defaults to ``t_s`` (probe injection stops as the
    storage beam ramps down).
    """

    t_s: float
    t_r: float
    tau_s: float
    tau: float
    t_lg: float | None = None
    t_h: float | None = None
    t_d: float | None = None
    tau_d: float | None = None
    t_probe_on: float = 0.02e-3
    t_probe_off: float | None = None

    @property
    def probe_off(self) -> float:
        return self.t_s if self.t_probe_off is None else self.t_probe_off


LANDAU_TIMING = SequenceTiming(t_s=0.4e-3, t_r=0.42e-3, t_lg=0.4225e-3, tau_s=4e-6, tau=1e-6)
QHO_TIMING = SequenceTiming(
    t_s=0.22e-3, t_r=0.241e-3, t_h=0.2425e-3, t_d=0.2625e-3, tau_s=4e-6, tau=1e-6, tau_d=25e-6
)


class DriveSchedule:
    """Common machinery for the concrete recipes below.

    Concrete subclasses implement :meth:`omega_c_all` and
    :meth:`delta_c`; the rest is shared.
    """

    kind = "base"

    def __init__(self, params: PhysParams, consts: DerivedConsts, timing: SequenceTiming,
                 n: int, probe_peak: float):
        self.params = params
        self.consts = consts
        self.timing = timing
        self.n = n
        self.probe_peak = probe_peak
        self._storage_down = RampSpec(timing.t_s, timing.tau_s, "down")
        self._retrieve_up = RampSpec(timing.t_r, timing.tau, "up")
        self._probe_on = RampSpec(timing.t_probe_on, timing.tau_s, "up")
        self._probe_off = RampSpec(timing.probe_off, timing.tau_s, "down")
        self.delta_p_storage = 0.0

    # -- control amplitudes -------------------------------------------------
    def omega_c_all(self, x, t):
        """Return (W_F, W_B, W_R, W_L) broadcast against ``x`` at time ``t``."""
        raise NotImplementedError

    def omega_c_F(self, x, t):
        return self.omega_c_all(x, t)[0]

    def omega_c_B(self, x, t):
        return self.omega_c_all(x, t)[1]

    def omega_c_R(self, x, t):
        return self.omega_c_all(x, t)[2]

    def omega_c_L(self, x, t):
        return self.omega_c_all(x, t)[3]

    # -- detunings -----------------------------------------------------------
    def delta_c(self, x, t):
        raise NotImplementedError

    def delta_p(self, t) -> float:
        """Probe one-photon detuning: storage value stepping to the working value."""
        r = self._retrieve_up(t)
        return self.delta_p_storage + (self.params.delta_p - self.delta_p_storage) * r

    # -- probe injection ------------------------------------------------------
    def probe_envelope(self, t) -> float:
        """Injected forward-probe amplitude W_0(t) at the entrance boundary."""
        return self.probe_peak * self._probe_on(t) * self._probe_off(t)

    def injection_profile(self, x):
        """Transverse (x) profile of the injected probe; complex-valued."""
        raise NotImplementedError

    # -- bookkeeping used by solvers and diagnostics --------------------------
    @property
    def gauge_on_time(self) -> float:
        """Time at which the synthetic-potential stage is switched on."""
        raise NotImplementedError

    @property
    def settle_time(self) -> float:
        """First time at which every ramp of the final stage is saturated."""
        return self.gauge_on_time + 2.0 * self.timing.tau


class LandauSchedule(DriveSchedule):
    """Four-beam strip recipe; ``gauge=False`` keeps the beams uniform.

    After ``t_lg`` the pairs satisfy W_F^2 + W_B^2 = W_R^2 + W_L^2 =
    omega_c^2 and the synthetic vector potential is uniform-field-like,
    A = (hbar eta / (4 L_x delta_p)) (0, x, 0) with U = 0.
    """

    def __init__(self, params, consts, timing, n, probe_peak, k_s=0.0, x0=None, gauge=True):
        if not (timing.t_s < timing.t_r):
            raise ParameterError("timing must satisfy t_s < t_r")
        if gauge:
            if timing.t_lg is None:
                raise ParameterError("strip recipe requires t_lg")
            if not (timing.t_r < timing.t_lg):
                raise ParameterError("timing must satisfy t_r < t_lg")
        super().__init__(params, consts, timing, n, probe_peak)
        self.kind = "landau" if gauge else "null_uniform"
        self.gauge = gauge
        self.k_s = k_s
        self.x0 = -k_s * consts.l_B**2 if x0 is None else x0
        # storage-stage group velocity of the single forward beam
        self.v_front = params.omega_c**2 / (2.0 * consts.eta)
        if params.delta_p_storage is None:
            self.delta_p_storage = -self.v_front * k_s
        else:
            self.delta_p_storage = params.delta_p_storage
        self._gauge_up = RampSpec(timing.t_lg, timing.tau, "up") if gauge else None

    def omega_c_all(self, x, t):
        x = np.asarray(x, dtype=float)
        oc = self.params.omega_c
        storage = oc * self._storage_down(t)
        retrieve = (oc / SQRT2) * self._retrieve_up(t)
        if self.gauge:
            g = self._gauge_up(t)
            grad_f = 1.0 + (np.sqrt(1.0 + x / self.params.L_x) - 1.0) * g
            grad_b = 1.0 + (np.sqrt(1.0 - x / self.params.L_x) - 1.0) * g
        else:
            grad_f = grad_b = np.ones_like(x)
        w_f = storage + retrieve * grad_f
        w_b = retrieve * grad_b
        w_r = np.full_like(x, retrieve)
        w_l = w_r
        return w_f, w_b, w_r, w_l

    def delta_c(self, x, t):
        x = np.asarray(x, dtype=float)
        base = self.params.delta_p * self._retrieve_up(t)
        if not self.gauge:
            return np.full_like(x, base)
        p = self.params
        quad = p.omega_c**2 / (16.0 * p.delta_p * p.L_x**2) * x**2
        return base - quad * self._gauge_up(t)

    def injection_profile(self, x):
        prof = landau_strip_transverse(self.n, x, self.x0, self.consts.l_B)
        return prof.astype(np.complex128)

    @property
    def gauge_on_time(self) -> float:
        return self.timing.t_lg if self.gauge else self.timing.t_r


class QhoSchedule(DriveSchedule):
    """Counter-propagating stationary-light recipe with a driven trap.

    After ``t_h`` the detuning difference implements the quadratic +
    quartic trap; after ``t_d`` the rightward/leftward intensities are
    modulated anti-phase as sqrt(1 +- alpha sin(w_d t)), which keeps
    W_R^2 + W_L^2 = omega_c^2 at all times and produces the uniform
    oscillating vector potential A_x = alpha (hbar eta / 4 delta_p) sin(w_d t).

    ``gauge_consistent=True`` additionally modulates the two-photon
    detuning by the -alpha^2 omega_c^2 sin^2(w_d t)/(16 delta_p) term so
    that the scalar potential equals the bare trap exactly (the default
    leaves the detuning static, neglecting the |A|^2 term).
    """

    kind = "qho"

    def __init__(self, params, consts, timing, n, probe_peak, gauge_consistent=False):
        if timing.t_h is None or timing.t_d is None or timing.tau_d is None:
            raise ParameterError("oscillator recipe requires t_h, t_d and tau_d")
        if not (timing.t_s < timing.t_r < timing.t_h < timing.t_d):
            raise ParameterError("timing must satisfy t_s < t_r < t_h < t_d")
        if params.omega_E <= 0 or consts.l_E is None:
            raise ParameterError("oscillator recipe requires omega_E > 0")
        super().__init__(params, consts, timing, n, probe_peak)
        self.gauge_consistent = gauge_consistent
        self.k_s = 0.0
        self.x0 = 0.0
        self.v_front = params.omega_c**2 / (2.0 * consts.eta)
        if params.delta_p_storage is not None:
            self.delta_p_storage = params.delta_p_storage
        self._trap_up = RampSpec(timing.t_h, timing.tau, "up")
        self._drive_up = RampSpec(timing.t_d, timing.tau_d, "up")

    def omega_c_all(self, x, t):
        x = np.asarray(x, dtype=float)
        p = self.params
        storage = p.omega_c * self._storage_down(t)
        retrieve = (p.omega_c / SQRT2) * self._retrieve_up(t)
        d = self._drive_up(t)
        s = p.alpha * math.sin(p.omega_d * t)
        mod_r = 1.0 + (math.sqrt(1.0 + s) - 1.0) * d
        mod_l = 1.0 + (math.sqrt(1.0 - s) - 1.0) * d
        w_f = np.full_like(x, storage)
        w_b = np.zeros_like(x)
        w_r = np.full_like(x, retrieve * mod_r)
        w_l = np.full_like(x, retrieve * mod_l)
        return w_f, w_b, w_r, w_l

    def delta_c(self, x, t):
        x = np.asarray(x, dtype=float)
        p = self.params
        base = p.delta_p * self._retrieve_up(t)
        u = x / self.consts.l_E
        trap = 0.5 * p.omega_E * u**2 + (2.0 / 3.0) * p.beta * p.omega_E * u**4
        out = base - trap * self._trap_up(t)
        if self.gauge_consistent:
            s2 = math.sin(p.omega_d * t) ** 2
            out = out - (p.alpha**2 * p.omega_c**2 / (16.0 * p.delta_p)) * s2 * self._drive_up(t)
        return out

    def injection_profile(self, x):
        prof = landau_strip_transverse(self.n, x, 0.0, self.consts.l_E)
        return prof.astype(np.complex128)

    @property
    def gauge_on_time(self) -> float:
        return self.timing.t_h

    @property
    def drive_on_time(self) -> float:
        return self.timing.t_d


def _check_injection_support(schedule: DriveSchedule, grid: GridSpec):
    length = schedule.consts.l_E if schedule.kind == "qho" else schedule.consts.l_B
    x0 = schedule.x0
    reach = (math.sqrt(2 * schedule.n + 1) + 3.0) * length
    if x0 - reach < grid.x_min or x0 + reach > grid.x_max:
        raise SupportError(
            f"injection profile n={schedule.n} centered at {x0:.4g} m overflows the "
            f"x-domain [{grid.x_min:.4g}, {grid.x_max:.4g}] m"
        )


def landau_schedule(
    params: PhysParams,
    consts: DerivedConsts,
    n: int = 0,
    k_s: float = 0.0,
    x0: float | None = None,
    timing: SequenceTiming | None = None,
    probe_peak: float | None = None,
    grid: GridSpec | None = None,
    gauge: bool = True,
) -> LandauSchedule:
    """Build the strip-recipe schedule (``gauge=False`` for the uniform null recipe)."""
    timing = LANDAU_TIMING if timing is None else timing
    peak = 0.01 * params.gamma if probe_peak is None else probe_peak
    sched = LandauSchedule(params, consts, timing, n, peak, k_s=k_s, x0=x0, gauge=gauge)
    if grid is not None:
        _check_injection_support(sched, grid)
    return sched


def qho_schedule(
    params: PhysParams,
    consts: DerivedConsts,
    n: int = 0,
    timing: SequenceTiming | None = None,
    probe_peak: float | None = None,
    grid: GridSpec | None = None,
    gauge_consistent: bool = False,
) -> QhoSchedule:
    """Build the driven-oscillator schedule."""
    timing = QHO_TIMING if timing is None else timing
    peak = 0.01 * params.gamma if probe_peak is None else probe_peak
    sched = QhoSchedule(params, consts, timing, n, peak, gauge_consistent=gauge_consistent)
    if grid is not None:
        _check_injection_support(sched, grid)
    return sched


@dataclass(frozen=True)
class Potentials:
    """Synthetic potentials sampled along x (all y-uniform).

    ``a_x``/``a_y`` are the vector-potential components per unit charge
    (kg m/s), ``u`` the scalar potential energy (J), ``v_gx``/``v_gy``
    the group-velocity components (m/s).
    """

    a_x: np.ndarray
    a_y: np.ndarray
    u: np.ndarray
    v_gx: np.ndarray
    v_gy: np.ndarray


def synthetic_potentials(schedule: DriveSchedule, consts: DerivedConsts, x, y, t) -> Potentials:
    """Evaluate V_g, A = m V_g and U = hbar(D_p - D_c) - |A|^2/(2m) at (x, *, t).

    The controls are uniform along y, so ``y`` only fixes the broadcast
    contract; the returned arrays follow ``x``.
    """
    x = np.asarray(x, dtype=float)
    w_f, w_b, w_r, w_l = schedule.omega_c_all(x, t)
    v_gx = (w_r**2 - w_l**2) / (2.0 * consts.eta)
    v_gy = (w_f**2 - w_b**2) / (2.0 * consts.eta)
    a_x = consts.mass * v_gx
    a_y = consts.mass * v_gy
    u = HBAR * (schedule.delta_p(t) - schedule.delta_c(x, t)) - (a_x**2 + a_y**2) / (
        2.0 * consts.mass
    )
    return Potentials(a_x=a_x, a_y=a_y, u=u, v_gx=v_gx, v_gy=v_gy)

"""Flat key = value run configuration: parsing, validation, templates.

Units are fixed per key name (suffix ``_hz``, ``_m``, ``_s``, ``_radps``
or a dimensionless ``_over_gamma`` ratio).  Unknown keys, duplicate keys
and missing required keys are hard errors with line numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .model import GridSpec, PhysParams

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _parse_bool(s: str) -> bool:
    low = s.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


#: key -> (type, required, default, help)
KEY_TABLE: dict[str, tuple] = {
    "gamma_hz": (float, True, None, "excited-state decay rate Gamma (angular, 1/s)"),
    "lambda_m": (float, False, 500e-9, "probe carrier wavelength (m)"),
    "delta_p_over_gamma": (float, True, None, "working probe detuning / Gamma"),
    "delta_p_storage_over_gamma": (
        float,
        False,
        None,
        "storage-stage probe detuning / Gamma (default: -V_F k_s)",
    ),
    "omega_c_over_gamma": (float, True, None, "total control Rabi frequency / Gamma"),
    "xi_x": (float, True, None, "optical depth along x"),
    "xi_y": (float, True, None, "optical depth along y"),
    "L_x_m": (float, True, None, "medium length along x (m)"),
    "L_y_m": (float, True, None, "medium length along y (m)"),
    "alpha": (float, False, 0.0, "drive modulation depth in [0, 1]"),
    "beta": (float, False, 0.0, "quartic trap perturbation strength"),
    "omega_e_radps": (float, False, 0.0, "trap frequency omega_E (rad/s)"),
    "omega_d_radps": (float, False, 0.0, "drive modulation frequency omega_d (rad/s)"),
    "n_d_per_m2": (float, False, None, "optional polariton areal concentration (1/m^2)"),
    "grid.nx": (int, True, None, "grid points along x"),
    "grid.ny": (int, True, None, "grid points along y"),
    "grid.dx_m": (float, True, None, "grid spacing along x (m)"),
    "grid.dy_m": (float, True, None, "grid spacing along y (m)"),
    "grid.dt_s": (float, True, None, "time step (s)"),
    "grid.x_min_m": (float, True, None, "x coordinate of the first node (m)"),
    "grid.y_min_m": (float, True, None, "y coordinate of the first node (m)"),
    "grid.t_end_s": (float, True, None, "final time (s)"),
    "scenario.kind": (str, True, None, "landau | landau_offset | qho | null_uniform"),
    "scenario.n": (int, False, 0, "initial level index"),
    "scenario.k_s_per_m": (float, False, 0.0, "stored longitudinal wavenumber (1/m)"),
    "scenario.x0_m": (float, False, None, "profile center (m; default -k_s l_B^2)"),
    "timing.t_s_s": (float, False, None, "storage ramp-down time (s)"),
    "timing.t_r_s": (float, False, None, "retrieval ramp-up time (s)"),
    "timing.t_lg_s": (float, False, None, "gauge-stage switch-on time (s, strip recipes)"),
    "timing.t_h_s": (float, False, None, "trap switch-on time (s, oscillator recipe)"),
    "timing.t_d_s": (float, False, None, "drive switch-on time (s, oscillator recipe)"),
    "timing.tau_s_s": (float, False, None, "storage ramp width (s)"),
    "timing.tau_s": (float, False, None, "retrieval/gauge ramp width (s)"),
    "timing.tau_d_s": (float, False, None, "drive ramp width (s)"),
    "timing.probe_on_s": (float, False, None, "probe envelope switch-on time (s)"),
    "timing.probe_off_s": (float, False, None, "probe envelope switch-off time (s)"),
    "solver.mode": (str, False, "quasistatic", "quasistatic | time_resolved"),
    "solver.splitting": (str, False, "atoms_first", "atoms_first | strang"),
    "solver.probe_tol": (float, False, 1e-10, "probe-solve residual guard"),
    "solver.snapshot_stride": (int, False, 50, "steps between snapshots"),
    "solver.probe_peak_over_gamma": (float, False, 0.01, "probe injection peak / Gamma"),
    "solver.qho_gauge_consistent": (
        bool,
        False,
        False,
        "include the |A|^2 detuning modulation in the oscillator recipe",
    ),
    "solver.effective_dt_s": (float, False, 1e-6, "effective-solver time step (s)"),
    "solver.effective_init": (
        str,
        False,
        "analytic",
        "effective-solver initial state: analytic | obe",
    ),
    "solver.threads": (int, False, 0, "probe-solve worker cap (0: EITSIM_THREADS or 1)"),
    "output.dir": (str, False, "out", "output directory"),
    "output.basis_max": (int, False, 3, "highest level index for projections"),
    "output.export_fields": (bool, False, False, "also dump |rho21|^2 grids as CSV"),
}

_SCENARIOS = ("landau", "landau_offset", "qho", "null_uniform")


@dataclass
class RunConfig:
    """Typed view of one parsed configuration."""

    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    @property
    def scenario(self) -> str:
        return self.values["scenario.kind"]

    def phys_params(self) -> PhysParams:
        v = self.values
        gamma = v["gamma_hz"]
        dps = v.get("delta_p_storage_over_gamma")
        return PhysParams(
            gamma=gamma,
            wavelength=v["lambda_m"],
            delta_p=v["delta_p_over_gamma"] * gamma,
            delta_p_storage=None if dps is None else dps * gamma,
            omega_c=v["omega_c_over_gamma"] * gamma,
            xi_x=v["xi_x"],
            xi_y=v["xi_y"],
            L_x=v["L_x_m"],
            L_y=v["L_y_m"],
            alpha=v["alpha"],
            beta=v["beta"],
            omega_E=v["omega_e_radps"],
            omega_d=v["omega_d_radps"],
        )

    def grid(self) -> GridSpec:
        v = self.values
        return GridSpec(
            nx=v["grid.nx"],
            ny=v["grid.ny"],
            dx=v["grid.dx_m"],
            dy=v["grid.dy_m"],
            dt=v["grid.dt_s"],
            x_min=v["grid.x_min_m"],
            y_min=v["grid.y_min_m"],
            t_end=v["grid.t_end_s"],
        )

    def to_text(self) -> str:
        lines = []
        for key in KEY_TABLE:
            v = self.values.get(key)
            if v is None:
                continue
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{key} = {v}")
        return "\n".join(lines) + "\n"


def load_config(text: str, overrides: list[str] | None = None) -> RunConfig:
    """Parse configuration text (plus optional ``key=value`` overrides).

    Raises :class:`ConfigError` with a line number for parse errors,
    unknown keys, duplicates, bad value types, and missing required keys.
    """
    seen: dict[str, int] = {}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in KEY_TABLE:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in seen:
            raise ConfigError(
                f"duplicate key {key!r} (first set on line {seen[key]})", line=lineno
            )
        seen[key] = lineno
        typ = KEY_TABLE[key][0]
        try:
            values[key] = _parse_bool(val) if typ is bool else typ(val)
        except ValueError as err:
            raise ConfigError(f"bad value for {key!r}: {err}", line=lineno) from None
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, _, val = item.partition("=")
        key, val = key.strip(), val.strip()
        if key not in KEY_TABLE:
            raise ConfigError(f"unknown key {key!r} in override")
        typ = KEY_TABLE[key][0]
        try:
            values[key] = _parse_bool(val) if typ is bool else typ(val)
        except ValueError as err:
            raise ConfigError(f"bad override value for {key!r}: {err}") from None
    for key, (typ, required, default, _help) in KEY_TABLE.items():
        if key not in values:
            if required:
                raise ConfigError(f"missing required key {key!r}")
            values[key] = default
    kind = values["scenario.kind"]
    if kind not in _SCENARIOS:
        raise ConfigError(
            f"scenario.kind must be one of {', '.join(_SCENARIOS)}; got {kind!r}"
        )
    if kind == "qho" and values["omega_e_radps"] <= 0:
        raise ConfigError("the qho scenario requires omega_e_radps > 0")
    if values["solver.mode"] not in ("quasistatic", "time_resolved"):
        raise ConfigError(f"solver.mode invalid: {values['solver.mode']!r}")
    if values["solver.splitting"] not in ("atoms_first", "strang"):
        raise ConfigError(f"solver.splitting invalid: {values['solver.splitting']!r}")
    if values["solver.effective_init"] not in ("analytic", "obe"):
        raise ConfigError(f"solver.effective_init invalid: {values['solver.effective_init']!r}")
    return RunConfig(values=values)


def template() -> str:
    """Emit a fully commented configuration template (parses as-is)."""
    lines = [
        "# eitsim run configuration",
        "# units are fixed per key suffix: _hz and _radps are angular (1/s),",
        "# _m meters, _s seconds; *_over_gamma are ratios to gamma_hz",
        "",
    ]
    for key, (typ, required, default, help_) in KEY_TABLE.items():
        lines.append(f"# {help_}" + ("  [required]" if required else ""))
        if required:
            placeholder = {"scenario.kind": "landau"}.get(key, "0" if typ is not str else "")
            lines.append(f"{key} = {placeholder}")
        elif default is None:
            lines.append(f"# {key} =")
        else:
            v = ("true" if default else "false") if isinstance(default, bool) else repr(default)
            lines.append(f"{key} = {v}")
        lines.append("")
    return "\n".join(lines)

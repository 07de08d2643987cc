"""Binary snapshot persistence, run manifests, and CSV export.

Snapshot file layout (all little-endian):

    magic   4 bytes  b"EITS"
    version u32      (currently 1)
    nx, ny  u32, u32
    dx, dy  f64, f64 (m)
    t       f64      (s)
    nfields u32
    then per field: u32 name length, utf-8 name bytes
    payload: per field, row-major (ny, nx) complex values as
             (re, im) float64 pairs

The payload length must equal nfields * nx * ny * 16 bytes; read(write(s))
round-trips bit-exactly.  A run directory holds one file per snapshot
plus ``manifest.json`` mapping times to filenames and carrying the grid
origin and scenario metadata.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import SnapshotFormatError
from .model import GridSpec
from .series import TimeSeries
from .states import ComplexField2D

MAGIC = b"EITS"
VERSION = 1
_HEADER = struct.Struct("<4sIII3dI")


def write_snapshot(path, fields: dict, grid: GridSpec, t: float) -> None:
    """Write named complex fields ({name: (ny, nx) array-like}) to one file."""
    names = list(fields)
    blob = bytearray()
    blob += _HEADER.pack(MAGIC, VERSION, grid.nx, grid.ny, grid.dx, grid.dy, t, len(names))
    for name in names:
        raw = name.encode("utf-8")
        blob += struct.pack("<I", len(raw)) + raw
    for name in names:
        arr = np.ascontiguousarray(fields[name], dtype="<c16")
        if arr.shape != (grid.ny, grid.nx):
            raise SnapshotFormatError(
                f"field {name!r} has shape {arr.shape}, expected {(grid.ny, grid.nx)}"
            )
        blob += arr.tobytes()
    Path(path).write_bytes(bytes(blob))


def read_snapshot(path):
    """Read one snapshot; returns (fields dict, header dict)."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, nx, ny, dx, dy, t, nfields = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"{path}: unsupported format version {version}")
    off = _HEADER.size
    names = []
    for _ in range(nfields):
        if off + 4 > len(data):
            raise SnapshotFormatError(f"{path}: truncated field-name table")
        (ln,) = struct.unpack_from("<I", data, off)
        off += 4
        if off + ln > len(data):
            raise SnapshotFormatError(f"{path}: truncated field name")
        names.append(data[off : off + ln].decode("utf-8"))
        off += ln
    need = nfields * nx * ny * 16
    if len(data) - off != need:
        raise SnapshotFormatError(
            f"{path}: payload is {len(data) - off} bytes, expected {need}"
        )
    fields = {}
    for name in names:
        count = nx * ny
        arr = np.frombuffer(data, dtype="<c16", count=count, offset=off).reshape(ny, nx)
        fields[name] = arr.copy()
        off += count * 16
    header = {"version": version, "nx": nx, "ny": ny, "dx": dx, "dy": dy, "t": t}
    return fields, header


def save_state(path, state) -> None:
    """Persist a full solver state (all nine fields)."""
    fields = {name: getattr(state, name).values for name in state.FIELD_NAMES}
    write_snapshot(path, fields, state.grid, state.t)


def load_state(path, grid: GridSpec):
    """Load a full solver state saved by :func:`save_state`."""
    from .obe import SimState

    fields, header = read_snapshot(path)
    missing = [n for n in SimState.FIELD_NAMES if n not in fields]
    if missing:
        raise SnapshotFormatError(f"{path}: missing fields {missing}")
    return SimState(
        header["t"], *[ComplexField2D(grid, fields[n]) for n in SimState.FIELD_NAMES]
    )


def save_series(series: TimeSeries, out_dir) -> Path:
    """Write a coherence time series: snapshots/*.snap + manifest.json."""
    out = Path(out_dir)
    (out / "snapshots").mkdir(parents=True, exist_ok=True)
    entries = []
    for i, (t, f) in enumerate(zip(series.times, series.fields)):
        name = f"snapshots/{i:06d}.snap"
        write_snapshot(out / name, {"rho21": f.values}, series.grid, t)
        entries.append({"t": t, "file": name})
    g = series.grid
    manifest = {
        "format": "eitsim-series",
        "version": VERSION,
        "grid": {
            "nx": g.nx, "ny": g.ny, "dx": g.dx, "dy": g.dy,
            "dt": g.dt, "x_min": g.x_min, "y_min": g.y_min, "t_end": g.t_end,
        },
        "meta": series.meta,
        "norms": list(series.norms),
        "peak_x": list(series.peak_x),
        "snapshots": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return out / "manifest.json"


def load_series(run_dir) -> TimeSeries:
    """Load a series directory written by :func:`save_series`."""
    run = Path(run_dir)
    manifest_path = run / "manifest.json"
    if not manifest_path.exists():
        raise SnapshotFormatError(f"no manifest.json in {run}")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("format") != "eitsim-series":
        raise SnapshotFormatError(f"{manifest_path}: not an eitsim series manifest")
    gd = manifest["grid"]
    grid = GridSpec(
        nx=gd["nx"], ny=gd["ny"], dx=gd["dx"], dy=gd["dy"],
        dt=gd["dt"], x_min=gd["x_min"], y_min=gd["y_min"], t_end=gd["t_end"],
    )
    series = TimeSeries(grid=grid, meta=manifest.get("meta", {}))
    for entry in manifest["snapshots"]:
        fields, header = read_snapshot(run / entry["file"])
        if header["nx"] != grid.nx or header["ny"] != grid.ny:
            raise SnapshotFormatError(f"{entry['file']}: grid mismatch with manifest")
        series.append(header["t"], ComplexField2D(grid, fields["rho21"]))
    return series


def export_timeseries(series: TimeSeries, records, path, export_fields: bool = False) -> Path:
    """Write the diagnostics CSV (one row per snapshot, 17 significant digits).

    Columns: t, omega_inst, F_0..F_max, P_0..P_max, peak_x, norm.  With
    ``export_fields`` the |rho21|^2 grids are dumped alongside as
    ``fields_######.csv`` (one row per y index).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    f_keys = sorted(records[0].fidelities) if records and records[0].fidelities else []
    p_keys = sorted(records[0].probabilities) if records and records[0].probabilities else []
    cols = (
        ["t", "omega_inst"]
        + [f"F_{n}" for n in f_keys]
        + [f"P_{n}" for n in p_keys]
        + ["peak_x", "norm"]
    )

    def fmt(v):
        if v is None:
            return "nan"
        return format(float(v), ".17g")

    lines = [",".join(cols)]
    for r in records:
        row = [fmt(r.t), fmt(r.omega_inst)]
        row += [fmt(r.fidelities[n]) for n in f_keys]
        row += [fmt(r.probabilities[n]) for n in p_keys]
        row += [fmt(r.peak_x), fmt(r.norm)]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    if export_fields:
        for i, f in enumerate(series.fields):
            rows = [
                ",".join(format(v, ".17g") for v in np.abs(f.values[j, :]) ** 2)
                for j in range(series.grid.ny)
            ]
            (path.parent / f"fields_{i:06d}.csv").write_text("\n".join(rows) + "\n")
    return path

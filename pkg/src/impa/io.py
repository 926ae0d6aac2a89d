"""File formats: CSV tables, JSON documents, atomic writes.

All numbers are written with 12 significant digits and no timestamps, so
identical inputs produce byte-identical files.
"""

import csv
import json
import os
import tempfile

import numpy as np

from .errors import IoError


def fmt(x):
    return f"{x:.12g}"


def atomic_write_text(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def _round_floats(obj):
    if isinstance(obj, float):
        # JSON has no NaN or infinity
        return float(fmt(obj)) if np.isfinite(obj) else None
    if isinstance(obj, (np.floating, np.integer)):
        return _round_floats(obj.item())
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round_floats(v) for v in obj]
    return obj


def dumps_json(obj):
    return json.dumps(_round_floats(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    atomic_write_text(path, dumps_json(obj))


def csv_text(header, columns):
    rows = [",".join(header)]
    for row in zip(*columns):
        rows.append(",".join(fmt(float(v)) for v in row))
    return "\n".join(rows) + "\n"


def write_csv(path, header, columns):
    atomic_write_text(path, csv_text(header, columns))


def read_csv_columns(path, required):
    """Read a headed numeric CSV and return ``{name: array}`` for ``required``."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(line for line in fh if line.strip() and not line.startswith("#"))
            missing = [c for c in required if c not in (reader.fieldnames or [])]
            if missing:
                raise IoError(f"{path}: missing columns {missing}")
            data = {c: [] for c in required}
            for row in reader:
                for c in required:
                    data[c].append(float(row[c]))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None
    except ValueError as exc:
        raise IoError(f"{path}: {exc}") from None
    return {c: np.asarray(v, dtype=float) for c, v in data.items()}


# profile ------------------------------------------------------------------

PROFILE_HEADER = ("z_m", "impedance_ohm", "width_m")


def write_profile_csv(path, profile):
    write_csv(path, PROFILE_HEADER, (profile.z, profile.impedance, profile.width))


def read_profile_csv(path):
    from .taper import TaperProfile

    cols = read_csv_columns(path, PROFILE_HEADER)
    z = cols["z_m"]
    imp = cols["impedance_ohm"]
    return TaperProfile(z=z - z[0], impedance=imp, width=cols["width_m"],
                        length=float(z[-1] - z[0]), ripple=float("nan"),
                        gamma0=0.5 * float(np.log(imp[-1] / imp[0])))


# measurement tables ------------------------------------------------------------

def read_flux_sweep(path):
    from .calibrate import FluxSweepData

    try:
        with open(path) as fh:
            header = fh.readline()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None
    names = ["bias", "freq_hz"]
    extra = [c for c in ("linewidth_hz", "sigma_hz") if c in header]
    cols = read_csv_columns(path, names + extra)
    return FluxSweepData(cols["bias"], cols["freq_hz"],
                         linewidth=cols.get("linewidth_hz"), sigma=cols.get("sigma_hz"))


def read_reflection_trace(path):
    cols = read_csv_columns(path, ("freq_hz", "re_s11", "im_s11"))
    return cols["freq_hz"], cols["re_s11"] + 1j * cols["im_s11"]


def read_stark_table(path):
    from .calibrate import StarkDephasingData

    cols = read_csv_columns(path, ("power_dbm", "delta_ac_hz", "gamma_phi_hz"))
    return StarkDephasingData(cols["power_dbm"], 2 * np.pi * cols["delta_ac_hz"], cols["gamma_phi_hz"])


def read_attenuation_pairs(path):
    cols = read_csv_columns(path, ("p_source_dbm", "p_device_dbm"))
    return list(zip(cols["p_source_dbm"], cols["p_device_dbm"]))


def read_gain_power(path):
    cols = read_csv_columns(path, ("p_in_dbm", "gain_db"))
    return list(zip(cols["p_in_dbm"], cols["gain_db"]))

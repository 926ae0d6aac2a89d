"""Project configuration: one JSON document, validated before any computation."""

import copy
import json

import jsonschema

from .errors import ImpaError


class InvalidConfig(ImpaError):
    pass


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SCHEMA = _obj({
    "output_dir": {"type": "string"},
    "taper": _obj({
        "z_source": _POS, "z_load": _POS, "gamma_max": _POS, "f_cutoff": _POS,
        "eps_eff": {"type": ["number", "null"]}, "gap": _POS, "substrate_eps_r": _NUM,
        "n_samples": {"type": "integer", "minimum": 2},
    }),
    "resonator": _obj({
        "capacitance": _POS, "josephson_inductance": _POS, "geometric_inductance": _NUM,
        "asymmetry": _NUM, "flux": _NUM, "pump_frequency": {"type": ["number", "null"]},
        "pump_amplitude": _NUM,
    }),
    "environment": _obj({
        "kind": {"enum": ["taper", "constant"]},
        "impedance": _POS, "source_impedance": _POS,
        "n_segments": {"type": "integer", "minimum": 10},
    }),
    "grid": _obj({"start": _POS, "stop": _POS, "points": {"type": "integer", "minimum": 0}}),
    "simulation": _obj({
        "n_segments": {"type": "integer", "minimum": 10},
        "port_refs": {"type": ["array", "null"], "items": _POS, "minItems": 2, "maxItems": 2},
        "touchstone_reference": _POS,
    }),
    "gain": _obj({
        "start": _POS, "stop": _POS, "points": {"type": "integer", "minimum": 2},
        "target_peak_db": {"type": ["number", "null"]},
        "thresholds_db": {"type": "array", "items": _NUM},
        "reference_impedance": _POS,
    }),
    "tuning": _obj({"flux_start": _NUM, "flux_stop": _NUM, "points": {"type": "integer", "minimum": 2}}),
    "noise": _obj({
        "t_hemt": {"type": "array", "items": _POS, "minItems": 1, "maxItems": 2},
        "t_paramp": {"type": ["number", "null"]},
        "gain_db": _NUM, "snr_db": {"type": ["number", "null"]}, "frequency": _POS,
    }),
})

DEFAULTS = {
    "output_dir": "out",
    "taper": {"z_source": 50.0, "z_load": 18.0, "gamma_max": 10 ** (-10 / 20), "f_cutoff": 2e9,
              "eps_eff": None, "gap": 3e-6, "substrate_eps_r": 11.9, "n_samples": 401},
    "resonator": {"capacitance": 4e-12, "josephson_inductance": 69e-12, "geometric_inductance": 0.0,
                  "asymmetry": 0.0, "flux": 0.2, "pump_frequency": None, "pump_amplitude": 0.0},
    "environment": {"kind": "taper", "impedance": 18.0, "source_impedance": 50.0, "n_segments": 400},
    "grid": {"start": 0.1e9, "stop": 12e9, "points": 2001},
    "simulation": {"n_segments": 400, "port_refs": None, "touchstone_reference": 50.0},
    "gain": {"start": 6e9, "stop": 11e9, "points": 2001, "target_peak_db": 20.0,
             "thresholds_db": [15.0, 20.0], "reference_impedance": 18.0},
    "tuning": {"flux_start": -0.45, "flux_stop": 0.45, "points": 181},
    "noise": {"t_hemt": [2.3, 2.9], "t_paramp": None, "gain_db": 20.0, "snr_db": None,
              "frequency": 6.633e9},
}


def _merge(base, override):
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc, assignments):
    """Apply ``key.sub=value`` assignments; values are parsed as JSON when possible."""
    doc = copy.deepcopy(doc)
    for item in assignments or ():
        if "=" not in item:
            raise InvalidConfig(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        node = doc
        parts = key.strip().split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise InvalidConfig(f"override path {key!r} crosses a non-object")
        node[parts[-1]] = _parse_value(value)
    return doc


def validate(doc):
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidConfig(f"{where}: {exc.message}") from None


def load_config(path=None, overrides=()):
    """Read, override, validate, then fill defaults."""
    doc = {}
    if path is not None:
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidConfig(f"{path}: {exc}") from None
    doc = apply_overrides(doc, overrides)
    validate(doc)
    full = _merge(DEFAULTS, doc)
    validate(full)
    return full

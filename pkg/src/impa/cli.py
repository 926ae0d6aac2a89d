"""Command-line workflows: taper design, S-parameters, gain, fits and noise.

Every command reads one JSON config (``--config``) with dotted ``--set``
overrides and writes its results under ``output_dir``.  Exit codes: 0 on
success, 2 for domain or validation errors, 3 for I/O errors.  Errors are
reported on stderr as ``{"error": kind, "message": text}``.
"""

import argparse
import json
import math
import os
import sys
import warnings

import numpy as np

from . import calibrate, io, network, noise, paramp, taper
from ._accel import configure_threads
from .config import load_config
from .errors import DomainError, ImpaError, IoError

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 2, 3


def _out(cfg, name):
    return os.path.join(cfg["output_dir"], name)


def _taper_spec(cfg):
    t = {k: v for k, v in cfg["taper"].items() if k != "n_samples"}
    return taper.TaperDesignSpec.from_dict(t)


def _profile(cfg):
    return taper.impedance_profile(_taper_spec(cfg), n_samples=cfg["taper"]["n_samples"])


def _grid(section):
    n = int(section["points"])
    return np.linspace(section["start"], section["stop"], n) if n else np.zeros(0)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_design_taper(cfg):
    profile = _profile(cfg)
    spec = profile.spec
    io.write_profile_csv(_out(cfg, "taper_profile.csv"), profile)
    summary = {
        "ripple_A": profile.ripple,
        "length_m": profile.length,
        "gamma0": profile.gamma0,
        "eps_eff": spec.eps_eff,
        "gap_m": spec.gap,
        "impedance_ends_ohm": [profile.impedance[0], profile.impedance[-1]],
        "width_ends_m": [profile.width[0], profile.width[-1]],
        "n_samples": int(profile.z.size),
    }
    io.write_json(_out(cfg, "taper_summary.json"), summary)
    return summary


def cmd_simulate_sparams(cfg):
    sim = cfg["simulation"]
    profile = _profile(cfg)
    f = _grid(cfg["grid"])
    if f.size == 0:
        raise IoError("frequency grid is empty; nothing to write")
    grid = network.FrequencyGrid(f)
    refs = tuple(sim["port_refs"]) if sim["port_refs"] else None
    s = network.taper_sparams(profile, grid, n_segments=sim["n_segments"], port_refs=refs)
    network.write_touchstone(s, _out(cfg, "taper.s2p"), z_ref=sim["touchstone_reference"])
    io.atomic_write_text(_out(cfg, "taper_sparams_db.csv"), network.sparams_db_csv(s))
    s11 = np.abs(s.s11)
    band = f >= cfg["taper"]["f_cutoff"]
    summary = {
        "port_refs_ohm": list(s.port_refs),
        "max_s11_db_above_cutoff": float(20 * np.log10(s11[band].max())) if band.any() else None,
        "max_unitarity_error": float(np.max(np.abs(s11 ** 2 + np.abs(s.s21) ** 2 - 1))),
        "n_segments": sim["n_segments"],
    }
    io.write_json(_out(cfg, "sparams_summary.json"), summary)
    return summary


def _resonator(cfg):
    r = paramp.PumpedResonator(**cfg["resonator"])
    if r.pump_frequency is None:
        # degenerate pumping at twice the bare resonance
        r = r.replace(pump_frequency=2 * paramp.tuning_curve(r, r.flux))
    return r


def _environment(cfg):
    env = cfg["environment"]
    if env["kind"] == "constant":
        return paramp.ConstantImpedance(env["impedance"])
    return paramp.TaperEnvironment(_profile(cfg), source_impedance=env["source_impedance"],
                                   n_segments=env["n_segments"])


def _bandwidths(profile, thresholds):
    out = {}
    for t in thresholds:
        try:
            out[io.fmt(t)] = paramp.gain_bandwidth(profile, t)
        except ImpaError:
            out[io.fmt(t)] = None
    return out


def _profile_report(profile, thresholds):
    return {
        "peak_gain_db": 10 * math.log10(profile.peak_gain),
        "peak_frequency_hz": profile.peak_frequency,
        "bandwidth_hz": _bandwidths(profile, thresholds),
    }


def _write_gain(path, profile):
    io.write_csv(path, ("freq_hz", "gain_db", "idler_gain_db"),
                 (profile.frequencies, profile.gain_db, profile.idler_gain_db))


def cmd_gain(cfg):
    g = cfg["gain"]
    f = _grid(g)
    r = _resonator(cfg)
    env = _environment(cfg)
    target = g["target_peak_db"]
    if target is not None and r.pump_amplitude == 0:
        r = r.replace(pump_amplitude=paramp.tune_pump_amplitude(r, env, f, target))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        embedded = paramp.embedded_profile(r, env, f)
        kappa = paramp.kappa_from_environment(r, paramp.ConstantImpedance(g["reference_impedance"]))
        if target is not None and r.pump_amplitude > 0:
            lam = paramp.pump_strength_for_gain(10 ** (target / 10), kappa)
        else:
            lam = paramp.lambda_from_modulation(r)
        rwa = paramp.rwa_profile(r, kappa, f, lam=lam)
    _write_gain(_out(cfg, "gain_embedded.csv"), embedded)
    _write_gain(_out(cfg, "gain_rwa.csv"), rwa)
    report = {
        "pump_frequency_hz": r.pump_frequency,
        "pump_amplitude": r.pump_amplitude,
        "resonance_hz": float(paramp.tuning_curve(r, r.flux)),
        "environment": cfg["environment"]["kind"],
        "embedded": _profile_report(embedded, g["thresholds_db"]),
        "rwa": dict(_profile_report(rwa, g["thresholds_db"]), kappa=kappa, lam=lam,
                    reference_impedance_ohm=g["reference_impedance"]),
    }
    io.write_json(_out(cfg, "gain_report.json"), report)
    return report


def cmd_tune_curve(cfg):
    t = cfg["tuning"]
    r = paramp.PumpedResonator(**cfg["resonator"])
    flux = np.linspace(t["flux_start"], t["flux_stop"], t["points"])
    f = paramp.tuning_curve(r, flux)
    io.write_csv(_out(cfg, "tuning_curve.csv"), ("flux_phi0", "freq_hz"), (flux, f))
    return {"points": int(flux.size)}


def _key_values(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise DomainError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = float(v)
    return out


def cmd_fit(kind, data_path, cfg, args):
    if kind == "tuning":
        data = io.read_flux_sweep(data_path)
        result = calibrate.fit_tuning_curve(data, _key_values(args.guess),
                                            environment_impedance=args.z_env,
                                            fixed=_key_values(args.fix))
    elif kind == "resonance":
        f, s11 = io.read_reflection_trace(data_path)
        result = calibrate.fit_reflection_resonance(f, s11)
    elif kind == "stark":
        if args.kappa_r_hz is None:
            raise DomainError("stark fit needs --kappa-r-hz")
        omega_r = None if args.omega_r_hz is None else 2 * math.pi * args.omega_r_hz
        result = calibrate.fit_stark_dephasing(io.read_stark_table(data_path),
                                               2 * math.pi * args.kappa_r_hz, omega_r)
    elif kind == "attenuation":
        result = calibrate.fit_attenuation(io.read_attenuation_pairs(data_path))
    else:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            p1 = calibrate.compression_point(io.read_gain_power(data_path))
        result = calibrate.FitResult(
            params={"p1db_dbm": p1}, units={"p1db_dbm": "dBm"}, residual_norm=0.0,
            converged=True, iterations=1,
            extras={"warnings": [str(w.message) for w in caught]} if caught else {})
    doc = result.to_dict()
    io.write_json(_out(cfg, f"fit_{kind}.json"), doc)
    return doc


def cmd_noise(cfg):
    n = cfg["noise"]
    gain = 10 ** (n["gain_db"] / 10)
    t_hemt = n["t_hemt"]
    out = {"quantum_limit_k": noise.quantum_limit_temperature(n["frequency"]),
           "frequency_hz": n["frequency"], "gain_db": n["gain_db"]}
    if n["t_paramp"] is not None:
        out["snr_improvement_db"] = [
            10 * math.log10(noise.snr_improvement(noise.NoiseChain(n["t_paramp"], th, gain)))
            for th in t_hemt]
    if n["snr_db"] is not None:
        lo, hi = noise.noise_temperature_interval(10 ** (n["snr_db"] / 10), (min(t_hemt), max(t_hemt)), gain)
        out["t_paramp_interval_k"] = [lo, hi]
        out["t_paramp_over_quantum_limit"] = [lo / out["quantum_limit_k"], hi / out["quantum_limit_k"]]
    io.write_json(_out(cfg, "noise_report.json"), out)
    return out


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted config override, value parsed as JSON when possible")
    common.add_argument("--out", help="output directory (same as --set output_dir=...)")

    parser = argparse.ArgumentParser(prog="impa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("design-taper", "synthesize the taper and its CPW widths"),
                       ("simulate-sparams", "cascade the taper and write Touchstone + dB CSV"),
                       ("gain", "embedded and rotating-wave gain sweeps"),
                       ("tune-curve", "resonance frequency against flux"),
                       ("noise", "noise temperature and SNR arithmetic")):
        sub.add_parser(name, parents=[common], help=text)
    fit = sub.add_parser("fit", parents=[common], help="parameter extraction from CSV data")
    fit.add_argument("kind", choices=["tuning", "resonance", "stark", "attenuation", "compression"])
    fit.add_argument("data", help="CSV data file")
    fit.add_argument("--guess", action="append", metavar="NAME=VALUE", help="tuning initial guess (SI)")
    fit.add_argument("--fix", action="append", metavar="NAME=VALUE", help="tuning parameter held fixed")
    fit.add_argument("--z-env", type=float, help="environment impedance for the linewidth anchor, ohm")
    fit.add_argument("--kappa-r-hz", type=float, help="readout linewidth kappa_r / 2pi, Hz")
    fit.add_argument("--omega-r-hz", type=float, help="readout frequency, Hz")
    return parser


def _fail(exc, code):
    kind = getattr(exc, "kind", "IoError" if isinstance(exc, OSError) else type(exc).__name__)
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}, sort_keys=True) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_threads()
    try:
        overrides = list(args.overrides)
        if args.out is not None:
            overrides.append("output_dir=" + json.dumps(args.out))
        cfg = load_config(args.config, overrides)
        if args.command == "design-taper":
            result = cmd_design_taper(cfg)
        elif args.command == "simulate-sparams":
            result = cmd_simulate_sparams(cfg)
        elif args.command == "gain":
            result = cmd_gain(cfg)
        elif args.command == "tune-curve":
            result = cmd_tune_curve(cfg)
        elif args.command == "noise":
            result = cmd_noise(cfg)
        else:
            result = cmd_fit(args.kind, args.data, cfg, args)
    except ImpaError as exc:
        return _fail(exc, EXIT_DOMAIN)
    except OSError as exc:
        return _fail(exc, EXIT_IO)
    sys.stdout.write(io.dumps_json(result))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

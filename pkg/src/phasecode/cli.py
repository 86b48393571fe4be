"""Command-line front-end.

    phasecode <command> [--config FILE] [options]
    phasecode --config run-manifest.json      # replay a previous run

Config files are ``key = value`` lines (``#`` comments) using the long
option names with dashes or underscores; a ``.json`` run manifest written
by a previous run is also accepted.  Command-line flags override the file.
Artifacts go to ``--output`` (default: ``$PHASECODE_OUTPUT_DIR`` or
``./phasecode-out``).  Exit codes: 0 success, 2 invalid parameters,
3 unresolvable / below-threshold physics (a sweep exits 3 only when none
of its points resolve; otherwise those rows hold NaN).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import capacity, channel, detection, encoding, noise, spectral
from .errors import BelowThresholdError, PhaseCodeError, UnresolvableError, ValidationError

log = logging.getLogger("phasecode")

EXIT_OK, EXIT_INVALID, EXIT_PHYSICS = 0, 2, 3
OUTPUT_ENV = "PHASECODE_OUTPUT_DIR"
COMMANDS = ("detect", "decode", "snr-sweep", "capacity-sweep", "psd", "channel-sim")


def _library_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _beam_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, help="signal (beam 3) amplitude, sqrt(photons/window)")
    p.add_argument("--beta", type=float, help="reference (beam 2) amplitude, sqrt(photons/window)")
    p.add_argument("--squeeze-a-db", type=float, help="beam 3 amplitude-quadrature squeezing in dB (negative squeezes)")
    p.add_argument("--squeeze-b-db", type=float, help="beam 2 amplitude-quadrature squeezing in dB")


def _symbol_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--transform", choices=[t.name for t in encoding.Transform])
    p.add_argument("--theta", type=float, help="longitudinal phase in [0, pi)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasecode", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    def add(name, help):
        p = sub.add_parser(name, help=help, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="key = value config file or JSON run manifest")
        p.add_argument("--output", help="output directory")
        return p

    p = add("detect", "segment photocurrents and a phi-scan trace for one symbol")
    _symbol_options(p)
    _beam_options(p)
    p.add_argument("--phi", type=float, help="reference phase for the single read-out")
    p.add_argument("--phi-steps", type=int, help="points in the phi-scan trace")
    p.add_argument("--numeric", type=_bool, help="integrate fields on the spatial grid")

    p = add("decode", "decode one symbol from a phi-scan")
    _symbol_options(p)
    _beam_options(p)
    p.add_argument("--phi-steps", type=int)
    p.add_argument("--refine", choices=["parabolic", "fit"])
    p.add_argument("--seed", type=int, help="add shot noise to the scan with this seed")

    p = add("snr-sweep", "SNR, minimum phase step and level count over an amplitude grid")
    _beam_options(p)
    p.add_argument("--alpha-range", type=_floats, help="min,max,points")
    p.add_argument("--beta-range", type=_floats, help="min,max,points")

    p = add("capacity-sweep", "optimal capacity and squeezing versus photon budget")
    p.add_argument("--nbar-range", type=_floats, help="min,max,points (log-spaced)")
    p.add_argument("--regimes", type=_strings, help="comma list of both_coherent,one_squeezed,both_squeezed")
    p.add_argument("--convention", choices=sorted(capacity.CONVENTIONS))

    p = add("psd", "signal/noise power spectral densities")
    p.add_argument("--scheme", choices=["single", "consecutive"])
    p.add_argument("--T", type=float, dest="T", help="window length in s")
    p.add_argument("--Tprime", type=float, dest="Tprime", help="gap between windows in s")
    p.add_argument("--N", type=float, dest="N", help="photon flux in photons/s (default 1/T^2)")
    p.add_argument("--squeezing-db", type=float, help="read-out noise floor in dB relative to shot noise (negative = squeezed)")
    p.add_argument("--points", type=int)
    p.add_argument("--span", type=float, help="frequency span in units of 1/T")

    p = add("channel-sim", "encode random bits on a track and read them back")
    _beam_options(p)
    p.add_argument("--pits", type=int)
    p.add_argument("--levels-per-theta", type=int)
    p.add_argument("--spacing-snr", type=float, help="set coherent alpha=beta so one level step has this SNR")
    p.add_argument("--phi-steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--track", help="read this track file instead of generating random bits")
    return parser


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",")]


def _strings(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [v.strip() for v in str(text).split(",") if v.strip()]


DEFAULTS = {
    "detect": dict(transform="PLUS_U0", theta=0.0, alpha=1.0, beta=1.0, squeeze_a_db=0.0,
                   squeeze_b_db=0.0, phi=math.pi / 2, phi_steps=64, numeric=False),
    "decode": dict(transform="PLUS_U0", theta=0.0, alpha=10.0, beta=10.0, squeeze_a_db=0.0,
                   squeeze_b_db=0.0, phi_steps=64, refine="parabolic", seed=None),
    "snr-sweep": dict(alpha_range=[1.0, 100.0, 10.0], beta_range=[1.0, 100.0, 10.0],
                      squeeze_a_db=0.0, squeeze_b_db=0.0, alpha=None, beta=None),
    "capacity-sweep": dict(nbar_range=[1.0, 100.0, 21.0], regimes=[r.value for r in capacity.BudgetRegime],
                           convention="quadrature"),
    "psd": dict(scheme="single", T=1.0, Tprime=0.0, N=None, squeezing_db=0.0, points=4096, span=4.0),
    "channel-sim": dict(pits=1000, levels_per_theta=8, alpha=None, beta=None, spacing_snr=25.0,
                        squeeze_a_db=0.0, squeeze_b_db=0.0, phi_steps=None, seed=None, track=None),
}

CONVERTERS = {
    "theta": float, "alpha": float, "beta": float, "squeeze_a_db": float, "squeeze_b_db": float,
    "phi": float, "phi_steps": int, "numeric": _bool, "seed": int, "alpha_range": _floats,
    "beta_range": _floats, "nbar_range": _floats, "regimes": _strings, "T": float, "Tprime": float,
    "N": float, "squeezing_db": float, "points": int, "span": float, "pits": int,
    "levels_per_theta": int, "spacing_snr": float,
}


def read_config(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json") or text.lstrip().startswith("{"):
        data = json.loads(text)
        cfg = dict(data.get("config", data))
        if "command" in data:
            cfg["command"] = data["command"]
        return cfg
    cfg = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValidationError(f"{path}:{n}: expected 'key = value'")
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def resolve(command: str, file_cfg: dict, flags: dict) -> dict:
    cfg = dict(DEFAULTS[command])
    for key, value in file_cfg.items():
        if key in ("command", "output", "config"):
            continue
        if key not in cfg:
            raise ValidationError(f"unknown option {key!r} for {command}")
        if value is None or value == "None":
            cfg[key] = None
        else:
            try:
                cfg[key] = CONVERTERS.get(key, str)(value)
            except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
                raise ValidationError(f"bad value for {key}: {exc}") from None
    for key, value in flags.items():
        if key in ("command", "output", "config", "verbose"):
            continue
        cfg[key] = value
    return cfg


def _beam(amplitude, db) -> detection.BeamState:
    return detection.BeamState.squeezed(float(amplitude), float(db or 0.0))


def _range(spec, log: bool = False) -> np.ndarray:
    if len(spec) != 3:
        raise ValidationError(f"range needs min,max,points; got {spec}")
    lo, hi, n = float(spec[0]), float(spec[1]), int(spec[2])
    if n < 1 or hi < lo:
        raise ValidationError(f"invalid range {spec}")
    if log:
        if lo <= 0:
            raise ValidationError("log-spaced range needs a positive minimum")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _symbol(cfg) -> encoding.PhaseSymbol:
    try:
        transform = encoding.Transform[cfg["transform"]]
    except KeyError:
        raise ValidationError(f"unknown transform {cfg['transform']!r}") from None
    return encoding.PhaseSymbol(transform, float(cfg["theta"]))


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def cmd_detect(cfg, out: Path, written: list) -> int:
    symbol = _symbol(cfg)
    b3 = _beam(cfg["alpha"], cfg["squeeze_a_db"])
    b2 = detection.BeamState.squeezed(float(cfg["beta"]), float(cfg["squeeze_b_db"]), float(cfg["phi"]))
    grid = detection.DEFAULT_GRID if cfg["numeric"] else None
    r = detection.simulate_detection(symbol, b3, b2, grid)
    summary = {
        "segments": {"D1": r.d1, "D2": r.d2, "D3": r.d3, "D4": r.d4},
        "combinations": r.combos(),
        "noise_var_c": r.noise_var_c,
        "noise_var_d": r.noise_var_d,
        "closed_form": detection.signal_terms(symbol, b3.amplitude, b2.amplitude, b2.phase),
    }
    path = out / "detect.json"
    written.append(path)
    _write_json(path, summary)
    trace = out / "phi_scan.csv"
    written.append(trace)
    detection.write_scan_csv(symbol, b3, b2, detection.phi_grid(int(cfg["phi_steps"])), trace)
    return EXIT_OK


def cmd_decode(cfg, out: Path, written: list) -> int:
    symbol = _symbol(cfg)
    b3 = _beam(cfg["alpha"], cfg["squeeze_a_db"])
    b2 = _beam(cfg["beta"], cfg["squeeze_b_db"])
    steps = int(cfg["phi_steps"])
    rows = detection.scan_rows(symbol, b3, b2, steps)
    if cfg["seed"] is not None:
        rng = np.random.default_rng(int(cfg["seed"]))
        noise_draw = rng.standard_normal((steps, 2)) * np.sqrt(rows[:, 2:4])
        rows = rows.copy()
        rows[:, 0:2] += noise_draw
    res = detection.decode(rows, steps, refine=cfg["refine"])
    summary = {
        "undecidable": res.undecidable,
        "transform": res.symbol.transform.name if res.symbol else None,
        "theta": res.theta,
        "phi_opt": res.phi_opt,
        "combination": res.combination,
        "confidence": res.confidence,
        "candidates": [{"transform": c.transform.name, "theta": c.theta} for c in res.candidates],
    }
    path = out / "decode.json"
    written.append(path)
    _write_json(path, summary)
    return EXIT_OK


def cmd_snr_sweep(cfg, out: Path, written: list) -> int:
    va = _beam(1.0, cfg["squeeze_a_db"])
    vb = _beam(1.0, cfg["squeeze_b_db"])
    alphas = [cfg["alpha"]] if cfg["alpha"] is not None else _range(cfg["alpha_range"])
    betas = [cfg["beta"]] if cfg["beta"] is not None else _range(cfg["beta_range"])
    if min(alphas) < 0 or min(betas) < 0:
        raise ValidationError("amplitudes must be >= 0")
    rows = noise.sweep_rows(alphas, betas, (va.var_plus, va.var_minus), (vb.var_plus, vb.var_minus))
    if all(math.isnan(r[-1]) for r in rows):
        raise UnresolvableError("no point of the sweep reaches SNR 1")
    path = out / "snr_sweep.csv"
    written.append(path)
    noise.write_sweep_csv(rows, path)
    return EXIT_OK


def cmd_capacity_sweep(cfg, out: Path, written: list) -> int:
    n_bars = _range(cfg["nbar_range"], log=True)
    if n_bars[0] < 0.1 or n_bars[-1] > 1e4:
        raise ValidationError("n_bar range must lie within [0.1, 1e4]")
    try:
        regimes = [capacity.BudgetRegime(r) for r in cfg["regimes"]]
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    rows = capacity.sweep(n_bars, regimes, cfg["convention"])
    if all(math.isnan(r[2]) for r in rows):
        raise BelowThresholdError("every budget in the sweep is below threshold")
    path = out / "capacity_sweep.csv"
    written.append(path)
    capacity.write_sweep_csv(rows, path)
    return EXIT_OK


def cmd_psd(cfg, out: Path, written: list) -> int:
    T = float(cfg["T"])
    if not T > 0:
        raise ValidationError(f"window length T must be positive, got {T}")
    N = float(cfg["N"]) if cfg["N"] is not None else 1.0 / T**2
    scheme = spectral.Scheme.SINGLE if cfg["scheme"] == "single" else spectral.Scheme.CONSECUTIVE
    window = spectral.MeasurementWindow(T, N, float(cfg["Tprime"]), scheme)
    points = int(cfg["points"])
    if points < 3 or float(cfg["span"]) <= 0:
        raise ValidationError("psd needs points >= 3 and a positive span")
    curve = spectral.psd(window, window.default_nu(points, float(cfg["span"])))
    factor = 10.0 ** (float(cfg["squeezing_db"]) / 10.0)
    curve = spectral.PSDCurve(curve.nu, curve.signal, curve.noise * factor, window)
    path = out / "psd.csv"
    written.append(path)
    # normalize by the shot-noise signal peak of this scheme
    curve.to_csv(path)
    peak = spectral.peak_and_bandwidth(curve)
    summary = {
        "nu_peak_times_T": peak.nu_peak * T,
        "peak_signal": peak.value,
        "fwhm_times_T": peak.fwhm * T,
        "snr_at_peak": spectral.band_snr(curve, peak.nu_peak, 0.0),
    }
    spath = out / "psd_summary.json"
    written.append(spath)
    _write_json(spath, summary)
    return EXIT_OK


def cmd_channel_sim(cfg, out: Path, written: list) -> int:
    if cfg["seed"] is None:
        raise ValidationError("channel-sim is stochastic: --seed is required")
    seed = int(cfg["seed"])
    if cfg["track"]:
        track = encoding.read_track(cfg["track"])
    else:
        pits, levels = int(cfg["pits"]), int(cfg["levels_per_theta"])
        if pits < 1:
            raise ValidationError("pits must be >= 1")
        width = encoding.LevelCode(levels).bits_per_pit
        # bits come from a stream separate from the read-out noise
        bits = np.random.default_rng([seed, 1]).integers(0, 2, pits * width)
        track = encoding.bits_to_track(bits.tolist(), levels)
    if cfg["alpha"] is not None and cfg["beta"] is not None:
        b3 = _beam(cfg["alpha"], cfg["squeeze_a_db"])
        b2 = _beam(cfg["beta"], cfg["squeeze_b_db"])
    else:
        b3, b2 = channel.beams_for_spacing_snr(track.levels_per_theta, float(cfg["spacing_snr"]))
    steps = cfg["phi_steps"]
    report = channel.channel_sim(track, b3, b2, seed=seed, phi_steps=None if steps is None else int(steps))
    tpath = out / "track.txt"
    written.append(tpath)
    encoding.write_track(track, tpath)
    cpath = out / "channel_pits.csv"
    written.append(cpath)
    with open(cpath, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pit", "sent_transform", "sent_theta_rad", "decoded_transform", "decoded_theta_rad", "error"])
        code = track.code
        for k, (sent, got) in enumerate(zip(track.symbols(), report.decoded)):
            if got is None:
                writer.writerow([k, sent.transform.name, repr(sent.theta), "UNDECIDABLE", "", ""])
            else:
                writer.writerow([k, sent.transform.name, repr(sent.theta), got.transform.name,
                                 repr(got.theta), int(code.value(sent) != code.value(got))])
    rpath = out / "channel_report.json"
    written.append(rpath)
    summary = report.summary()
    summary["alpha"], summary["beta"] = b3.amplitude, b2.amplitude
    _write_json(rpath, summary)
    return EXIT_OK


HANDLERS = {
    "detect": cmd_detect,
    "decode": cmd_decode,
    "snr-sweep": cmd_snr_sweep,
    "capacity-sweep": cmd_capacity_sweep,
    "psd": cmd_psd,
    "channel-sim": cmd_channel_sim,
}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # allow "phasecode --config manifest.json" with the command taken from the file
    if argv and argv[0] not in COMMANDS and "--config" in argv and not any(a in COMMANDS for a in argv):
        i = argv.index("--config")
        try:
            file_cfg = read_config(argv[i + 1])
        except (IndexError, OSError, ValueError) as exc:
            print(f"phasecode: cannot read config: {exc}", file=sys.stderr)
            return EXIT_INVALID
        if "command" not in file_cfg:
            print("phasecode: config file names no command", file=sys.stderr)
            return EXIT_INVALID
        argv = [file_cfg["command"]] + argv
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_INVALID
    flags = vars(args)
    written: list[Path] = []
    try:
        file_cfg = read_config(flags["config"]) if "config" in flags else {}
        if file_cfg.get("command", args.command) != args.command:
            raise ValidationError(f"config is for {file_cfg['command']!r}, not {args.command!r}")
        cfg = resolve(args.command, file_cfg, flags)
        out = Path(flags.get("output") or file_cfg.get("output") or os.environ.get(OUTPUT_ENV) or "phasecode-out")
        out.mkdir(parents=True, exist_ok=True)
        status = HANDLERS[args.command](cfg, out, written)
        manifest = {
            "command": args.command,
            "config": cfg,
            "library_version": _library_version(),
            "seed": cfg.get("seed"),
            "artifacts": [p.name for p in written],
        }
        mpath = out / "run-manifest.json"
        _write_json(mpath, manifest)
        log.info("wrote %s", ", ".join(str(p) for p in written + [mpath]))
        return status
    except ValidationError as exc:
        _cleanup(written)
        print(f"phasecode: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except UnresolvableError as exc:
        _cleanup(written)
        print(f"phasecode: unresolvable: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except PhaseCodeError as exc:
        _cleanup(written)
        print(f"phasecode: {exc}", file=sys.stderr)
        return EXIT_INVALID


def _cleanup(paths) -> None:
    for p in paths:
        try:
            Path(p).unlink()
        except FileNotFoundError:
            pass


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

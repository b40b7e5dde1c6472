"""Command-line front end: run sessions and parameter sweeps, emit data files.

Exit codes: 0 session accepted, 1 usage or configuration error, 2 aborted
with an eavesdropper suspected, 3 aborted with no key material.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .adversary import InterceptResend, Qnd, Tap
from .codec import signal_amplitude_for
from .config import SpectrumSettings, load_config
from .detection import SpectralSignal, bell_measure, correlation_degree, spectrum
from .errors import ConfigError, HidingWindowError, SimulationError
from .quadrature import Quadrature, RngStream, apply_loss, sample_slots
from .report import (
    build_run_report,
    fmt,
    write_report,
    write_spectrum_csv,
    write_trace_csv,
)
from .session import SessionConfig, VerdictStatus, compare_keys, run_session

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EVE_SUSPECTED = 2
EXIT_NO_KEY = 3

ABORT_EXIT_CODES = {
    "eavesdropper_suspected": EXIT_EVE_SUSPECTED,
    "no_key_material": EXIT_NO_KEY,
}

# Substream phases outside the range the session uses internally.
_PHASE_SPECTRUM = 1000
_PHASE_PROBE = 1001

SWEEP_PARAMS = ("r", "tau", "fake_r", "sigma_m", "eta", "margin")


class _Parser(argparse.ArgumentParser):
    # Exit 1 on usage errors; argparse's default 2 is reserved for the
    # eavesdropper-suspected outcome.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qcsim",
        description=(
            "Monte Carlo simulator of a key-distribution protocol built on "
            "EPR-correlated beams"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one session from a config file")
    run.add_argument("--config", required=True, help="session config file (INI)")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--out", default="qcsim-out", help="output directory")
    run.add_argument(
        "--spectrum",
        action="store_true",
        help="also emit spectrum-analyzer traces for the session parameters",
    )

    sweep = sub.add_parser("sweep", help="sweep one parameter over a grid")
    sweep.add_argument("--config", required=True, help="base session config file")
    sweep.add_argument(
        "--param", required=True, help=f"one of: {', '.join(SWEEP_PARAMS)}"
    )
    sweep.add_argument("--grid", required=True, help="grid as start:stop:step")
    sweep.add_argument("--out", required=True, help="output CSV path")
    sweep.add_argument("--seed", type=int, default=None, help="override the config seed")
    sweep.add_argument(
        "--sessions-per-point",
        type=int,
        default=4,
        help="sessions averaged per grid point",
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_sweep(args)
    except SimulationError as exc:
        print(f"qcsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qcsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _cmd_run(args) -> int:
    cfg, spectrum_cfg = load_config(args.config, seed_override=args.seed)
    transcript = run_session(cfg)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    trace_files = []
    for traces in transcript.traces:
        name = f"trace_frame_{traces.alice.frame_index:04d}.csv"
        write_trace_csv(out_dir / name, traces)
        trace_files.append(name)

    spectrum_file = None
    if args.spectrum:
        spectrum_file = "spectrum.csv"
        write_spectrum_csv(
            out_dir / spectrum_file, _session_spectrum(cfg, spectrum_cfg, transcript)
        )

    report = build_run_report(transcript, tuple(trace_files), spectrum_file)
    write_report(out_dir / "report.json", report)

    print(f"status: {report.status}" + (f" ({report.abort_reason})" if report.abort_reason else ""))
    if report.key is not None:
        print(f"key: {report.key}")
    print(f"ber: {fmt(report.ber)}")
    if report.cd_plus_db is not None:
        print(
            f"correlation degree: {fmt(report.cd_plus_db)} dB "
            f"(expected {fmt(report.cd_expected_db)} dB)"
        )
    print(f"report: {out_dir / 'report.json'}")

    if transcript.outcome.accepted:
        return EXIT_OK
    return ABORT_EXIT_CODES[transcript.outcome.reason]


def _session_spectrum(cfg: SessionConfig, settings: SpectrumSettings, transcript):
    signal = SpectralSignal(
        freq_hz=settings.signal_freq_hz,
        power=transcript.signal_amplitude**2,
        quadrature=settings.signal_quadrature,
    )
    return spectrum(
        cfg.r,
        (settings.span_low_hz, settings.span_high_hz),
        settings.rbw_hz,
        settings.averages,
        cfg.detector,
        RngStream(cfg.seed).substream(0, _PHASE_SPECTRUM),
        signal=signal,
    )


def _parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"grid values must be numbers, got {text!r}") from None
    if step <= 0.0:
        raise ConfigError(f"grid step must be > 0, got {step!r}")
    values = []
    k = 0
    while True:
        v = start + k * step
        if v > stop + 1e-12:
            break
        values.append(v)
        k += 1
    if not values:
        raise ConfigError(f"grid {text!r} contains no points")
    return values


def _apply_sweep_param(cfg: SessionConfig, name: str, value: float) -> SessionConfig:
    if name == "r":
        return replace(cfg, r=value)
    if name == "tau":
        return replace(cfg, attack=Tap(tau=value))
    if name == "fake_r":
        return replace(cfg, attack=InterceptResend(fake_r=value))
    if name == "sigma_m":
        quadrature = (
            cfg.attack.measured_quadrature
            if isinstance(cfg.attack, Qnd)
            else Quadrature.X
        )
        return replace(
            cfg, attack=Qnd(measured_quadrature=quadrature, measurement_var=value)
        )
    if name == "eta":
        return replace(cfg, eta_out=value)
    if name == "margin":
        return replace(cfg, margin=value)
    raise ConfigError(
        f"unknown sweep parameter {name!r}; expected one of {', '.join(SWEEP_PARAMS)}"
    )


def _cd_probe(cfg: SessionConfig, seed: int) -> float:
    """Correlation degree of an unmodulated session (used when the hiding
    window is empty and no key can be encoded)."""
    n = max(2, cfg.frames * cfg.slots_per_frame)
    root = RngStream(seed)
    slots = sample_slots(cfg.r, root.substream(0, _PHASE_PROBE), n)
    x, y = apply_loss(
        slots.x1,
        slots.y1,
        cfg.eta_out * cfg.eta_back,
        root.substream(1, _PHASE_PROBE),
    )
    joint = bell_measure(
        (x, y), (slots.x2, slots.y2), cfg.detector, root.substream(2, _PHASE_PROBE)
    )
    return correlation_degree(joint).cd_db


def _cmd_sweep(args) -> int:
    if args.sessions_per_point < 1:
        raise ConfigError(
            f"--sessions-per-point must be >= 1, got {args.sessions_per_point}"
        )
    base_cfg, _ = load_config(args.config, seed_override=args.seed)
    values = _parse_grid(args.grid)
    if args.param not in SWEEP_PARAMS:
        raise ConfigError(
            f"unknown sweep parameter {args.param!r}; expected one of "
            f"{', '.join(SWEEP_PARAMS)}"
        )

    lines = ["param,value,cd_db,ber,detection_rate"]
    for index, value in enumerate(values):
        point_cfg = _apply_sweep_param(base_cfg, args.param, value)
        try:
            signal_amplitude_for(point_cfg.r, point_cfg.margin)
        except HidingWindowError:
            cd_db = _cd_probe(point_cfg, base_cfg.seed + 7919 * (index + 1))
            lines.append(f"{args.param},{fmt(value)},{fmt(cd_db)},,")
            print(
                f"qcsim: note: {args.param}={fmt(value)} leaves no hiding window; "
                f"no key can be encoded there",
                file=sys.stderr,
            )
            continue
        cds, bers, detections = [], [], []
        for k in range(args.sessions_per_point):
            point_seed = base_cfg.seed + 7919 * (index + 1) + k
            transcript = run_session(replace(point_cfg, seed=point_seed))
            if transcript.cd is not None:
                cds.append(transcript.cd.measured_plus_db)
            bers.append(
                compare_keys(transcript.sent_bits, transcript.decoded_bits).ber
            )
            detections.append(
                transcript.verdict.status is VerdictStatus.EVE_SUSPECTED
            )
        cd_db = float(np.mean(cds)) if cds else float("nan")
        lines.append(
            f"{args.param},{fmt(value)},{fmt(cd_db)},"
            f"{fmt(float(np.mean(bers)))},{fmt(float(np.mean(detections)))}"
        )

    out_path = Path(args.out)
    if out_path.parent != Path(""):
        out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n")
    print(f"wrote {out_path} ({len(values)} grid points)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

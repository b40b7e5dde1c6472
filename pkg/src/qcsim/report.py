"""Serialization of session results: the machine-readable run report, trace
CSVs, spectrum CSVs, and a deterministic transcript dump.

All numeric output goes through one fixed format (10 significant digits) so
files written from identical runs are byte-identical across platforms.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .adversary import InterceptResend, NoAttack, Qnd, Tap
from .detection import NoiseSpectrum
from .session import SessionConfig, SessionTranscript, compare_keys
from .verification import BlockTraces

SCHEMA_VERSION = "1.0"
PACKAGE_VERSION = "0.1.0"


def fmt(x: float) -> str:
    """Fixed decimal rendering used for every float written to disk."""
    return format(float(x), ".10g")


def _num(x) -> float | None:
    if x is None:
        return None
    return float(fmt(x))


def attack_to_dict(attack) -> dict:
    if isinstance(attack, NoAttack):
        return {"kind": "none"}
    if isinstance(attack, Tap):
        return {"kind": "tap", "tau": _num(attack.tau)}
    if isinstance(attack, InterceptResend):
        return {"kind": "intercept_resend", "fake_r": _num(attack.fake_r)}
    if isinstance(attack, Qnd):
        return {
            "kind": "qnd",
            "measured_quadrature": attack.measured_quadrature.value,
            "measurement_var": _num(attack.measurement_var),
        }
    raise TypeError(f"unknown attack spec {attack!r}")


def config_to_dict(cfg: SessionConfig) -> dict:
    return {
        "r": _num(cfg.r),
        "key_bits": cfg.key_bits,
        "seed": cfg.seed,
        "frames": cfg.frames,
        "slots_per_frame": cfg.slots_per_frame,
        "margin": _num(cfg.margin),
        "eta_out": _num(cfg.eta_out),
        "eta_back": _num(cfg.eta_back),
        "block_prob": _num(cfg.block_prob),
        "detector": {"electronic_noise_var": _num(cfg.detector.electronic_noise_var)},
        "attack": attack_to_dict(cfg.attack),
        "thresholds": {
            "pearson": _num(cfg.thresholds.pearson),
            "rms_ratio": _num(cfg.thresholds.rms_ratio),
            "cd_margin_db": _num(cfg.thresholds.cd_margin_db),
        },
    }


def dumps_deterministic(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def transcript_to_dict(transcript: SessionTranscript) -> dict:
    """Full session record as JSON-compatible data; deterministic in the config."""
    t = transcript
    cd = None
    if t.cd is not None:
        cd = {
            "measured_plus_db": _num(t.cd.measured_plus_db),
            "measured_minus_db": _num(t.cd.measured_minus_db),
            "expected_db": _num(t.cd.expected_db),
        }
    eve = None
    if t.eve is not None:
        eve = {
            "decoded_bits": list(t.eve.decoded_bits),
            "observations": {
                str(frame): [fmt(v) for v in samples]
                for frame, samples in sorted(t.eve.observations.items())
            },
        }
    return {
        "config": config_to_dict(t.config),
        "signal_amplitude": _num(t.signal_amplitude),
        "sent_bits": t.sent_bits,
        "decoded_bits": t.decoded_bits,
        "confidences": [_num(c) for c in t.confidences],
        "blocked_frames": list(t.blocked_frames),
        "frame_cd": [
            {
                "frame": fc.frame_index,
                "plus_db": _num(fc.plus_db),
                "minus_db": _num(fc.minus_db),
            }
            for fc in t.frame_cd
        ],
        "cd": cd,
        "trace_stats": [
            {
                "frame": traces.alice.frame_index,
                "pearson": _num(stats.pearson),
                "rms_sum": _num(stats.rms_sum),
                "rms_diff": _num(stats.rms_diff),
            }
            for traces, stats in zip(t.traces, t.trace_stats)
        ],
        "traces": [
            {
                "frame": traces.alice.frame_index,
                "alice": [fmt(v) for v in traces.alice.samples],
                "bob": [fmt(v) for v in traces.bob.samples],
            }
            for traces in t.traces
        ],
        "verdict": {"status": t.verdict.status.value, "reasons": list(t.verdict.reasons)},
        "outcome": {
            "accepted": t.outcome.accepted,
            "key": t.outcome.key,
            "reason": t.outcome.reason,
        },
        "eve": eve,
    }


def transcript_to_json(transcript: SessionTranscript) -> str:
    return dumps_deterministic(transcript_to_dict(transcript))


@dataclass(frozen=True)
class RunReport:
    """Machine-readable session summary; round-trips losslessly through JSON."""

    schema_version: str
    version: str
    seed: int
    status: str  # "accept" | "abort"
    abort_reason: str | None
    key: str | None
    sent_bits: str
    decoded_bits: str
    ber: float
    mismatches: tuple[int, ...]
    cd_plus_db: float | None
    cd_minus_db: float | None
    cd_expected_db: float | None
    verdict_status: str
    verdict_reasons: tuple[str, ...]
    blocked_frames: tuple[int, ...]
    trace_files: tuple[str, ...]
    spectrum_file: str | None
    config: dict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mismatches"] = list(self.mismatches)
        d["verdict_reasons"] = list(self.verdict_reasons)
        d["blocked_frames"] = list(self.blocked_frames)
        d["trace_files"] = list(self.trace_files)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(
            schema_version=d["schema_version"],
            version=d["version"],
            seed=d["seed"],
            status=d["status"],
            abort_reason=d["abort_reason"],
            key=d["key"],
            sent_bits=d["sent_bits"],
            decoded_bits=d["decoded_bits"],
            ber=d["ber"],
            mismatches=tuple(d["mismatches"]),
            cd_plus_db=d["cd_plus_db"],
            cd_minus_db=d["cd_minus_db"],
            cd_expected_db=d["cd_expected_db"],
            verdict_status=d["verdict_status"],
            verdict_reasons=tuple(d["verdict_reasons"]),
            blocked_frames=tuple(d["blocked_frames"]),
            trace_files=tuple(d["trace_files"]),
            spectrum_file=d["spectrum_file"],
            config=d["config"],
        )


def build_run_report(
    transcript: SessionTranscript,
    trace_files: tuple[str, ...] = (),
    spectrum_file: str | None = None,
) -> RunReport:
    t = transcript
    comparison = compare_keys(t.sent_bits, t.decoded_bits)
    return RunReport(
        schema_version=SCHEMA_VERSION,
        version=PACKAGE_VERSION,
        seed=t.config.seed,
        status="accept" if t.outcome.accepted else "abort",
        abort_reason=t.outcome.reason,
        key=t.outcome.key,
        sent_bits=t.sent_bits,
        decoded_bits=t.decoded_bits,
        ber=_num(comparison.ber),
        mismatches=comparison.mismatches,
        cd_plus_db=_num(t.cd.measured_plus_db) if t.cd else None,
        cd_minus_db=_num(t.cd.measured_minus_db) if t.cd else None,
        cd_expected_db=_num(t.cd.expected_db) if t.cd else None,
        verdict_status=t.verdict.status.value,
        verdict_reasons=t.verdict.reasons,
        blocked_frames=t.blocked_frames,
        trace_files=trace_files,
        spectrum_file=spectrum_file,
        config=config_to_dict(t.config),
    )


def write_report(path: str | Path, report: RunReport) -> None:
    Path(path).write_text(dumps_deterministic(report.to_dict()))


def load_report(path: str | Path) -> RunReport:
    return RunReport.from_dict(json.loads(Path(path).read_text()))


def write_trace_csv(path: str | Path, traces: BlockTraces) -> None:
    a = np.asarray(traces.alice.samples)
    b = np.asarray(traces.bob.samples)
    lines = ["point,alice,bob"]
    for i in range(a.size):
        lines.append(f"{i},{fmt(a[i])},{fmt(b[i])}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_spectrum_csv(path: str | Path, spectrum: NoiseSpectrum) -> None:
    lines = ["freq_hz,snl_db,single_beam_db,correlation_db"]
    for i in range(spectrum.freq_hz.size):
        lines.append(
            f"{fmt(spectrum.freq_hz[i])},{fmt(spectrum.snl_db[i])},"
            f"{fmt(spectrum.single_beam_db[i])},{fmt(spectrum.correlation_db[i])}"
        )
    Path(path).write_text("\n".join(lines) + "\n")

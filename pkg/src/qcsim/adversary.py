"""Channel attacks on the in-flight signal beam.

Three models: passive beam-splitter tapping, wholesale intercept-and-resend
with a substituted correlated source, and a single-quadrature probe that
pays the minimum-uncertainty back-action on the conjugate quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codec import BitFrame, decode_bit, encode_bit, symbol_for_bit
from .detection import JointMeasurement
from .errors import DomainError
from .quadrature import Quadrature, RngStream, SlotPair, SqueezeParam, sample_slots


@dataclass(frozen=True)
class NoAttack:
    """Honest channel."""


@dataclass(frozen=True)
class Tap:
    """Split a fraction tau of the beam off to the eavesdropper."""

    tau: float

    def __post_init__(self):
        if not (math.isfinite(self.tau) and 0.0 <= self.tau <= 1.0):
            raise DomainError(f"tap fraction must lie in [0, 1], got {self.tau!r}")


@dataclass(frozen=True)
class InterceptResend:
    """Substitute a fake correlated source toward the sender and relay
    re-modulated bits on the genuine beam."""

    fake_r: float

    def __post_init__(self):
        if not (math.isfinite(self.fake_r) and self.fake_r >= 0.0):
            raise DomainError(
                f"fake source correlation must be finite and >= 0, got {self.fake_r!r}"
            )


@dataclass(frozen=True)
class Qnd:
    """Read one quadrature with readout noise measurement_var; the conjugate
    quadrature gains back-action noise 1/measurement_var."""

    measured_quadrature: Quadrature = Quadrature.X
    measurement_var: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.measurement_var) and self.measurement_var > 0.0):
            raise DomainError(
                f"measurement variance must be > 0, got {self.measurement_var!r}"
            )


AttackSpec = NoAttack | Tap | InterceptResend | Qnd


@dataclass
class EveRecord:
    """What the eavesdropper learned: per-slot observations keyed by frame,
    and (intercept-resend only) her per-frame decoded bits."""

    observations: dict[int, np.ndarray] = field(default_factory=dict)
    decoded_bits: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class TapResult:
    to_bob: tuple
    eve: tuple


def tap(x, y, tau: float, rng: RngStream) -> TapResult:
    """Beam-splitter tap: the forwarded beam keeps sqrt(1-tau) of the field,
    the eavesdropper port gets sqrt(tau), each with its vacuum counterpart."""
    tau = float(tau)
    if not (math.isfinite(tau) and 0.0 <= tau <= 1.0):
        raise DomainError(f"tap fraction must lie in [0, 1], got {tau!r}")
    g = rng.generator()
    shape = np.shape(x)
    if shape:
        vx = g.standard_normal(shape)
        vy = g.standard_normal(shape)
    else:
        vx = g.standard_normal()
        vy = g.standard_normal()
    keep = math.sqrt(1.0 - tau)
    take = math.sqrt(tau)
    x_bob = keep * x + take * vx
    y_bob = keep * y + take * vy
    x_eve = take * x - keep * vx
    y_eve = take * y - keep * vy
    return TapResult(to_bob=(x_bob, y_bob), eve=(x_eve, y_eve))


def back_action_var(measurement_var: float) -> float:
    """Minimum-uncertainty disturbance added to the conjugate quadrature."""
    measurement_var = float(measurement_var)
    if not (math.isfinite(measurement_var) and measurement_var > 0.0):
        raise DomainError(
            f"measurement variance must be > 0, got {measurement_var!r}"
        )
    return 1.0 / measurement_var


@dataclass(frozen=True)
class QndResult:
    eve_estimate: float | np.ndarray
    to_bob: tuple


def qnd_measure(
    x, y, quadrature: Quadrature, measurement_var: float, rng: RngStream
) -> QndResult:
    """Probe one quadrature nondestructively.

    The measured quadrature is forwarded unchanged and read out with noise
    of variance measurement_var; the conjugate quadrature of the forwarded
    beam gains independent noise of variance 1/measurement_var.
    """
    disturbance = back_action_var(measurement_var)
    g = rng.generator()
    shape = np.shape(x)
    if shape:
        readout = g.standard_normal(shape)
        kick = g.standard_normal(shape)
    else:
        readout = g.standard_normal()
        kick = g.standard_normal()
    readout = math.sqrt(measurement_var) * readout
    kick = math.sqrt(disturbance) * kick
    if quadrature is Quadrature.X:
        return QndResult(eve_estimate=x + readout, to_bob=(x, y + kick))
    return QndResult(eve_estimate=y + readout, to_bob=(x + kick, y))


class InterceptResendEve:
    """Stateful intercept-resend attacker.

    Per frame she stores the genuine beam, hands the sender one beam of a
    fake correlated pair from her own source, decodes the sender's
    modulation against the retained fake idler with an ideal (noiseless)
    joint detector, then re-modulates her decoded bit onto the stored
    genuine beam with the protocol's public signal amplitude.
    """

    def __init__(
        self,
        fake_r: SqueezeParam,
        amplitude: float,
        session_r: SqueezeParam,
        rng: RngStream,
    ):
        spec = InterceptResend(fake_r)  # validates
        self.fake_r = spec.fake_r
        self.amplitude = float(amplitude)
        self.session_r = float(session_r)
        self._rng = rng
        # Her decode floor: ideal detection of her own pair.
        self._noise_var = 2.0 * math.exp(-2.0 * self.fake_r)
        self._real: dict[int, tuple] = {}
        self._fake_idler: dict[int, tuple] = {}
        self.record = EveRecord()

    def substitute(self, frame_index: int, real_x, real_y, n_slots: int):
        """Store the genuine beam and return the fake beam sent to the sender."""
        self._real[frame_index] = (real_x, real_y)
        fake = sample_slots(self.fake_r, self._rng.substream(frame_index), n_slots)
        self._fake_idler[frame_index] = (fake.x2, fake.y2)
        return fake.x1, fake.y1

    def drop(self, frame_index: int) -> None:
        """Discard state for a frame that never came back (sender blocked it)."""
        self._real.pop(frame_index, None)
        self._fake_idler.pop(frame_index, None)

    def relay(self, frame_index: int, encoded_x, encoded_y):
        """Decode the returned fake beam and forward the re-modulated real beam.

        Returns (x, y, decoded_bit) of the beam sent on toward the receiver.
        """
        idler_x, idler_y = self._fake_idler.pop(frame_index)
        real_x, real_y = self._real.pop(frame_index)
        measurement = JointMeasurement(
            d_plus=encoded_x + idler_x, d_minus=encoded_y - idler_y
        )
        decoded = decode_bit(measurement, self.amplitude, self._noise_var)
        self.record.decoded_bits.append(decoded.bit)
        self.record.observations[frame_index] = np.atleast_1d(
            np.asarray(measurement.d_plus, dtype=float)
        )
        frame = BitFrame(
            frame_index=frame_index,
            bit=decoded.bit,
            symbol=symbol_for_bit(decoded.bit, self.amplitude),
            slot_count=int(np.size(real_x)),
        )
        out = encode_bit(frame, SlotPair(real_x, real_y, 0.0, 0.0), self.session_r)
        return out.x1, out.y1, decoded.bit

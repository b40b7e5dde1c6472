"""EPR-correlated quadrature sampling and the closed-form variance algebra.

Everything is expressed in shot-noise units: a vacuum-limited beam has unit
quadrature variance, so a joint two-beam measurement sits at a shot-noise
limit of 2.  The correlation parameter ``r >= 0`` sets both the excess noise
of each individual beam, cosh(2r), and the squeezed variance of the
amplitude-sum / phase-difference combinations, 2*exp(-2r).  Each slot is an
independent sample of the four quadratures at the analysis frequency; there
are no time-domain cavity dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError

#: Correlation parameter above which the hiding window opens (exp(4r) = 3).
HIDING_THRESHOLD_R = math.log(3.0) / 4.0

_MASK64 = (1 << 64) - 1
_MASK32 = (1 << 32) - 1

# A float for the correlation parameter r; kept as an alias for readability.
SqueezeParam = float


class Quadrature(Enum):
    """Amplitude-like (X) or phase-like (Y) component of the field."""

    X = "x"
    Y = "y"


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream: (seed, substream_id) fully determine the samples.

    Substreams use independent Philox keys, so draws from different
    substreams are order-independent and safe to generate in parallel.
    Children should be derived from a root stream (substream_id 0).
    """

    seed: int
    substream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.seed & _MASK64, self.substream_id & _MASK64], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, index: int, phase: int = 0) -> "RngStream":
        """Child stream; distinct (phase, index) pairs never collide."""
        if index < 0 or phase < 0:
            raise DomainError("substream index and phase must be non-negative")
        return RngStream(self.seed, ((phase & _MASK32) << 32) | (index & _MASK32))


@dataclass(frozen=True)
class SlotPair:
    """Quadratures of one slot (or a batch of slots) of an EPR beam pair.

    Beam 1 (x1, y1) is the transmitted signal beam, beam 2 (x2, y2) the
    retained idler.  Fields hold scalars or equally shaped arrays.
    """

    x1: float | np.ndarray
    y1: float | np.ndarray
    x2: float | np.ndarray
    y2: float | np.ndarray


@dataclass(frozen=True)
class VariancePair:
    """Closed-form variances at a given correlation parameter."""

    beam_var: float  # variance of any single quadrature, cosh(2r)
    corr_var: float  # variance of x1+x2 and of y1-y2, 2*exp(-2r)


@dataclass(frozen=True)
class HidingWindow:
    """Open interval of signal powers that stay below the single-beam noise
    yet above the squeezed floor."""

    lower: float  # 2*exp(-2r)
    upper: float  # cosh(2r)

    @property
    def empty(self) -> bool:
        return self.lower >= self.upper

    def contains(self, power: float) -> bool:
        """True if `power` lies strictly inside the window."""
        return self.lower < power < self.upper


def _check_r(r: float) -> float:
    r = float(r)
    if not math.isfinite(r) or r < 0.0:
        raise DomainError(f"correlation parameter must be finite and >= 0, got {r!r}")
    return r


def epr_variance(r: SqueezeParam) -> VariancePair:
    """Single-beam and sum/difference variances at correlation parameter r."""
    r = _check_r(r)
    return VariancePair(beam_var=math.cosh(2.0 * r), corr_var=2.0 * math.exp(-2.0 * r))


def hiding_window(r: SqueezeParam) -> HidingWindow:
    """Allowed signal-power interval (2e^-2r, cosh 2r); empty iff r <= ln(3)/4."""
    r = _check_r(r)
    return HidingWindow(lower=2.0 * math.exp(-2.0 * r), upper=math.cosh(2.0 * r))


def slot_from_normals(r, u, v, w, z):
    """Map four standard normals to correlated quadratures.

    The combination gives anticorrelated amplitude quadratures and correlated
    phase quadratures: every single quadrature has variance cosh(2r) while
    x1+x2 and y1-y2 have variance 2*exp(-2r).  Inputs may be scalars or
    arrays.
    """
    r = _check_r(r)
    a = math.exp(-r) / math.sqrt(2.0)
    b = math.exp(r) / math.sqrt(2.0)
    return SlotPair(
        x1=a * u + b * v,
        y1=b * w + a * z,
        x2=a * u - b * v,
        y2=b * w - a * z,
    )


def covariance_matrix(r: SqueezeParam) -> np.ndarray:
    """Covariance of (x1, y1, x2, y2) implied by the variance formulas."""
    r = _check_r(r)
    c = math.cosh(2.0 * r)
    s = math.sinh(2.0 * r)
    return np.array(
        [
            [c, 0.0, -s, 0.0],
            [0.0, c, 0.0, s],
            [-s, 0.0, c, 0.0],
            [0.0, s, 0.0, c],
        ]
    )


def sample_slot(r: SqueezeParam, rng: RngStream) -> SlotPair:
    """Draw a single slot; (r, rng) fully determine the result."""
    u, v, w, z = rng.generator().standard_normal(4)
    return slot_from_normals(r, u, v, w, z)


def sample_slots(r: SqueezeParam, rng: RngStream, n: int) -> SlotPair:
    """Draw a batch of n slots from one substream in a single vectorized pass."""
    n = int(n)
    if n < 1:
        raise DomainError(f"slot count must be >= 1, got {n}")
    u, v, w, z = rng.generator().standard_normal((4, n))
    return slot_from_normals(r, u, v, w, z)


def apply_loss(x, y, eta: float, rng: RngStream):
    """Beam-splitter loss on one beam: keep sqrt(eta) of the field, admix
    sqrt(1-eta) of fresh vacuum on each quadrature independently."""
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"transmission efficiency must lie in [0, 1], got {eta!r}")
    g = rng.generator()
    shape = np.shape(x)
    if shape:
        vx = g.standard_normal(shape)
        vy = g.standard_normal(shape)
    else:
        vx = g.standard_normal()
        vy = g.standard_normal()
    t = math.sqrt(eta)
    f = math.sqrt(1.0 - eta)
    return t * x + f * vx, t * y + f * vy


def expected_sum_variance(
    r: SqueezeParam, eta: float = 1.0, electronic_noise_var: float = 0.0
) -> float:
    """Variance of x1'+x2 (equally of y1'-y2) after the signal beam is
    transmitted at total efficiency eta, plus detector electronic noise.

    Successive beam splitters compose into one with the product efficiency,
    so eta is the product over channel legs.
    """
    r = _check_r(r)
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"transmission efficiency must lie in [0, 1], got {eta!r}")
    if not electronic_noise_var >= 0.0:
        raise DomainError("electronic noise variance must be >= 0")
    c = math.cosh(2.0 * r)
    s = math.sinh(2.0 * r)
    return (1.0 + eta) * c - 2.0 * math.sqrt(eta) * s + (1.0 - eta) + electronic_noise_var

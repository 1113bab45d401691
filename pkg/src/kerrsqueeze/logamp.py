"""Complex amplitudes stored as (log magnitude, phase).

At mean photon numbers of 10^5..10^7 the inner products between nearly
parallel states have magnitudes like exp(-2|alpha|^2 sin^2(phi/2)) that
underflow or lose all significance as plain complex doubles.  Keeping the
natural log of the magnitude and the phase separately is exact over the whole
range the library operates in.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Tuple

from .errors import DomainError

TWO_PI = 2.0 * math.pi

# exp(700) is finite but within a factor ~e^10 of the double-precision
# ceiling; anything above is treated as an overflow request.
_OVERFLOW_LOG = 700.0


def wrap_phase(phase: float) -> float:
    """Wrap an angle in radians to the interval (-pi, pi]."""
    w = math.remainder(phase, TWO_PI)
    if w <= -math.pi:
        w += TWO_PI
    return w


@dataclass(frozen=True)
class LogAmplitude:
    """A complex number ``exp(log_mag) * exp(1j * phase)``.

    ``log_mag`` is the natural log of the magnitude (``-inf`` encodes an
    exact zero) and ``phase`` is stored wrapped to (-pi, pi].
    """

    log_mag: float
    phase: float

    def __post_init__(self) -> None:
        if math.isnan(self.log_mag) or self.log_mag == math.inf:
            raise DomainError(f"invalid log magnitude {self.log_mag!r}")
        if not math.isfinite(self.phase):
            raise DomainError(f"invalid phase {self.phase!r}")
        object.__setattr__(self, "phase", wrap_phase(self.phase))
        if self.log_mag == -math.inf:
            object.__setattr__(self, "phase", 0.0)

    @classmethod
    def zero(cls) -> "LogAmplitude":
        return cls(-math.inf, 0.0)

    @classmethod
    def one(cls) -> "LogAmplitude":
        return cls(0.0, 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> "LogAmplitude":
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise DomainError(f"non-finite complex value {z!r}")
        if z == 0:
            return cls.zero()
        return cls(math.log(abs(z)), cmath.phase(z))

    def __mul__(self, other: "LogAmplitude") -> "LogAmplitude":
        if not isinstance(other, LogAmplitude):
            return NotImplemented
        return LogAmplitude(self.log_mag + other.log_mag, self.phase + other.phase)

    def conjugate(self) -> "LogAmplitude":
        return LogAmplitude(self.log_mag, -self.phase)

    @property
    def magnitude(self) -> float:
        """Plain-float magnitude; underflows to 0.0 for very negative log_mag."""
        if self.log_mag == -math.inf:
            return 0.0
        if self.log_mag > _OVERFLOW_LOG:
            raise OverflowError(
                f"magnitude exp({self.log_mag:.6g}) exceeds double-precision range"
            )
        return math.exp(self.log_mag)

    def to_complex(self) -> complex:
        """Convert to a plain complex number.

        Exact (to rounding) whenever ``log_mag <= 0``; raises ``OverflowError``
        for ``log_mag > 700`` instead of returning infinities.
        """
        m = self.magnitude
        if m == 0.0:
            return 0j
        return complex(m * math.cos(self.phase), m * math.sin(self.phase))


def combine(terms: Iterable[Tuple[complex, LogAmplitude]]) -> LogAmplitude:
    """Log-domain weighted sum ``sum_i c_i * a_i``.

    The largest log magnitude is factored out before the complex addition, so
    the result is meaningful even when every term underflows as a plain float.
    """
    terms = [(complex(c), a) for c, a in terms]
    finite = [a.log_mag for c, a in terms if c != 0 and a.log_mag != -math.inf]
    if not finite:
        return LogAmplitude.zero()
    lead = max(finite)
    acc = 0j
    for c, a in terms:
        if c == 0 or a.log_mag == -math.inf:
            continue
        acc += c * math.exp(a.log_mag - lead) * complex(
            math.cos(a.phase), math.sin(a.phase)
        )
    if acc == 0:
        return LogAmplitude.zero()
    return LogAmplitude(lead + math.log(abs(acc)), cmath.phase(acc))

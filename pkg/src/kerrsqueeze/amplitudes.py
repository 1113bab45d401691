"""Closed-form Gaussian-state amplitudes and unit conversions.

Conventions (fixed once, used by every module):

* hbar = 1, x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)); a coherent
  state |b> has mean x = sqrt(2) Re b, mean p = sqrt(2) Im b and variance 1/2
  in both quadratures.
* Squeezing operator S(z) = exp((conj(z) a^2 - z a^dag^2)/2) with
  z = x e^{i varphi}; varphi = pi squeezes the p quadrature of a real-amplitude
  state.  All exponent signs below were fixed against the number-basis oracle
  in :mod:`kerrsqueeze.fock`, not taken on faith.
* Rotation R(theta) = exp(i theta n), so R(theta)|b> = |b e^{i theta}>.

Every exponent is assembled from differences of nearby quantities (never from
sums of large terms) and the squeezed-coherent exponent is accumulated with
compensated summation; at mean photon number 3e6 at least 9 significant digits
survive.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ConstraintInfeasibleError, DomainError, PrecisionEnvelopeError
from .logamp import LogAmplitude, wrap_phase

SQRT2 = math.sqrt(2.0)
PI_M14 = math.pi ** -0.25  # pi^(-1/4), ground-state wavefunction at the origin

# CODATA 2018 (exact in the 2019 SI).
PLANCK_H = 6.62607015e-34  # J s
SPEED_OF_LIGHT = 299792458.0  # m / s

# Beyond this mean photon number the compensated exponent no longer carries
# the documented >= 9 significant digits.
PRECISION_ENVELOPE_NBAR = 1.0e8


@dataclass(frozen=True)
class QuadratureConvention:
    """The single record every module refers to for quadrature scaling."""

    hbar: float = 1.0
    vacuum_variance: float = 0.5

    def mean_x(self, b: complex) -> float:
        return SQRT2 * complex(b).real

    def mean_p(self, b: complex) -> float:
        return SQRT2 * complex(b).imag


CONVENTION = QuadratureConvention()


def _require_finite_complex(value: complex, name: str) -> complex:
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return z


def _require_finite_real(value: float, name: str) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return v


@dataclass(frozen=True)
class SqueezeTarget:
    """Parameters of a candidate squeezed coherent state.

    The state is R(theta) S(x e^{i varphi}) |gamma> with real gamma >= 0; the
    rotation carries all of the displacement phase.
    """

    x: float
    varphi: float
    theta: float
    gamma: float

    def __post_init__(self) -> None:
        for name in ("x", "varphi", "theta", "gamma"):
            _require_finite_real(getattr(self, name), name)
        if self.x < 0:
            raise DomainError(f"squeezing amplitude must be >= 0, got {self.x}")
        if self.gamma < 0:
            raise DomainError(f"coherent amplitude gamma must be >= 0, got {self.gamma}")

    @classmethod
    def for_photon_number(
        cls, x: float, varphi: float, theta: float, nbar: float
    ) -> "SqueezeTarget":
        """Build the target whose mean photon number equals ``nbar``."""
        return cls(x, varphi, theta, gamma_for_photon_number(x, varphi, nbar))


def _neumaier(terms: Sequence[float]) -> float:
    """Compensated (Kahan-Babuska) summation of a short list of doubles."""
    s = 0.0
    c = 0.0
    for t in terms:
        tmp = s + t
        if abs(s) >= abs(t):
            c += (s - tmp) + t
        else:
            c += (t - tmp) + s
        s = tmp
    return s + c


def overlap_coherent(b1: complex, b2: complex) -> LogAmplitude:
    """Inner product <b1|b2> of two coherent states.

    log magnitude = -|b1 - b2|^2 / 2, phase = Im(conj(b1) b2).  Both are
    evaluated in polar form, so equal-magnitude labels alpha and
    alpha e^{i phi} give exactly -2|alpha|^2 sin^2(phi/2) with no cancellation
    against |alpha|^2-sized intermediates.
    """
    b1 = _require_finite_complex(b1, "b1")
    b2 = _require_finite_complex(b2, "b2")
    r1, r2 = abs(b1), abs(b2)
    dpsi = cmath.phase(b2) - cmath.phase(b1)
    s = math.sin(0.5 * dpsi)
    log_mag = -0.5 * (r1 - r2) ** 2 - 2.0 * r1 * r2 * s * s
    phase = r1 * r2 * math.sin(dpsi)
    return LogAmplitude(log_mag, phase)


def overlap_squeezed_coherent(target: SqueezeTarget, b: complex) -> LogAmplitude:
    """Inner product <target|b> of a squeezed coherent state with |b>.

    Uses R(theta)^dag |b> = |b e^{-i theta}>, so only the unrotated overlap
    <S(z) gamma | b'> is needed.  With u = b e^{-i theta} = p + i q, g = gamma,
    s = sech x, tau = tanh x the exponent is grouped as

        E = -|u - g|^2 / 2 + i g q - g (1 - s)(p + i q)
            + (tau/2) e^{i varphi} (g - u e^{-i varphi}) (g + u e^{-i varphi})

    whose terms stay O(nbar * x) instead of O(nbar); real and imaginary parts
    are then combined with compensated summation.
    """
    b = _require_finite_complex(b, "b")
    nb = b.real * b.real + b.imag * b.imag
    if max(nb, target.gamma * target.gamma) > PRECISION_ENVELOPE_NBAR:
        raise PrecisionEnvelopeError(
            f"|amplitude|^2 = {max(nb, target.gamma ** 2):.3g} exceeds the "
            f"supported envelope {PRECISION_ENVELOPE_NBAR:.0e}"
        )
    x, varphi, g = target.x, target.varphi, target.gamma
    u = b * cmath.exp(-1j * target.theta)
    p, q = u.real, u.imag

    sech = 1.0 / math.cosh(x)
    tanh = math.tanh(x)
    sh = math.sinh(0.5 * x)
    one_m_sech = 2.0 * sh * sh / math.cosh(x)  # 1 - sech x, no cancellation

    ue = u * cmath.exp(-1j * varphi)
    prod = 0.5 * tanh * cmath.exp(1j * varphi) * (g - ue) * (g + ue)

    dre = p - g
    re = _neumaier((-0.5 * dre * dre, -0.5 * q * q, -g * one_m_sech * p, prod.real))
    im = _neumaier((g * q, -g * one_m_sech * q, prod.imag))
    return LogAmplitude(0.5 * math.log(sech) + re, wrap_phase(im))


ArrayLike = Union[float, np.ndarray]


def quadrature_wavefunction_coherent(b: complex, p: ArrayLike) -> Union[complex, np.ndarray]:
    """Momentum-representation wavefunction <p|b> of a coherent state.

    <p|b> = pi^(-1/4) exp(-(p - pbar)^2 / 2 - i xbar p + i xbar pbar / 2) with
    xbar = sqrt(2) Re b, pbar = sqrt(2) Im b.  The relative-phase convention
    matches the (-i)^n momentum-space number states used by the oracle.
    Accepts a scalar or an ndarray of quadrature values.
    """
    b = _require_finite_complex(b, "b")
    p_arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p_arr)):
        raise DomainError("quadrature value p must be finite")
    xbar = SQRT2 * b.real
    pbar = SQRT2 * b.imag
    envelope = PI_M14 * np.exp(-0.5 * (p_arr - pbar) ** 2)
    psi = envelope * np.exp(1j * (-xbar * p_arr + 0.5 * xbar * pbar))
    if np.isscalar(p) or p_arr.ndim == 0:
        return complex(psi)
    return psi


def mean_photon_squeezed(target: SqueezeTarget) -> float:
    """Mean photon number of R(theta) S(x e^{i varphi}) |gamma>.

    Equals gamma^2 (cosh 2x - sinh 2x cos varphi) + sinh^2 x; the rotation
    theta drops out because it commutes with the number operator.
    """
    x = target.x
    g = target.gamma
    sh = math.sinh(x)
    return g * g * (math.cosh(2 * x) - math.sinh(2 * x) * math.cos(target.varphi)) + sh * sh


def gamma_for_photon_number(x: float, varphi: float, nbar: float) -> float:
    """The unique gamma >= 0 with ``mean_photon_squeezed == nbar``."""
    x = _require_finite_real(x, "x")
    varphi = _require_finite_real(varphi, "varphi")
    nbar = _require_finite_real(nbar, "nbar")
    if x < 0:
        raise DomainError(f"squeezing amplitude must be >= 0, got {x}")
    sh = math.sinh(x)
    if nbar < sh * sh:
        raise ConstraintInfeasibleError(
            f"nbar = {nbar:.6g} < sinh^2(x) = {sh * sh:.6g}: no real gamma exists"
        )
    den = math.cosh(2 * x) - math.sinh(2 * x) * math.cos(varphi)
    return math.sqrt((nbar - sh * sh) / den)


def squeeze_db(x: float) -> float:
    """Squeezing amplitude x expressed in decibels (variance ratio e^{-2x})."""
    x = _require_finite_real(x, "x")
    if x < 0:
        raise DomainError(f"squeezing amplitude must be >= 0, got {x}")
    return 20.0 * x / math.log(10.0)


def flux_to_power(flux: float, wavelength: float) -> float:
    """Optical power in watts carried by ``flux`` photons/s at ``wavelength`` meters."""
    flux = _require_finite_real(flux, "flux")
    wavelength = _require_finite_real(wavelength, "wavelength")
    if flux <= 0 or wavelength <= 0:
        raise DomainError("flux and wavelength must be positive")
    return flux * PLANCK_H * SPEED_OF_LIGHT / wavelength


def power_to_flux(power: float, wavelength: float) -> float:
    """Photon flux (photons/s) of a beam with ``power`` watts at ``wavelength`` meters."""
    power = _require_finite_real(power, "power")
    wavelength = _require_finite_real(wavelength, "wavelength")
    if power <= 0 or wavelength <= 0:
        raise DomainError("power and wavelength must be positive")
    return power * wavelength / (PLANCK_H * SPEED_OF_LIGHT)

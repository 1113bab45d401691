"""Post-selected interferometer model.

Builds the conditional state of the strong coherent pulse after the single
photon is detected in the bright output port: a normalized two-component
superposition

    |psi> = (t |alpha e^{i phi0}> - r e^{i delta} |alpha>) / sqrt(norm)

where t, r are the variable-beam-splitter amplitudes (t^2 + r^2 = 1) and
delta is a compensation phase applied to the non-shifted arm.  ``delta=AUTO``
resolves to the mean-field back-action phase |alpha|^2 sin(phi0), in which
case the interference term is treated as exactly compensated.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from . import logamp
from .amplitudes import (
    SQRT2,
    SqueezeTarget,
    overlap_coherent,
    overlap_squeezed_coherent,
    quadrature_wavefunction_coherent,
)
from .errors import DegeneratePostSelectionError, DomainError
from .logamp import wrap_phase

AUTO = "auto"

# Below this squared norm the post-selected state is numerically undefined
# (double-precision floor).
DEGENERATE_NORM = 1e-300

_T_MIN = 1.0 / math.sqrt(2.0)


def back_action_phase(alpha: float, phi0: float) -> float:
    """Mean-field phase |alpha|^2 sin(phi0) wrapped to (-pi, pi].

    This is the relative phase the coherent pulse imprints between the
    interferometer arms; a compensating shifter must cancel it (it vanishes
    naturally when |alpha|^2 phi0 sits at a multiple of 2 pi).
    """
    if not (math.isfinite(alpha) and math.isfinite(phi0)):
        raise DomainError("alpha and phi0 must be finite")
    if alpha <= 0 or phi0 < 0:
        raise DomainError("alpha must be > 0 and phi0 >= 0")
    return wrap_phase(alpha * alpha * math.sin(phi0))


@dataclass(frozen=True)
class InterferometerConfig:
    """Apparatus parameters: input amplitude, XPM phase, VBS transmissivity, compensation."""

    alpha: float
    phi0: float
    t: float
    delta: Union[float, str] = AUTO

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"alpha must be a positive finite real, got {self.alpha!r}")
        if not (math.isfinite(self.phi0) and 0.0 <= self.phi0 <= math.pi):
            raise DomainError(f"phi0 must lie in [0, pi], got {self.phi0!r}")
        if not (math.isfinite(self.t) and _T_MIN - 1e-12 <= self.t <= 1.0):
            raise DomainError(
                f"transmissivity t must lie in [1/sqrt(2), 1], got {self.t!r}"
            )
        if isinstance(self.delta, str):
            if self.delta.lower() != AUTO:
                raise DomainError(f"delta must be a number or 'auto', got {self.delta!r}")
            object.__setattr__(self, "delta", AUTO)
        elif not math.isfinite(float(self.delta)):
            raise DomainError(f"delta must be finite, got {self.delta!r}")

    @property
    def r(self) -> float:
        """Reflectivity, always derived as +sqrt(1 - t^2)."""
        return math.sqrt(max(0.0, 1.0 - self.t * self.t))

    @property
    def is_auto_delta(self) -> bool:
        return isinstance(self.delta, str)

    @property
    def resolved_delta(self) -> float:
        if self.is_auto_delta:
            return back_action_phase(self.alpha, self.phi0)
        return wrap_phase(float(self.delta))


@dataclass(frozen=True)
class CatState:
    """Normalized two-component coherent superposition c1|beta1> + c2|beta2>.

    ``norm`` is the squared norm of the unnormalized combination
    t|beta1> - r e^{i delta}|beta2> (twice the post-selection probability).
    """

    c1: complex
    c2: complex
    beta1: complex
    beta2: complex
    norm: float
    delta: float = 0.0


def _interference(cfg: InterferometerConfig) -> Tuple[float, float, float]:
    """(log overlap magnitude, cos of residual phase, resolved delta)."""
    a2 = cfg.alpha * cfg.alpha
    s = math.sin(0.5 * cfg.phi0)
    q_log = -2.0 * a2 * s * s
    delta = cfg.resolved_delta
    if cfg.is_auto_delta:
        # delta and the overlap phase come from the identical expression, so
        # the compensation is exact by construction.
        cos_residual = 1.0
    else:
        cos_residual = math.cos(float(cfg.delta) - a2 * math.sin(cfg.phi0))
    return q_log, cos_residual, delta


def _norm_squared(cfg: InterferometerConfig) -> float:
    q_log, cos_residual, _ = _interference(cfg)
    t = cfg.t
    r = cfg.r
    return 1.0 - 2.0 * t * r * math.exp(q_log) * cos_residual


def build_cat(cfg: InterferometerConfig) -> CatState:
    """Post-selected state of the coherent pulse for the given apparatus."""
    two_n = _norm_squared(cfg)
    if not two_n > DEGENERATE_NORM:
        raise DegeneratePostSelectionError(
            f"post-selection norm {two_n:.3e} below {DEGENERATE_NORM:.0e}: "
            "perfect destructive interference"
        )
    scale = 1.0 / math.sqrt(two_n)
    delta = cfg.resolved_delta
    beta1 = cfg.alpha * cmath.exp(1j * cfg.phi0)
    beta2 = complex(cfg.alpha, 0.0)
    c1 = complex(cfg.t * scale, 0.0)
    c2 = -cfg.r * scale * cmath.exp(1j * delta)
    return CatState(c1=c1, c2=c2, beta1=beta1, beta2=beta2, norm=two_n, delta=delta)


def success_probability(cfg: InterferometerConfig) -> float:
    """Probability of detecting the single photon in the post-selected port.

    Literally half the magnitude of t^2 + r^2 - 2 t r Re<alpha e^{i phi0}|alpha>
    (with the compensation-phase generalization).
    """
    return 0.5 * abs(_norm_squared(cfg))


def fidelity(cat: CatState, target: SqueezeTarget) -> float:
    """|<target|psi>| combined in the log domain.

    The two overlaps <target|beta_i> are added after factoring out the larger
    log magnitude, so deeply post-selected states keep their relative
    structure even when both terms underflow as plain floats.
    """
    o1 = overlap_squeezed_coherent(target, cat.beta1)
    o2 = overlap_squeezed_coherent(target, cat.beta2)
    combined = logamp.combine([(cat.c1, o1), (cat.c2, o2)])
    if combined.log_mag < -700.0:
        return 0.0
    return math.exp(combined.log_mag)


def quadrature_density(cat: CatState, p) -> Union[float, np.ndarray]:
    """p-quadrature probability density |c1 <p|beta1> + c2 <p|beta2>|^2."""
    psi = cat.c1 * quadrature_wavefunction_coherent(cat.beta1, p) + (
        cat.c2 * quadrature_wavefunction_coherent(cat.beta2, p)
    )
    dens = np.abs(np.asarray(psi)) ** 2
    if np.isscalar(p) or np.asarray(p).ndim == 0:
        return float(dens)
    return dens


@dataclass(frozen=True)
class QuadratureMoments:
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    cov_xp: float


def _pairwise_expectations(c1, c2, b1, b2) -> Tuple[complex, complex, float]:
    """(<a>, <a^2>, <n>) of c1|b1> + c2|b2> from coherent matrix elements."""
    o12 = overlap_coherent(b1, b2).to_complex()
    w11 = abs(c1) ** 2
    w22 = abs(c2) ** 2
    w12 = c1.conjugate() * c2 * o12
    w21 = c2.conjugate() * c1 * o12.conjugate()
    mean_a = w11 * b1 + w22 * b2 + w12 * b2 + w21 * b1
    mean_a2 = w11 * b1 * b1 + w22 * b2 * b2 + w12 * b2 * b2 + w21 * b1 * b1
    mean_n = (
        w11 * abs(b1) ** 2
        + w22 * abs(b2) ** 2
        + w12 * b1.conjugate() * b2
        + w21 * b2.conjugate() * b1
    )
    return mean_a, mean_a2, mean_n.real


def quadrature_moments(cat: CatState) -> QuadratureMoments:
    """Exact first and second quadrature moments of the superposition.

    The centroid <a> is computed first and subtracted from both labels (a
    displacement, which leaves central moments unchanged); the second moments
    are then assembled from O(separation)-sized quantities instead of
    O(|alpha|^2)-sized ones, so no precision is lost at large amplitude.
    """
    m, _, _ = _pairwise_expectations(cat.c1, cat.c2, cat.beta1, cat.beta2)
    # Displacing by -m multiplies each component by a label-dependent phase.
    c1s = cat.c1 * cmath.exp(-1j * (m * cat.beta1.conjugate()).imag)
    c2s = cat.c2 * cmath.exp(-1j * (m * cat.beta2.conjugate()).imag)
    a_c, a2_c, n_c = _pairwise_expectations(c1s, c2s, cat.beta1 - m, cat.beta2 - m)

    mean_xc = SQRT2 * a_c.real
    mean_pc = SQRT2 * a_c.imag
    var_x = a2_c.real + n_c + 0.5 - mean_xc * mean_xc
    var_p = -a2_c.real + n_c + 0.5 - mean_pc * mean_pc
    cov = a2_c.imag - mean_xc * mean_pc
    return QuadratureMoments(
        mean_x=SQRT2 * m.real,
        mean_p=SQRT2 * m.imag,
        var_x=var_x,
        var_p=var_p,
        cov_xp=cov,
    )


def min_quadrature_variance(cat: CatState) -> Tuple[float, float]:
    """Smallest variance over all rotated quadratures and the angle achieving it.

    The variance of x_lambda = x cos(lambda) + p sin(lambda) is minimized
    analytically from the 2x2 covariance matrix; for an isotropic state the
    angle is reported as 0.
    """
    mom = quadrature_moments(cat)
    half_sum = 0.5 * (mom.var_x + mom.var_p)
    half_diff = 0.5 * (mom.var_x - mom.var_p)
    amp = math.hypot(half_diff, mom.cov_xp)
    if amp < 1e-15:
        return half_sum, 0.0
    psi = math.atan2(mom.cov_xp, half_diff)
    angle = 0.5 * psi + 0.5 * math.pi
    angle = math.remainder(angle, math.pi)
    if angle <= -0.5 * math.pi:
        angle += math.pi
    return half_sum - amp, angle

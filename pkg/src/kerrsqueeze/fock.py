"""Truncated number-basis oracle.

Brute-force constructions used to validate every closed form in the library
at small amplitude before those forms are trusted at mean photon numbers up
to 3e6.  Nothing here is performance-sensitive; it is built to be
unimpeachable where it runs and to refuse to run anywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Literal, Union

import numpy as np
from scipy.linalg import expm

from .amplitudes import PI_M14, SQRT2, SqueezeTarget, overlap_coherent
from .errors import (
    CutoffMismatchError,
    DomainError,
    PathDisagreementError,
    TruncationError,
)

DEFAULT_CUTOFF = 100
MAX_LABEL = 5.0  # refuse |beta| beyond this rather than silently truncate
TAIL_TOL = 1e-14
PATH_TOL = 1e-10


@dataclass(frozen=True)
class FockVector:
    """A normalized state vector on number states |0..cutoff>."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.coeffs, dtype=np.complex128)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def cutoff(self) -> int:
        return self.coeffs.shape[0] - 1


def _check_label(beta: complex, cutoff: int) -> complex:
    beta = complex(beta)
    if not (math.isfinite(beta.real) and math.isfinite(beta.imag)):
        raise DomainError(f"label must be finite, got {beta!r}")
    if abs(beta) > MAX_LABEL:
        raise TruncationError(
            f"|beta| = {abs(beta):.3g} > {MAX_LABEL}: the oracle refuses rather than truncate"
        )
    if abs(beta) ** 2 > cutoff / 4:
        raise TruncationError(
            f"|beta|^2 = {abs(beta) ** 2:.3g} needs cutoff >= {4 * abs(beta) ** 2:.0f}"
        )
    return beta


def _finalize(coeffs: np.ndarray, what: str) -> FockVector:
    tail = abs(coeffs[-1]) ** 2
    if not tail < TAIL_TOL:
        raise TruncationError(f"{what}: tail mass {tail:.3e} >= {TAIL_TOL:.0e}")
    norm = math.sqrt(float(np.sum(np.abs(coeffs) ** 2)))
    if abs(norm - 1.0) > 1e-6:
        raise TruncationError(f"{what}: pre-normalization norm {norm:.8f} is not near 1")
    return FockVector(coeffs / norm)


def coherent_fock(beta: complex, cutoff: int = DEFAULT_CUTOFF) -> FockVector:
    """Coherent state |beta> by the stable upward recursion c_n = c_{n-1} beta / sqrt(n)."""
    beta = _check_label(beta, cutoff)
    c = np.zeros(cutoff + 1, dtype=np.complex128)
    c[0] = math.exp(-0.5 * abs(beta) ** 2)
    for n in range(1, cutoff + 1):
        c[n] = c[n - 1] * beta / math.sqrt(n)
    return _finalize(c, f"coherent_fock(beta={beta:.3g})")


def _squeeze_generator(x: float, varphi: float, dim: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1.0, dim)), 1).astype(np.complex128)
    ad = a.conj().T
    zeta = x * complex(math.cos(varphi), math.sin(varphi))
    return 0.5 * (np.conj(zeta) * (a @ a) - zeta * (ad @ ad))


# Scaling-and-squaring spreads rounding noise of absolute size ~1e-10 into
# the rows nearest the truncation edge; exponentiating in a padded workspace
# and discarding the pad keeps the kept components clean to ~1e-14.
_EXPM_PAD = 24


def _squeezed_by_expm(target: SqueezeTarget, cutoff: int) -> np.ndarray:
    dim = cutoff + 1 + _EXPM_PAD
    seed = np.zeros(dim, dtype=np.complex128)
    seed[: cutoff + 1] = coherent_fock(target.gamma, cutoff).coeffs
    full = expm(_squeeze_generator(target.x, target.varphi, dim)) @ seed
    return full[: cutoff + 1]


def _squeezed_by_recursion(target: SqueezeTarget, cutoff: int) -> np.ndarray:
    # (a cosh x + e^{i varphi} a^dag sinh x) |z, g> = g |z, g> gives the
    # two-term recursion; c_0 is the closed-form vacuum overlap.
    x, varphi, g = target.x, target.varphi, target.gamma
    ch, sh, th = math.cosh(x), math.sinh(x), math.tanh(x)
    eiphi = complex(math.cos(varphi), math.sin(varphi))
    c = np.zeros(cutoff + 1, dtype=np.complex128)
    c0_exp = complex(-0.5 * g * g) + 0.5 * th * g * g * eiphi.conjugate()
    c[0] = math.sqrt(1.0 / ch) * np.exp(c0_exp)
    if cutoff >= 1:
        c[1] = g * c[0] / ch
    for n in range(1, cutoff):
        c[n + 1] = (g * c[n] - eiphi * sh * math.sqrt(n) * c[n - 1]) / (
            ch * math.sqrt(n + 1)
        )
    return c


def squeezed_coherent_fock(target: SqueezeTarget, cutoff: int = DEFAULT_CUTOFF) -> FockVector:
    """Squeezed coherent state R(theta) S(x e^{i varphi}) |gamma>.

    Built twice: by scaling-and-squaring matrix exponentiation of the
    truncated squeeze generator, and by the two-term Gaussian recursion.  The
    two constructions must agree to 1e-10 or a PathDisagreementError is
    raised, so the sign convention is triangulated on every call.
    """
    if target.x > 1.0:
        raise TruncationError(f"x = {target.x:.3g} > 1: outside the oracle envelope")
    _check_label(target.gamma, cutoff)

    via_recursion = _squeezed_by_recursion(target, cutoff)
    tail = abs(via_recursion[-1]) ** 2
    if not tail < TAIL_TOL:
        raise TruncationError(
            f"squeezed_coherent_fock: tail mass {tail:.3e} >= {TAIL_TOL:.0e}"
        )

    via_expm = _squeezed_by_expm(target, cutoff)
    worst = float(np.max(np.abs(via_expm - via_recursion)))
    if worst > PATH_TOL:
        raise PathDisagreementError(
            f"matrix-exponential and recursion constructions differ by {worst:.3e}"
        )

    rot = np.exp(1j * target.theta * np.arange(cutoff + 1))
    return _finalize(via_recursion * rot, f"squeezed_coherent_fock({target})")


def overlap_fock(v1: FockVector, v2: FockVector) -> complex:
    """Inner product <v1|v2> = sum_n conj(c1_n) c2_n."""
    if v1.cutoff != v2.cutoff:
        raise CutoffMismatchError(f"cutoffs differ: {v1.cutoff} vs {v2.cutoff}")
    return complex(np.vdot(v1.coeffs, v2.coeffs))


def superpose_fock(coefficients, vectors) -> FockVector:
    """Normalized superposition sum_i c_i |v_i> of same-cutoff vectors."""
    vectors = list(vectors)
    if not vectors:
        raise DomainError("need at least one vector")
    cut = vectors[0].cutoff
    acc = np.zeros(cut + 1, dtype=np.complex128)
    for c, v in zip(coefficients, vectors, strict=True):
        if v.cutoff != cut:
            raise CutoffMismatchError(f"cutoffs differ: {v.cutoff} vs {cut}")
        acc = acc + complex(c) * v.coeffs
    norm = math.sqrt(float(np.sum(np.abs(acc) ** 2)))
    if norm == 0.0:
        raise DomainError("superposition is the zero vector")
    return FockVector(acc / norm)


def hermite_functions(p: np.ndarray, nmax: int) -> np.ndarray:
    """Orthonormal Hermite functions h_0..h_nmax on a grid, shape (nmax+1, len(p)).

    Stable three-term recurrence
    h_{n} = sqrt(2/n) p h_{n-1} - sqrt((n-1)/n) h_{n-2}.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    h = np.zeros((nmax + 1, p.shape[0]))
    h[0] = PI_M14 * np.exp(-0.5 * p * p)
    if nmax >= 1:
        h[1] = SQRT2 * p * h[0]
    for n in range(2, nmax + 1):
        h[n] = math.sqrt(2.0 / n) * p * h[n - 1] - math.sqrt((n - 1) / n) * h[n - 2]
    return h


def quadrature_density_fock(v: FockVector, p: Union[float, np.ndarray]):
    """p-quadrature probability density |<p|v>|^2.

    Momentum-space number states carry the (-i)^n phase:
    <p|n> = (-i)^n h_n(p); that phase is what fixes the interference pattern
    of superpositions, and is cross-checked against the coherent closed form.
    """
    p_arr = np.atleast_1d(np.asarray(p, dtype=float))
    h = hermite_functions(p_arr, v.cutoff)
    phases = (-1j) ** np.arange(v.cutoff + 1)
    amp = (v.coeffs * phases) @ h
    dens = np.abs(amp) ** 2
    if np.isscalar(p) or np.asarray(p).ndim == 0:
        return float(dens[0])
    return dens


def expectation_fock(v: FockVector, which: Literal["n", "a", "a_squared"]) -> complex:
    """Expectation value of n, a, or a^2 from ladder actions on the coefficients."""
    c = v.coeffs
    n = np.arange(c.shape[0])
    if which == "n":
        return complex(np.sum(n * np.abs(c) ** 2))
    if which == "a":
        return complex(np.sum(np.conj(c[:-1]) * np.sqrt(n[1:]) * c[1:]))
    if which == "a_squared":
        return complex(
            np.sum(np.conj(c[:-2]) * np.sqrt(n[1:-1] * (n[1:-1] + 1.0)) * c[2:])
        )
    raise DomainError(f"unknown observable {which!r}")


def fock_moments(v: FockVector) -> Dict[str, float]:
    """Quadrature means/variances of a number-basis state (for oracle checks)."""
    a = expectation_fock(v, "a")
    a2 = expectation_fock(v, "a_squared")
    nbar = expectation_fock(v, "n").real
    mean_x = SQRT2 * a.real
    mean_p = SQRT2 * a.imag
    var_x = a2.real + nbar + 0.5 - mean_x**2
    var_p = -a2.real + nbar + 0.5 - mean_p**2
    cov = a2.imag - mean_x * mean_p
    return {
        "mean_x": mean_x,
        "mean_p": mean_p,
        "var_x": var_x,
        "var_p": var_p,
        "cov_xp": cov,
    }

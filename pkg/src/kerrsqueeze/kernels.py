"""Hot numeric kernels with numba and pure-numpy backends.

Three inner loops dominate the heavy runs: batch evaluation of the
closed-form fidelity objective over parameter grids, the exhaustive
number-basis fidelity search used to certify the optimizer, and quadrature
density profiles on dense grids.  Each kernel exists twice -- an ``@njit``
version and a vectorized numpy version with identical arithmetic -- and the
active backend is chosen by the ``KERRSQUEEZE_BACKEND`` environment variable
(``numba`` | ``numpy``; unset picks numba when importable).

The scalar reference implementations live in :mod:`kerrsqueeze.amplitudes`
and :mod:`kerrsqueeze.fock`; the test suite pins all backends to them.
"""

from __future__ import annotations

import cmath
import math
import os
from typing import Callable, Dict

import numpy as np

BACKEND_ENV = "KERRSQUEEZE_BACKEND"

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

_backend: str | None = None


def active_backend() -> str:
    """Resolve the backend name once per process (env var wins)."""
    global _backend
    if _backend is None:
        requested = os.environ.get(BACKEND_ENV, "").strip().lower()
        if requested in ("numba", "numpy"):
            _backend = requested
        else:
            _backend = "numba" if HAS_NUMBA else "numpy"
        if _backend == "numba" and not HAS_NUMBA:
            _backend = "numpy"
    return _backend


def use_backend(name: str | None) -> None:
    """Force a backend (``None`` re-reads the environment). Intended for tests/benchmarks."""
    global _backend
    if name is not None and name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    _backend = name


def log_fidelity_scalar(
    x: float,
    phi: float,
    theta: float,
    c1: complex,
    c2: complex,
    beta1: complex,
    beta2: complex,
    nbar: float,
) -> float:
    """Scalar twin of the batch objective: log |<target(x,phi,theta)|psi>|.

    gamma is eliminated through the photon-number constraint; x is reflected
    to |x| so simplex steps across zero stay smooth.  Returns -inf-like
    large negatives for infeasible parameters (sinh^2 x > nbar).
    """
    x = abs(x)
    shx = math.sinh(x)
    if shx * shx >= nbar:
        return -1e30 * (1.0 + shx * shx - nbar)
    g = math.sqrt((nbar - shx * shx) / (math.cosh(2 * x) - math.sinh(2 * x) * math.cos(phi)))
    sech = 1.0 / math.cosh(x)
    tanh = math.tanh(x)
    sh_half = math.sinh(0.5 * x)
    one_m_sech = 2.0 * sh_half * sh_half / math.cosh(x)
    rot = cmath.exp(-1j * theta)
    eiphi = cmath.exp(1j * phi)
    emiphi = cmath.exp(-1j * phi)

    u = beta1 * rot
    prod = 0.5 * tanh * eiphi * (g - u * emiphi) * (g + u * emiphi)
    dre = u.real - g
    re1 = -0.5 * dre * dre - 0.5 * u.imag * u.imag - g * one_m_sech * u.real + prod.real
    im1 = g * u.imag - g * one_m_sech * u.imag + prod.imag

    u = beta2 * rot
    prod = 0.5 * tanh * eiphi * (g - u * emiphi) * (g + u * emiphi)
    dre = u.real - g
    re2 = -0.5 * dre * dre - 0.5 * u.imag * u.imag - g * one_m_sech * u.real + prod.real
    im2 = g * u.imag - g * one_m_sech * u.imag + prod.imag

    lead = re1 if re1 > re2 else re2
    amp = c1 * math.exp(re1 - lead) * cmath.exp(1j * im1) + c2 * math.exp(
        re2 - lead
    ) * cmath.exp(1j * im2)
    mag = abs(amp)
    if mag == 0.0:
        return -1e30
    return 0.5 * math.log(sech) + lead + math.log(mag)


def _fidelity_batch_numpy(xs, phis, thetas, c1, c2, beta1, beta2, nbar):
    xs = np.abs(np.asarray(xs, dtype=float))
    phis = np.asarray(phis, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    shx = np.sinh(xs)
    feasible = shx * shx < nbar
    xs_safe = np.where(feasible, xs, 0.0)
    shx = np.sinh(xs_safe)
    g = np.sqrt(
        (nbar - shx * shx)
        / (np.cosh(2 * xs_safe) - np.sinh(2 * xs_safe) * np.cos(phis))
    )
    sech = 1.0 / np.cosh(xs_safe)
    tanh = np.tanh(xs_safe)
    sh_half = np.sinh(0.5 * xs_safe)
    one_m_sech = 2.0 * sh_half * sh_half / np.cosh(xs_safe)
    rot = np.exp(-1j * thetas)
    eiphi = np.exp(1j * phis)
    emiphi = np.exp(-1j * phis)

    def component(beta):
        u = beta * rot
        prod = 0.5 * tanh * eiphi * (g - u * emiphi) * (g + u * emiphi)
        dre = u.real - g
        re = -0.5 * dre * dre - 0.5 * u.imag * u.imag - g * one_m_sech * u.real + prod.real
        im = g * u.imag - g * one_m_sech * u.imag + prod.imag
        return re, im

    re1, im1 = component(beta1)
    re2, im2 = component(beta2)
    lead = np.maximum(re1, re2)
    amp = c1 * np.exp(re1 - lead) * np.exp(1j * im1) + c2 * np.exp(re2 - lead) * np.exp(
        1j * im2
    )
    mag = np.abs(amp)
    out = np.where(
        mag > 0.0,
        0.5 * np.log(sech) + lead + np.log(np.where(mag > 0.0, mag, 1.0)),
        -1e30,
    )
    return np.where(feasible, out, -1e30)


def _density_batch_numpy(ps, c1, c2, beta1, beta2):
    ps = np.asarray(ps, dtype=float)
    sqrt2 = math.sqrt(2.0)
    pi_m14 = math.pi ** -0.25

    def wave(beta):
        xbar = sqrt2 * beta.real
        pbar = sqrt2 * beta.imag
        return pi_m14 * np.exp(-0.5 * (ps - pbar) ** 2) * np.exp(
            1j * (-xbar * ps + 0.5 * xbar * pbar)
        )

    return np.abs(c1 * wave(beta1) + c2 * wave(beta2)) ** 2


_FOCK_CHUNK = 1 << 15


def _fock_fidelity_grid_numpy(cat_coeffs, xs, phis, thetas, nbar):
    cat_coeffs = np.asarray(cat_coeffs, dtype=np.complex128)
    xs = np.abs(np.asarray(xs, dtype=float))
    phis = np.asarray(phis, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    n_max = cat_coeffs.shape[0] - 1
    out = np.empty(xs.shape[0])
    for start in range(0, xs.shape[0], _FOCK_CHUNK):
        sl = slice(start, min(start + _FOCK_CHUNK, xs.shape[0]))
        out[sl] = _fock_chunk_numpy(cat_coeffs, xs[sl], phis[sl], thetas[sl], nbar, n_max)
    return out


def _fock_chunk_numpy(cat, xs, phis, thetas, nbar, n_max):
    shx = np.sinh(xs)
    feasible = shx * shx < nbar
    xs = np.where(feasible, xs, 0.0)
    shx = np.sinh(xs)
    chx = np.cosh(xs)
    thx = np.tanh(xs)
    eiphi = np.exp(1j * phis)
    g = np.sqrt((nbar - shx * shx) / (np.cosh(2 * xs) - np.sinh(2 * xs) * np.cos(phis)))

    # target coefficients by the two-term recursion, accumulated against the
    # fixed cat vector with the rotation phase folded in incrementally
    c_prev = np.zeros(xs.shape[0], dtype=np.complex128)
    c_cur = np.sqrt(1.0 / chx) * np.exp(-0.5 * g * g + 0.5 * thx * g * g * np.conj(eiphi))
    rot_step = np.exp(-1j * thetas)
    rot = np.ones(xs.shape[0], dtype=np.complex128)
    acc = np.conj(c_cur) * rot * cat[0]
    nrm = np.abs(c_cur) ** 2
    for n in range(0, n_max):
        c_next = (g * c_cur - eiphi * shx * math.sqrt(n) * c_prev) / (
            chx * math.sqrt(n + 1)
        )
        rot = rot * rot_step
        acc = acc + np.conj(c_next) * rot * cat[n + 1]
        nrm = nrm + np.abs(c_next) ** 2
        c_prev, c_cur = c_cur, c_next
    out = np.abs(acc) / np.sqrt(nrm)
    return np.where(feasible, out, -1.0)


if HAS_NUMBA:

    @njit(cache=True)
    def _fidelity_batch_numba(xs, phis, thetas, c1, c2, beta1, beta2, nbar):  # pragma: no cover - exercised via dispatch
        out = np.empty(xs.shape[0])
        for i in range(xs.shape[0]):
            x = abs(xs[i])
            phi = phis[i]
            theta = thetas[i]
            shx = math.sinh(x)
            if shx * shx >= nbar:
                out[i] = -1e30 * (1.0 + shx * shx - nbar)
                continue
            g = math.sqrt(
                (nbar - shx * shx)
                / (math.cosh(2 * x) - math.sinh(2 * x) * math.cos(phi))
            )
            sech = 1.0 / math.cosh(x)
            tanh = math.tanh(x)
            sh_half = math.sinh(0.5 * x)
            one_m_sech = 2.0 * sh_half * sh_half / math.cosh(x)
            rot = cmath.exp(-1j * theta)
            eiphi = cmath.exp(1j * phi)
            emiphi = cmath.exp(-1j * phi)

            u = beta1 * rot
            prod = 0.5 * tanh * eiphi * (g - u * emiphi) * (g + u * emiphi)
            dre = u.real - g
            re1 = (
                -0.5 * dre * dre
                - 0.5 * u.imag * u.imag
                - g * one_m_sech * u.real
                + prod.real
            )
            im1 = g * u.imag - g * one_m_sech * u.imag + prod.imag

            u = beta2 * rot
            prod = 0.5 * tanh * eiphi * (g - u * emiphi) * (g + u * emiphi)
            dre = u.real - g
            re2 = (
                -0.5 * dre * dre
                - 0.5 * u.imag * u.imag
                - g * one_m_sech * u.real
                + prod.real
            )
            im2 = g * u.imag - g * one_m_sech * u.imag + prod.imag

            lead = re1 if re1 > re2 else re2
            amp = c1 * math.exp(re1 - lead) * cmath.exp(1j * im1) + c2 * math.exp(
                re2 - lead
            ) * cmath.exp(1j * im2)
            mag = abs(amp)
            if mag == 0.0:
                out[i] = -1e30
            else:
                out[i] = 0.5 * math.log(sech) + lead + math.log(mag)
        return out

    @njit(cache=True)
    def _density_batch_numba(ps, c1, c2, beta1, beta2):  # pragma: no cover - exercised via dispatch
        sqrt2 = math.sqrt(2.0)
        pi_m14 = math.pi ** -0.25
        x1 = sqrt2 * beta1.real
        p1 = sqrt2 * beta1.imag
        x2 = sqrt2 * beta2.real
        p2 = sqrt2 * beta2.imag
        out = np.empty(ps.shape[0])
        for i in range(ps.shape[0]):
            p = ps[i]
            w1 = pi_m14 * math.exp(-0.5 * (p - p1) ** 2) * cmath.exp(
                1j * (-x1 * p + 0.5 * x1 * p1)
            )
            w2 = pi_m14 * math.exp(-0.5 * (p - p2) ** 2) * cmath.exp(
                1j * (-x2 * p + 0.5 * x2 * p2)
            )
            amp = c1 * w1 + c2 * w2
            out[i] = amp.real * amp.real + amp.imag * amp.imag
        return out

    @njit(cache=True)
    def _fock_fidelity_grid_numba(cat, xs, phis, thetas, nbar):  # pragma: no cover - exercised via dispatch
        n_max = cat.shape[0] - 1
        out = np.empty(xs.shape[0])
        for i in range(xs.shape[0]):
            x = abs(xs[i])
            shx = math.sinh(x)
            if shx * shx >= nbar:
                out[i] = -1.0
                continue
            phi = phis[i]
            chx = math.cosh(x)
            thx = math.tanh(x)
            eiphi = cmath.exp(1j * phi)
            g = math.sqrt(
                (nbar - shx * shx)
                / (math.cosh(2 * x) - math.sinh(2 * x) * math.cos(phi))
            )
            c_prev = 0.0 + 0.0j
            c_cur = math.sqrt(1.0 / chx) * cmath.exp(
                -0.5 * g * g + 0.5 * thx * g * g * eiphi.conjugate()
            )
            rot_step = cmath.exp(-1j * thetas[i])
            rot = 1.0 + 0.0j
            acc = c_cur.conjugate() * rot * cat[0]
            nrm = (c_cur * c_cur.conjugate()).real
            for n in range(0, n_max):
                c_next = (g * c_cur - eiphi * shx * math.sqrt(n) * c_prev) / (
                    chx * math.sqrt(n + 1)
                )
                rot = rot * rot_step
                acc = acc + c_next.conjugate() * rot * cat[n + 1]
                nrm = nrm + (c_next * c_next.conjugate()).real
                c_prev, c_cur = c_cur, c_next
            out[i] = abs(acc) / math.sqrt(nrm)
        return out


def _as_float_array(a) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(a, dtype=np.float64))


def fidelity_batch(xs, phis, thetas, c1, c2, beta1, beta2, nbar) -> np.ndarray:
    """log-fidelity of the cat against targets (x_i, phi_i, theta_i)."""
    xs, phis, thetas = map(_as_float_array, (xs, phis, thetas))
    if active_backend() == "numba":
        return _fidelity_batch_numba(
            xs, phis, thetas, complex(c1), complex(c2), complex(beta1), complex(beta2), float(nbar)
        )
    return _fidelity_batch_numpy(xs, phis, thetas, complex(c1), complex(c2), complex(beta1), complex(beta2), float(nbar))


def density_batch(ps, c1, c2, beta1, beta2) -> np.ndarray:
    """Quadrature density of the cat on a grid of p values."""
    ps = _as_float_array(ps)
    if active_backend() == "numba":
        return _density_batch_numba(ps, complex(c1), complex(c2), complex(beta1), complex(beta2))
    return _density_batch_numpy(ps, complex(c1), complex(c2), complex(beta1), complex(beta2))


def fock_fidelity_grid(cat_coeffs, xs, phis, thetas, nbar) -> np.ndarray:
    """Number-basis fidelity |<target_i|cat>| over a parameter grid.

    The target for each grid point is built by the same two-term recursion
    the oracle uses (renormalized within the cutoff); the cat vector is fixed.
    Infeasible points report -1.
    """
    cat_coeffs = np.ascontiguousarray(np.asarray(cat_coeffs, dtype=np.complex128))
    xs, phis, thetas = map(_as_float_array, (xs, phis, thetas))
    if active_backend() == "numba":
        return _fock_fidelity_grid_numba(cat_coeffs, xs, phis, thetas, float(nbar))
    return _fock_fidelity_grid_numpy(cat_coeffs, xs, phis, thetas, float(nbar))


def backend_implementations(kernel: str) -> Dict[str, Callable]:
    """Both implementations of a kernel, keyed by backend name (for tests/benchmarks)."""
    table: Dict[str, Dict[str, Callable]] = {
        "fidelity_batch": {"numpy": _fidelity_batch_numpy},
        "density_batch": {"numpy": _density_batch_numpy},
        "fock_fidelity_grid": {"numpy": _fock_fidelity_grid_numpy},
    }
    if HAS_NUMBA:
        table["fidelity_batch"]["numba"] = _fidelity_batch_numba
        table["density_batch"]["numba"] = _density_batch_numba
        table["fock_fidelity_grid"]["numba"] = _fock_fidelity_grid_numba
    return table[kernel]

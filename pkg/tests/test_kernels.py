import cmath
import math

import numpy as np
import pytest

from kerrsqueeze import (
    SqueezeTarget,
    build_cat,
    coherent_fock,
    fidelity,
    gamma_for_photon_number,
    overlap_fock,
    quadrature_density,
    squeezed_coherent_fock,
    superpose_fock,
)
from kerrsqueeze import kernels


@pytest.fixture
def cat_and_nbar(small_cfg):
    cat = build_cat(small_cfg)
    return cat, small_cfg.alpha**2


def _random_params(rng, n):
    return (
        rng.uniform(0.0, 0.8, n),
        rng.uniform(0.0, 2 * math.pi, n),
        rng.uniform(-0.5, 0.5, n),
    )


class TestScalarKernel:
    def test_matches_reference_fidelity(self, rng, cat_and_nbar):
        cat, nbar = cat_and_nbar
        for _ in range(30):
            x = rng.uniform(0, 0.8)
            phi = rng.uniform(0, 2 * math.pi)
            theta = rng.uniform(-0.5, 0.5)
            logf = kernels.log_fidelity_scalar(
                x, phi, theta, cat.c1, cat.c2, cat.beta1, cat.beta2, nbar
            )
            target = SqueezeTarget(
                x=x, varphi=phi, theta=theta,
                gamma=gamma_for_photon_number(x, phi, nbar),
            )
            assert math.exp(logf) == pytest.approx(fidelity(cat, target), abs=1e-12)

    def test_reflection_in_x(self, cat_and_nbar):
        cat, nbar = cat_and_nbar
        a = kernels.log_fidelity_scalar(0.3, 1.0, 0.1, cat.c1, cat.c2, cat.beta1, cat.beta2, nbar)
        b = kernels.log_fidelity_scalar(-0.3, 1.0, 0.1, cat.c1, cat.c2, cat.beta1, cat.beta2, nbar)
        assert a == b

    def test_infeasible_is_strongly_penalized(self, cat_and_nbar):
        cat, nbar = cat_and_nbar
        bad = kernels.log_fidelity_scalar(2.0, 0.0, 0.0, cat.c1, cat.c2, cat.beta1, cat.beta2, nbar)
        assert bad < -1e29


class TestBatchKernels:
    def test_fidelity_batch_matches_scalar(self, rng, cat_and_nbar):
        cat, nbar = cat_and_nbar
        xs, phis, thetas = _random_params(rng, 200)
        batch = kernels.fidelity_batch(xs, phis, thetas, cat.c1, cat.c2, cat.beta1, cat.beta2, nbar)
        scalar = np.array(
            [
                kernels.log_fidelity_scalar(x, p, th, cat.c1, cat.c2, cat.beta1, cat.beta2, nbar)
                for x, p, th in zip(xs, phis, thetas)
            ]
        )
        np.testing.assert_allclose(batch, scalar, rtol=1e-12, atol=1e-12)

    def test_backends_agree_on_fidelity(self, rng, cat_and_nbar):
        cat, nbar = cat_and_nbar
        impls = kernels.backend_implementations("fidelity_batch")
        if "numba" not in impls:
            pytest.skip("numba unavailable")
        xs, phis, thetas = _random_params(rng, 500)
        out_np = impls["numpy"](xs, phis, thetas, cat.c1, cat.c2, cat.beta1, cat.beta2, nbar)
        out_nb = impls["numba"](xs, phis, thetas, cat.c1, cat.c2, cat.beta1, cat.beta2, nbar)
        np.testing.assert_allclose(out_np, out_nb, rtol=1e-13, atol=1e-13)

    def test_density_batch_matches_library(self, cat_and_nbar):
        cat, _ = cat_and_nbar
        ps = np.linspace(-3, 5, 101)
        batch = kernels.density_batch(ps, cat.c1, cat.c2, cat.beta1, cat.beta2)
        ref = quadrature_density(cat, ps)
        np.testing.assert_allclose(batch, ref, rtol=1e-12, atol=1e-14)

    def test_backends_agree_on_density(self, cat_and_nbar):
        cat, _ = cat_and_nbar
        impls = kernels.backend_implementations("density_batch")
        if "numba" not in impls:
            pytest.skip("numba unavailable")
        ps = np.linspace(-3, 5, 257)
        out_np = impls["numpy"](ps, cat.c1, cat.c2, cat.beta1, cat.beta2)
        out_nb = impls["numba"](ps, cat.c1, cat.c2, cat.beta1, cat.beta2)
        np.testing.assert_allclose(out_np, out_nb, rtol=1e-13, atol=1e-15)


class TestFockGridKernel:
    def test_matches_oracle_pointwise(self, rng, cat_and_nbar):
        cat, nbar = cat_and_nbar
        cutoff = 100
        cat_vec = superpose_fock(
            (cat.c1, cat.c2),
            (coherent_fock(cat.beta1, cutoff), coherent_fock(cat.beta2, cutoff)),
        )
        xs, phis, thetas = _random_params(rng, 12)
        xs = np.minimum(xs, 0.6)
        got = kernels.fock_fidelity_grid(cat_vec.coeffs, xs, phis, thetas, nbar)
        for i in range(len(xs)):
            target = SqueezeTarget(
                x=float(xs[i]), varphi=float(phis[i]), theta=float(thetas[i]),
                gamma=gamma_for_photon_number(float(xs[i]), float(phis[i]), nbar),
            )
            ref = abs(overlap_fock(squeezed_coherent_fock(target, cutoff), cat_vec))
            assert got[i] == pytest.approx(ref, abs=1e-10)

    def test_backends_agree(self, rng, cat_and_nbar):
        cat, nbar = cat_and_nbar
        impls = kernels.backend_implementations("fock_fidelity_grid")
        if "numba" not in impls:
            pytest.skip("numba unavailable")
        cutoff = 80
        cat_vec = superpose_fock(
            (cat.c1, cat.c2),
            (coherent_fock(cat.beta1, cutoff), coherent_fock(cat.beta2, cutoff)),
        )
        xs, phis, thetas = _random_params(rng, 300)
        out_np = impls["numpy"](cat_vec.coeffs, xs, phis, thetas, nbar)
        out_nb = impls["numba"](cat_vec.coeffs, xs, phis, thetas, nbar)
        np.testing.assert_allclose(out_np, out_nb, rtol=1e-12, atol=1e-12)

    def test_infeasible_marked(self, cat_and_nbar):
        cat, nbar = cat_and_nbar
        cat_vec = superpose_fock(
            (cat.c1, cat.c2),
            (coherent_fock(cat.beta1, 80), coherent_fock(cat.beta2, 80)),
        )
        out = kernels.fock_fidelity_grid(
            cat_vec.coeffs, np.array([3.0]), np.array([0.0]), np.array([0.0]), nbar
        )
        assert out[0] == -1.0


class TestBackendSelection:
    def test_env_flag_respected(self, monkeypatch):
        monkeypatch.setenv(kernels.BACKEND_ENV, "numpy")
        kernels.use_backend(None)  # re-read environment
        try:
            assert kernels.active_backend() == "numpy"
        finally:
            monkeypatch.delenv(kernels.BACKEND_ENV)
            kernels.use_backend(None)

    def test_default_prefers_numba_when_available(self, monkeypatch):
        monkeypatch.delenv(kernels.BACKEND_ENV, raising=False)
        kernels.use_backend(None)
        expected = "numba" if kernels.HAS_NUMBA else "numpy"
        try:
            assert kernels.active_backend() == expected
        finally:
            kernels.use_backend(None)

    def test_forced_backend_produces_same_results(self, cat_and_nbar):
        cat, nbar = cat_and_nbar
        ps = np.linspace(-2, 4, 64)
        try:
            kernels.use_backend("numpy")
            a = kernels.density_batch(ps, cat.c1, cat.c2, cat.beta1, cat.beta2)
            if not kernels.HAS_NUMBA:
                pytest.skip("numba unavailable")
            kernels.use_backend("numba")
            b = kernels.density_batch(ps, cat.c1, cat.c2, cat.beta1, cat.beta2)
        finally:
            kernels.use_backend(None)
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError):
            kernels.use_backend("fortran")

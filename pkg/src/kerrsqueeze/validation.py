"""Randomized cross-validation of every closed form against the number-basis oracle.

Runs at small amplitude (|beta| <= 3, x <= 0.6) where the truncated oracle is
exact to far better than the tolerances being enforced.  This is the engine
behind the ``oracle`` CLI subcommand and the oracle-equivalence acceptance
test.
"""

from __future__ import annotations

import math
from typing import Dict

import numpy as np


from . import fock
from .amplitudes import SqueezeTarget, overlap_coherent, overlap_squeezed_coherent
from .interferometer import (
    AUTO,
    InterferometerConfig,
    build_cat,
    fidelity,
    quadrature_density,
    quadrature_moments,
)

DEFAULT_DRAWS = 200
DEFAULT_CUTOFF = 100
DEFAULT_SEED = 20240811

CLOSED_FORM_TOL = 1e-8
DUAL_PATH_TOL = 1e-10


def _draw_label(rng: np.random.Generator, max_mag: float = 3.0) -> complex:
    mag = max_mag * math.sqrt(rng.uniform(0.0, 1.0))
    ang = rng.uniform(0.0, 2.0 * math.pi)
    return mag * complex(math.cos(ang), math.sin(ang))


def _draw_target(rng: np.random.Generator) -> SqueezeTarget:
    x = rng.uniform(0.0, 0.6)
    # cap gamma so the squeeze-amplified displacement gamma e^x stays within
    # the |beta| <= 3 label envelope (tail safety at cutoff 100)
    return SqueezeTarget(
        x=x,
        varphi=rng.uniform(0.0, 2.0 * math.pi),
        theta=rng.uniform(-0.5, 0.5),
        gamma=rng.uniform(0.0, 2.8 * math.exp(-x)),
    )


def _draw_config(rng: np.random.Generator) -> InterferometerConfig:
    delta = (AUTO, 0.0, rng.uniform(-math.pi, math.pi))[int(rng.integers(0, 3))]
    return InterferometerConfig(
        alpha=rng.uniform(0.5, 2.8),
        phi0=rng.uniform(0.01, 0.5),
        t=rng.uniform(1.0 / math.sqrt(2.0), 0.999),
        delta=delta,
    )


def _dual_path_deviation(target: SqueezeTarget, cutoff: int) -> float:
    via_expm = fock._squeezed_by_expm(target, cutoff)
    via_rec = fock._squeezed_by_recursion(target, cutoff)
    return float(np.max(np.abs(via_expm - via_rec)))


def run_oracle_suite(
    draws: int = DEFAULT_DRAWS,
    cutoff: int = DEFAULT_CUTOFF,
    seed: int = DEFAULT_SEED,
) -> Dict:
    """Compare closed-form overlaps, fidelities, densities and moments with the oracle.

    Returns a report with the worst absolute deviation per category and a
    boolean pass flag per category.
    """
    rng = np.random.default_rng(seed)
    worst = {
        "overlap_coherent": 0.0,
        "overlap_squeezed_coherent": 0.0,
        "fidelity": 0.0,
        "density": 0.0,
        "moments": 0.0,
        "dual_construction": 0.0,
    }

    for _ in range(draws):
        b1 = _draw_label(rng)
        b2 = _draw_label(rng)
        target = _draw_target(rng)
        cfg = _draw_config(rng)

        v1 = fock.coherent_fock(b1, cutoff)
        v2 = fock.coherent_fock(b2, cutoff)
        got = overlap_coherent(b1, b2).to_complex()
        ref = fock.overlap_fock(v1, v2)
        worst["overlap_coherent"] = max(worst["overlap_coherent"], abs(got - ref))

        vt = fock.squeezed_coherent_fock(target, cutoff)
        got = overlap_squeezed_coherent(target, b1).to_complex()
        ref = fock.overlap_fock(vt, v1)
        worst["overlap_squeezed_coherent"] = max(
            worst["overlap_squeezed_coherent"], abs(got - ref)
        )
        worst["dual_construction"] = max(
            worst["dual_construction"], _dual_path_deviation(target, cutoff)
        )

        cat = build_cat(cfg)
        cat_vec = fock.superpose_fock(
            (cat.c1, cat.c2),
            (fock.coherent_fock(cat.beta1, cutoff), fock.coherent_fock(cat.beta2, cutoff)),
        )
        got_f = fidelity(cat, target)
        ref_f = abs(fock.overlap_fock(vt, cat_vec))
        worst["fidelity"] = max(worst["fidelity"], abs(got_f - ref_f))

        center = (cat.beta1.imag + cat.beta2.imag) * math.sqrt(2.0) / 2.0
        ps = center + np.array([-3.0, -1.0, -0.25, 0.0, 0.25, 1.0, 3.0])
        dens = quadrature_density(cat, ps)
        dens_ref = fock.quadrature_density_fock(cat_vec, ps)
        worst["density"] = max(worst["density"], float(np.max(np.abs(dens - dens_ref))))

        mom = quadrature_moments(cat)
        mom_ref = fock.fock_moments(cat_vec)
        dev = max(
            abs(mom.mean_x - mom_ref["mean_x"]),
            abs(mom.mean_p - mom_ref["mean_p"]),
            abs(mom.var_x - mom_ref["var_x"]),
            abs(mom.var_p - mom_ref["var_p"]),
            abs(mom.cov_xp - mom_ref["cov_xp"]),
        )
        worst["moments"] = max(worst["moments"], dev)

    tolerances = {key: CLOSED_FORM_TOL for key in worst}
    tolerances["dual_construction"] = DUAL_PATH_TOL
    passed = {key: bool(worst[key] < tolerances[key]) for key in worst}
    return {
        "draws": draws,
        "cutoff": cutoff,
        "seed": seed,
        "max_abs_deviation": worst,
        "tolerance": tolerances,
        "passed": passed,
        "all_passed": bool(all(passed.values())),
    }

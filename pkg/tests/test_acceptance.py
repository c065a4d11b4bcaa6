"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; the assertions carry the stated tolerances.
"""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from bergkit.domains import HartogsGauss, ModelPotential, sample_interior
from bergkit.geometry import (
    GeometrySettings,
    constant_curvature_verdict,
    curvature_from_sample,
    hsc_from_sample,
    metric_at,
)
from bergkit.kernels import (
    HartogsGaussKernel,
    HartogsGaussSeriesKernel,
    ModelPotentialKernel,
    auto_truncation,
)
from bergkit.modeltests import (
    binomial_sign_test,
    dalpha_pipeline,
    flat_slice_check,
    gaussian_uniqueness_check,
    laplacian_contradiction_check,
    paper_suite,
)
from bergkit.moments import mi, moment_closed_form, moment_quadrature

RUNTIME_LIMIT_S = 60.0


def report(criterion: int, ok: bool, message: str) -> None:
    print(f"ACCEPTANCE {criterion:02d} {'PASS' if ok else 'FAIL'}: {message}")
    assert ok, message


@pytest.fixture(scope="module")
def pipeline_outcomes():
    return {alpha: dalpha_pipeline(alpha) for alpha in (2.2, 2.5, 2.8)}


@pytest.fixture(scope="module")
def suite_outcomes():
    return paper_suite()


def test_criterion_1_sliver_constant_curvature(pipeline_outcomes):
    for alpha, out in pipeline_outcomes.items():
        dev = out.details["max_deviation"]
        runtime = out.details["runtime_s"]
        assert out.passed, f"pipeline failed at alpha={alpha}"
        assert abs(out.measured - 2.0) < 1e-3
        assert dev < 1e-3, f"alpha={alpha}: deviation {dev}"
        assert runtime < RUNTIME_LIMIT_S, f"alpha={alpha}: runtime {runtime:.1f}s"
    report(
        1,
        True,
        "constant HSC 2 (dev < 1e-3, 20 points x 16 directions, < 60 s) at "
        "alpha in {2.2, 2.5, 2.8}",
    )


def test_criterion_2_sliver_basis_and_moment_bound(pipeline_outcomes):
    for alpha, out in pipeline_outcomes.items():
        assert out.details["basis_ok"], f"alpha={alpha}: basis mismatch"
        assert out.details["convergent_indices"] == [[0, 0], [0, 1], [1, 0]]
        assert out.details["bound_ok"], f"alpha={alpha}: degree-1 moment bound"
        assert out.details["symmetric_ok"], f"alpha={alpha}: moment symmetry"
    report(2, True, "basis {1, z, w}, M(1,0) < 2 pi^2/(alpha-2), M(1,0) = M(0,1)")


def test_criterion_3_hartogs_moment_quadrature():
    spec = HartogsGauss(1)
    worst = 0.0
    for a in range(4):
        for q in range(4):
            exact = moment_closed_form(spec, mi(a, q)).value
            quad = moment_quadrature(spec, mi(a, q)).value
            worst = max(worst, abs(quad - exact) / exact)
    report(3, worst < 1e-6, f"Hartogs moments, worst relative error {worst:.2e}")


def test_criterion_4_hartogs_kernel_series_vs_closed_form():
    closed = HartogsGaussKernel(1)
    worst = 0.0
    for z in (0.0, 1.0):
        for u in np.arange(0.0, 0.95, 0.1):
            series = HartogsGaussSeriesKernel(1, auto_truncation(1, u))
            w = math.sqrt(u * math.exp(-(z * z)))
            pt = np.array([[complex(z), complex(w)]])
            diff = abs(series.log_kernel(pt)[0] - closed.log_kernel(pt)[0])
            worst = max(worst, abs(math.expm1(diff)))
    report(4, worst < 1e-8, f"series vs closed form, worst relative error {worst:.2e}")


def test_criterion_5_flat_slice():
    out = flat_slice_check(
        1,
        z_points=(0.0 + 0.0j, 0.5 + 0.0j, 1.0 + 0.3j),
        metric_tol=1e-6,
        mixed_tol=1e-8,
        curvature_tol=1e-5,
        control_factor=1e3,
    )
    d = out.details
    assert d["mixed_metric_max"] < 1e-8
    assert d["tangential_metric_dev"] < 1e-6
    assert d["tangential_curvature_max"] < 1e-5
    assert d["control_ratio"] >= 1e3
    report(
        5,
        out.passed,
        f"flat slice: mixed {d['mixed_metric_max']:.1e}, g-I "
        f"{d['tangential_metric_dev']:.1e}, R {d['tangential_curvature_max']:.1e}, "
        f"control x{d['control_ratio']:.1e}",
    )


def _sample_hsc(model, points, directions, seed):
    values = []
    rng = np.random.default_rng(seed)
    for p in points:
        sample = metric_at(model, p)
        curv = curvature_from_sample(sample)
        for _ in range(directions):
            v = rng.standard_normal(model.dimension) + 1j * rng.standard_normal(
                model.dimension
            )
            values.append(hsc_from_sample(sample, curv, v))
    return np.asarray(values)


def test_criterion_6_model_space_anchors():
    fs = ModelPotential("fubini_study", 1.0, 2)
    vals = _sample_hsc(
        ModelPotentialKernel(fs), sample_interior(fs, 10, seed=21), 10, seed=2
    )
    fs_dev = np.abs(vals - 2.0).max()
    assert fs_dev < 1e-6, f"Fubini-Study deviation {fs_dev:.2e}"

    hyp_dev = 0.0
    for n in (1, 2, 3):
        spec = ModelPotential("hyperbolic", float(n + 1), n)
        vals = _sample_hsc(
            ModelPotentialKernel(spec), sample_interior(spec, 10, seed=22 + n), 10, seed=3
        )
        hyp_dev = max(hyp_dev, np.abs(vals + 2.0 / (n + 1)).max())
    assert hyp_dev < 1e-6, f"hyperbolic deviation {hyp_dev:.2e}"

    euc = ModelPotential("euclidean", 1.0, 2)
    vals = _sample_hsc(
        ModelPotentialKernel(euc),
        sample_interior(euc, 10, seed=25, box_radius=0.7),
        10,
        seed=4,
    )
    euc_dev = np.abs(vals).max()
    assert euc_dev < 1e-8, f"euclidean deviation {euc_dev:.2e}"
    report(
        6,
        True,
        f"anchors: FS dev {fs_dev:.1e}, hyperbolic dev {hyp_dev:.1e}, "
        f"euclidean dev {euc_dev:.1e}",
    )


def test_criterion_7_bergman_upper_bound(suite_outcomes):
    sweep = next(o for o in suite_outcomes if o.name == "bergman_bound_sweep")
    assert sweep.passed
    report(
        7,
        sweep.measured <= 2.0 + 1e-3,
        f"max sampled HSC {sweep.measured:.9f} <= 2 + 1e-3 "
        f"(worst source: {sweep.details['max_source']})",
    )


def test_criterion_8_integer_exponent_dichotomy():
    worst = 0.0
    for lam in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
        res = binomial_sign_test(lam, k_max=10)
        assert (res is None) == float(lam).is_integer(), f"lambda={lam}"
        if res is not None:
            direct = math.prod(lam - j for j in range(res.index)) / math.factorial(
                res.index
            )
            worst = max(worst, abs(res.coefficient - direct))
    report(8, worst < 1e-15, f"dichotomy exact on the grid, coeff dev {worst:.1e}")


def test_criterion_9_appendix_checks():
    worst_gauss = 0.0
    for n in (1, 2):
        out = gaussian_uniqueness_check(n, 3, tol=1e-8)
        assert out.passed
        worst_gauss = max(worst_gauss, out.measured)
    worst_lap = 0.0
    for n in (1, 2):
        out = laplacian_contradiction_check(n, tol=1e-6)
        assert out.passed
        worst_lap = max(worst_lap, out.measured)
    report(
        9,
        True,
        f"Gaussian moments dev {worst_gauss:.1e} (tol 1e-8), Laplacians dev "
        f"{worst_lap:.1e} (tol 1e-6)",
    )


def test_criterion_10_reproducible_verify_runs(tmp_path):
    artifacts = []
    for name in ("one.json", "two.json"):
        path = tmp_path / name
        cp = subprocess.run(
            [
                sys.executable,
                "-m",
                "bergkit.cli",
                "verify",
                "--suite",
                "paper",
                "--reproducible",
                "--json",
                str(path),
            ],
            capture_output=True,
            text=True,
        )
        assert cp.returncode == 0, cp.stdout + cp.stderr
        assert cp.stdout.count("| PASS |") >= 10
        artifacts.append(path.read_bytes())
    identical = artifacts[0] == artifacts[1]
    payload = json.loads(artifacts[0])
    assert payload["all_passed"] is True
    report(10, identical, "two reproducible verify runs are byte-identical")

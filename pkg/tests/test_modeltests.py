import math

import pytest

from bergkit.errors import InputError
from bergkit.modeltests import (
    binomial_sign_test,
    dalpha_pipeline,
    flat_slice_check,
    gaussian_uniqueness_check,
    laplacian_contradiction_check,
)


def test_binomial_sign_examples():
    assert binomial_sign_test(3.0, 10) is None
    res = binomial_sign_test(2.5, 10)
    assert res.index == 4
    assert res.coefficient == pytest.approx(2.5 * 1.5 * 0.5 * -0.5 / 24, rel=1e-15)
    assert res.coefficient == -0.0390625
    res = binomial_sign_test(0.5, 10)
    assert res.index == 2 and res.coefficient == -0.125


def test_binomial_dichotomy_on_grid():
    for k in range(1, 11):
        lam = 0.5 * k
        res = binomial_sign_test(lam, k_max=12)
        assert (res is None) == float(lam).is_integer()


def test_binomial_preconditions():
    with pytest.raises(InputError):
        binomial_sign_test(3.0, 3)  # k_max < ceil(lam)+1
    with pytest.raises(InputError):
        binomial_sign_test(-1.0, 10)


def test_flat_slice_check_n1():
    out = flat_slice_check(1)
    assert out.passed
    assert out.details["mixed_metric_max"] < 1e-8
    assert out.details["tangential_metric_dev"] < 1e-6
    assert out.measured < 1e-5
    # the off-slice control keeps the check powered
    assert out.details["control_ratio"] >= 1e3


def test_flat_slice_check_n2_origin():
    out = flat_slice_check(2, z_points=[(0j, 0j)])
    assert out.passed
    assert out.details["tangential_metric_dev"] < 1e-9


def test_gaussian_uniqueness_check():
    out = gaussian_uniqueness_check(1, 3)
    assert out.passed and out.details["pairs"] == 16
    out = gaussian_uniqueness_check(2, 3)
    assert out.passed and out.measured < 1e-8
    with pytest.raises(InputError):
        gaussian_uniqueness_check(1, 1)


def test_laplacian_contradiction_values():
    out = laplacian_contradiction_check(2)
    assert out.passed
    assert out.details["target_quadratic"] == -8.0
    assert out.measured < 1e-6
    out = laplacian_contradiction_check(1, points=[(1 + 1j,)])
    assert out.passed


@pytest.mark.parametrize("alpha", [2.5])
def test_dalpha_pipeline_passes(alpha):
    out = dalpha_pipeline(alpha)
    assert out.passed
    assert out.measured == pytest.approx(2.0, abs=1e-3)
    assert out.details["basis_ok"] and out.details["bound_ok"]
    assert out.details["moment_10"] < 2 * math.pi**2 / (alpha - 2)


def test_dalpha_basis_survives_near_upper_exponent():
    # at alpha = 2.9 the degree-2 moments are divergent with a slow growth
    # exponent; the basis must still come out as the three survivors
    from bergkit.domains import Sliver
    from bergkit.moments import Verdict, classify_convergence, mi, multi_indices

    spec = Sliver(2.9)
    convergent = [
        idx.entries
        for idx in multi_indices(2, 2)
        if classify_convergence(spec, idx).verdict is Verdict.CONVERGENT
    ]
    assert sorted(convergent) == [(0, 0), (0, 1), (1, 0)]


def test_pipeline_verdict_invariant_under_constant_perturbation():
    # constant curvature 2 is a property of the affine kernel shape, not of
    # the particular (c0, c1): perturb both by +-10%
    import numpy as np

    from bergkit.domains import Sliver, sample_interior
    from bergkit.geometry import constant_curvature_verdict
    from bergkit.kernels import SliverAffineKernel

    base = SliverAffineKernel(0.21, 1.53)
    pts = sample_interior(Sliver(2.5), 8, seed=5)
    for f0, f1 in [(0.9, 1.1), (1.1, 0.9), (1.1, 1.1)]:
        model = SliverAffineKernel(base.c0 * f0, base.c1 * f1)
        report = constant_curvature_verdict(model, pts, 16, seed=2, tol=1e-3)
        assert report.is_constant
        assert report.constant_value == pytest.approx(2.0, abs=1e-3)

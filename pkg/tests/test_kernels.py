import math

import numpy as np
import pytest

from bergkit.domains import Ball, HartogsGauss, ModelPotential, Sliver
from bergkit.errors import EvaluationDomainError, InputError, KernelAssemblyError
from bergkit.kernels import (
    BallKernel,
    HartogsGaussKernel,
    HartogsGaussSeriesKernel,
    ModelPotentialKernel,
    MonomialSeriesKernel,
    SliverAffineKernel,
    assemble_series,
    auto_truncation,
    canonical_model,
    eulerian_polynomial,
    eval_log_kernel,
    truncation_error_bound,
)
from bergkit.moments import MomentTable, MomentResult, Verdict, build_moment_table, mi


@pytest.fixture(scope="module")
def sliver_table():
    return build_moment_table(Sliver(2.5), 4)


def test_sliver_series_has_exactly_three_terms(sliver_table):
    model = assemble_series(sliver_table, 4)
    assert len(model.indices) == 3
    assert [i.entries for i in model.indices] == [(0, 0), (0, 1), (1, 0)]


def test_sliver_series_equals_affine_form(sliver_table):
    model = assemble_series(sliver_table, 4)
    m00 = sliver_table.entries[mi(0, 0)].value
    m10 = sliver_table.entries[mi(1, 0)].value
    affine = SliverAffineKernel(c0=1.0 / m00, c1=m00 / m10)
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((20, 2)) + 1j * rng.standard_normal((20, 2))
    assert np.allclose(model.log_kernel(pts), affine.log_kernel(pts), atol=1e-9)


def test_hartogs_series_coefficients_follow_reciprocal_moments():
    table = build_moment_table(HartogsGauss(1), 2)
    model = assemble_series(table, 2)
    for idx, coef in zip(model.indices, model.coefficients):
        a, q = idx.entries
        expect = (q + 1) ** (a + 2) / (math.pi**2 * math.factorial(a))
        assert coef == pytest.approx(expect, rel=1e-14)


def test_ball_series_truncation_one():
    table = build_moment_table(Ball(1), 1)
    model = assemble_series(table, 1)
    z = np.array([[0.4 + 0.3j]])
    expect = (1.0 + 2.0 * 0.25) / math.pi
    assert math.exp(model.log_kernel(z)[0]) == pytest.approx(expect, rel=1e-12)


def test_assemble_series_requires_full_degree_coverage(sliver_table):
    with pytest.raises(KernelAssemblyError):
        assemble_series(sliver_table, 6)


def test_assemble_series_rejects_trivial_space():
    table = MomentTable(
        domain=Sliver(2.5),
        entries={
            mi(0, 0): MomentResult(value=None, abs_error=None, verdict=Verdict.DIVERGENT)
        },
    )
    with pytest.raises(KernelAssemblyError):
        MonomialSeriesKernel(table, 0)


def test_hartogs_closed_form_at_origin():
    model = HartogsGaussKernel(1)
    assert eval_log_kernel(model, [0j, 0j]) == pytest.approx(
        math.log(1.0 / math.pi**2), rel=1e-14
    )


def test_hartogs_series_matches_closed_form_at_half():
    closed = HartogsGaussKernel(1)
    series = HartogsGaussSeriesKernel(1, 60)
    pt = [0j, math.sqrt(0.5) + 0j]  # u = 0.5
    assert abs(eval_log_kernel(series, pt) - eval_log_kernel(closed, pt)) < 1e-10


def test_eulerian_polynomials():
    assert eulerian_polynomial(1) == (1,)
    assert eulerian_polynomial(2) == (1, 1)
    assert eulerian_polynomial(3) == (1, 4, 1)
    assert eulerian_polynomial(4) == (1, 11, 11, 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_closed_form_sums_the_series(n):
    # sum (p+1)^(n+1) u^p = A_(n+1)(u) / (1-u)^(n+2)
    u = 0.37
    brute = sum((p + 1) ** (n + 1) * u**p for p in range(400))
    coeffs = np.asarray(eulerian_polynomial(n + 1), dtype=float)
    closed = np.polynomial.polynomial.polyval(u, coeffs) / (1 - u) ** (n + 2)
    assert closed == pytest.approx(brute, rel=1e-14)


def test_model_potential_evaluations():
    euc = ModelPotentialKernel(ModelPotential("euclidean", 1.0, 2))
    assert eval_log_kernel(euc, [1 + 1j, 2j]) == pytest.approx(6.0, rel=1e-14)
    fs = ModelPotentialKernel(ModelPotential("fubini_study", 2.0, 1))
    assert eval_log_kernel(fs, [1 + 0j]) == pytest.approx(2 * math.log(2), rel=1e-14)
    hyp = ModelPotentialKernel(ModelPotential("hyperbolic", 3.0, 1))
    assert eval_log_kernel(hyp, [0.5 + 0j]) == pytest.approx(
        -3 * math.log(0.75), rel=1e-14
    )


def test_ball_log_kernel_value():
    model = BallKernel(2)
    val = eval_log_kernel(model, [0.5 + 0j, 0j])
    assert val == pytest.approx(math.log(2 / math.pi**2) - 3 * math.log(0.75), rel=1e-12)


def test_truncation_bound_examples():
    series = HartogsGaussSeriesKernel(1, 60)
    pt = np.array([[0j, math.sqrt(0.5) + 0j]])
    assert series.tail_bound(pt)[0] < 1e-12
    origin = np.array([[0j, 0j]])
    assert series.tail_bound(origin)[0] == 0.0
    bounds = [
        HartogsGaussSeriesKernel(1, n).tail_bound(pt)[0] for n in (20, 40, 60)
    ]
    assert bounds[0] > bounds[1] > bounds[2]


def test_truncation_bound_dominates_actual_tail():
    u = 0.6
    pt = np.array([[0j, math.sqrt(u) + 0j]])  # t = 0, so exp(potential) is S_N(u)
    reference = HartogsGaussSeriesKernel(2, 400)
    s_ref = math.exp(reference.potential(pt)[0])
    for trunc in (10, 30, 60):
        series = HartogsGaussSeriesKernel(2, trunc)
        s_n = math.exp(series.potential(pt)[0])
        assert series.tail_bound(pt)[0] * s_n >= s_ref - s_n > 0


def test_truncation_bound_requires_series_model():
    with pytest.raises(InputError):
        truncation_error_bound(HartogsGaussKernel(1), [0j, 0j])


def test_kernel_positivity_and_monotone_truncation():
    pt = np.array([[0.3 + 0.1j, 0.2 - 0.4j]])
    values = []
    for trunc in (0, 2, 5, 20):
        series = HartogsGaussSeriesKernel(1, trunc)
        values.append(series.log_kernel(pt)[0])
    assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))
    assert np.isfinite(values).all()


def test_reinhardt_phase_invariance():
    models = [
        HartogsGaussKernel(1),
        BallKernel(2),
        SliverAffineKernel(0.2, 1.1),
    ]
    rng = np.random.default_rng(1)
    for model in models:
        base = rng.random((4, model.dimension)) * 0.3
        phases = np.exp(2j * np.pi * rng.random((4, model.dimension)))
        assert np.allclose(
            model.log_kernel(base.astype(complex)),
            model.log_kernel(base * phases),
            rtol=0,
            atol=1e-13,
        )


def test_evaluation_domain_errors():
    with pytest.raises(EvaluationDomainError):
        eval_log_kernel(HartogsGaussKernel(1), [0j, 1.2 + 0j])  # u >= 1
    with pytest.raises(EvaluationDomainError):
        eval_log_kernel(BallKernel(1), [1.0 + 0j])
    with pytest.raises(EvaluationDomainError):
        eval_log_kernel(
            ModelPotentialKernel(ModelPotential("hyperbolic", 2.0, 1)), [1.1 + 0j]
        )


def test_auto_truncation_bounds():
    assert auto_truncation(1, 0.0) == 0
    n_half = auto_truncation(1, 0.5)
    probe = np.array([[0j, math.sqrt(0.5) + 0j]])
    assert HartogsGaussSeriesKernel(1, n_half).tail_bound(probe)[0] < 1e-12
    assert auto_truncation(1, 0.99) == 500  # cap


def test_canonical_models():
    assert isinstance(canonical_model(Ball(2)), BallKernel)
    assert isinstance(canonical_model(HartogsGauss(1)), HartogsGaussKernel)
    assert isinstance(
        canonical_model(ModelPotential("euclidean", 1.0, 1)), ModelPotentialKernel
    )
    sliver = canonical_model(Sliver(2.5))
    assert isinstance(sliver, SliverAffineKernel)
    assert sliver.c1 > 0

import math

import numpy as np
import pytest
from scipy import integrate

from bergkit.domains import Ball, HartogsGauss, Sliver
from bergkit.errors import DivergentMomentError, InputError
from bergkit.moments import (
    QuadratureSettings,
    Verdict,
    build_moment_table,
    classify_convergence,
    gaussian_moment,
    gaussian_moment_quadrature,
    mi,
    moment_closed_form,
    moment_quadrature,
    monte_carlo_moment,
    multi_indices,
    orthogonality_residual,
    table_rows,
)


def test_hartogs_closed_form_examples():
    res = moment_closed_form(HartogsGauss(1), mi(1, 2))
    assert res.value == pytest.approx(math.pi**2 / 27, rel=1e-15)
    res = moment_closed_form(HartogsGauss(1), mi(0, 0))
    assert res.value == pytest.approx(math.pi**2, rel=1e-15)
    res = moment_closed_form(HartogsGauss(2), mi(2, 1, 3))
    assert res.value == pytest.approx(math.pi**3 * 2 / 4**6, rel=1e-14)


def test_ball_closed_form_against_polar_oracle():
    # 1-D oracle: ||z^k||^2 over the disc is int_0^1 r^(2k+1) 2 pi dr
    for k in range(5):
        oracle, _ = integrate.quad(lambda r, k=k: 2 * math.pi * r ** (2 * k + 1), 0, 1)
        assert moment_closed_form(Ball(1), mi(k)).value == pytest.approx(
            oracle, rel=1e-12
        )
        assert moment_closed_form(Ball(1), mi(k)).value == pytest.approx(
            math.pi / (k + 1), rel=1e-14
        )


def test_ball_closed_form_against_simplex_oracle():
    # shadow oracle in 2-D: pi^2 * iint_{x+y<1} x^a y^b
    for a, b in [(0, 0), (1, 0), (2, 1), (1, 3)]:
        oracle, _ = integrate.dblquad(
            lambda y, x, a=a, b=b: x**a * y**b, 0, 1, 0, lambda x: 1 - x
        )
        val = moment_closed_form(Ball(2), mi(a, b)).value
        assert val == pytest.approx(math.pi**2 * oracle, rel=1e-9)


def test_sliver_has_no_closed_form():
    assert moment_closed_form(Sliver(2.5), mi(0, 0)) is None


def test_closed_form_arity_mismatch():
    with pytest.raises(InputError):
        moment_closed_form(HartogsGauss(1), mi(1))
    with pytest.raises(InputError):
        gaussian_moment(mi(1, 0), mi(1))


@pytest.mark.parametrize("a", range(4))
@pytest.mark.parametrize("q", range(4))
def test_hartogs_quadrature_matches_closed_form(a, q):
    spec = HartogsGauss(1)
    cf = moment_closed_form(spec, mi(a, q)).value
    res = moment_quadrature(spec, mi(a, q))
    assert abs(res.value - cf) / cf < 1e-6
    assert abs(res.value - cf) <= max(res.abs_error, 1e-13 * cf)


def test_classification_examples():
    spec = Sliver(2.5)
    assert classify_convergence(spec, mi(0, 0)).verdict is Verdict.CONVERGENT
    assert classify_convergence(spec, mi(1, 0)).verdict is Verdict.CONVERGENT
    assert classify_convergence(spec, mi(1, 1)).verdict is Verdict.DIVERGENT
    cv = classify_convergence(spec, mi(1, 1))
    assert cv.slope == pytest.approx(cv.predicted_slope, abs=0.1)


@pytest.mark.parametrize("alpha", [2.2, 2.5, 2.8])
def test_classification_degree_four_grid(alpha):
    spec = Sliver(alpha)
    convergent = [
        idx.entries
        for idx in multi_indices(2, 4)
        if classify_convergence(spec, idx).verdict is Verdict.CONVERGENT
    ]
    assert sorted(convergent) == [(0, 0), (0, 1), (1, 0)]


def test_quadrature_refuses_divergent_moment():
    with pytest.raises(DivergentMomentError):
        moment_quadrature(Sliver(2.5), mi(1, 1))


def test_sliver_volume_against_monte_carlo():
    spec = Sliver(2.5)
    quad = moment_quadrature(spec, mi(0, 0))
    mc, sigma = monte_carlo_moment(spec, mi(0, 0), samples=10_000_000, seed=11)
    assert abs(mc - quad.value) < 3.0 * sigma + quad.abs_error


def test_sliver_degree_one_against_monte_carlo():
    spec = Sliver(2.5)
    quad = moment_quadrature(spec, mi(1, 0))
    mc, sigma = monte_carlo_moment(spec, mi(1, 0), samples=10_000_000, seed=12)
    assert abs(mc - quad.value) < 3.0 * sigma + quad.abs_error


def test_sliver_symmetry_and_paper_bound():
    for alpha in (2.2, 2.5, 2.8):
        spec = Sliver(alpha)
        m10 = moment_quadrature(spec, mi(1, 0))
        m01 = moment_quadrature(spec, mi(0, 1))
        assert abs(m10.value - m01.value) <= m10.abs_error + m01.abs_error
        assert m10.value < 2.0 * math.pi**2 / (alpha - 2.0)


def test_sliver_moment_decreasing_in_alpha():
    vals = [moment_quadrature(Sliver(a), mi(1, 0)).value for a in (2.2, 2.5, 2.8)]
    assert vals[0] > vals[1] > vals[2]


def test_error_honesty_under_halved_tolerances():
    spec = Sliver(2.5)
    base = QuadratureSettings()
    for idx in (mi(0, 0), mi(1, 0)):
        loose = moment_quadrature(spec, idx, base)
        tight = moment_quadrature(spec, idx, base.halved())
        assert abs(loose.value - tight.value) <= loose.abs_error


def test_gaussian_moment_examples():
    assert gaussian_moment(mi(2, 0), mi(2, 0)) == 2.0
    assert gaussian_moment(mi(1, 0), mi(0, 1)) == 0.0
    assert gaussian_moment(mi(0, 0, 0), mi(0, 0, 0)) == 1.0


def test_gaussian_quadrature_matches_exact():
    for n in (1, 2):
        for a in multi_indices(n, 3):
            for b in multi_indices(n, 3):
                quad = gaussian_moment_quadrature(a, b)
                assert abs(quad.value - gaussian_moment(a, b)) < 1e-10


@pytest.mark.parametrize(
    "spec,a,b",
    [
        (Sliver(2.5), mi(1, 0), mi(0, 1)),
        (HartogsGauss(1), mi(0, 0), mi(1, 0)),
        (Ball(2), mi(1, 0), mi(0, 1)),
    ],
)
def test_orthogonality_residuals(spec, a, b):
    res = orthogonality_residual(spec, a, b, samples=200_000, seed=5)
    assert res.residual < 3.0 * res.sigma


def test_orthogonality_rejects_divergent_inputs():
    with pytest.raises(DivergentMomentError):
        orthogonality_residual(Sliver(2.5), mi(2, 0), mi(0, 2))


def test_moment_table_and_csv_rows():
    table = build_moment_table(Sliver(2.5), 4)
    assert len(table.entries) == 15
    rows = table_rows(table)
    assert rows[0][0] == "0:0"
    verdicts = [r[3] for r in rows]
    assert verdicts.count("convergent") == 3
    divergent_rows = [r for r in rows if r[3] == "divergent"]
    assert all(r[1] == "" and r[2] == "" for r in divergent_rows)
    # symmetric entries agree within reported error
    by_idx = {r[0]: r for r in rows}
    v10, e10 = float(by_idx["1:0"][1]), float(by_idx["1:0"][2])
    v01, e01 = float(by_idx["0:1"][1]), float(by_idx["0:1"][2])
    assert abs(v10 - v01) <= e10 + e01

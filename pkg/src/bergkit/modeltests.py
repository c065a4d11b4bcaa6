"""Verification procedures for the model computations, and the check suite.

Each check packages measured values against an expectation and a tolerance
into a `CheckOutcome`; `paper_suite` runs the full battery (sliver pipeline
at three exponents, flat-slice checks, Gaussian-moment and Laplacian checks,
the binomial sign grid, constancy anchors, and the curvature upper-bound
sweep) and returns outcomes sorted by name.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .domains import Ball, HartogsGauss, ModelPotential, Sliver, sample_interior
from .errors import InputError
from .geometry import (
    CurvatureReport,
    GeometrySettings,
    constant_curvature_verdict,
    curvature_from_sample,
    metric_at,
)
from .kernels import (
    BallKernel,
    HartogsGaussKernel,
    ModelPotentialKernel,
    assemble_series,
)
from .moments import (
    QuadratureSettings,
    Verdict,
    build_moment_table,
    gaussian_moment,
    gaussian_moment_quadrature,
    mi,
    multi_indices,
)
from .wirtinger import laplacian


@dataclass(frozen=True)
class CheckOutcome:
    """One verification result: `passed` is a pure function of the numbers."""

    name: str
    passed: bool
    measured: float
    expected: float
    tolerance: float
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class NegativeCoefficient:
    index: int
    coefficient: float


def binomial_sign_test(lam: float, k_max: int) -> Optional[NegativeCoefficient]:
    """First negative Taylor coefficient of (1+x)^lam, or None.

    Coefficients are lam(lam-1)..(lam-k+1)/k!.  For nonnegative integer lam
    they are all >= 0 (and vanish past degree lam), so the result is None
    exactly on the integers.
    """
    if lam <= 0:
        raise InputError(f"lam must be > 0, got {lam}")
    if k_max < math.ceil(lam) + 1:
        raise InputError(f"k_max must be >= ceil(lam)+1 = {math.ceil(lam) + 1}")
    coef = 1.0
    for k in range(1, k_max + 1):
        coef *= (lam - (k - 1)) / k
        if coef < 0.0:
            return NegativeCoefficient(index=k, coefficient=coef)
    return None


DEFAULT_SLICE_POINTS = {
    1: (0.0 + 0.0j, 0.5 + 0.0j, 1.0 + 0.3j),
    2: ((0.0 + 0.0j, 0.0 + 0.0j), (0.5 + 0.0j, -0.2 + 0.1j), (0.4 + 0.3j, 0.1 - 0.5j)),
}

#: Off-slice control magnitude: |w|^2 = _CONTROL_WSQ * exp(-|z|^2).
_CONTROL_WSQ = 0.09


def flat_slice_check(
    n: int,
    z_points: Sequence | None = None,
    settings: GeometrySettings | None = None,
    metric_tol: float = 1e-6,
    mixed_tol: float = 1e-8,
    curvature_tol: float = 1e-5,
    control_factor: float = 1e3,
) -> CheckOutcome:
    """Flatness of the base slice w = 0 of the Gauss-weighted Hartogs domain.

    At (z, 0): the fibre-mixed metric entries vanish, the tangential block is
    the identity, and all tangential curvature components vanish.  A control
    point off the slice must show tangential curvature at least
    `control_factor` times the on-slice residual, so the check has power.
    """
    settings = settings or GeometrySettings()
    if z_points is None:
        z_points = DEFAULT_SLICE_POINTS[n] if n in DEFAULT_SLICE_POINTS else ()
    model = HartogsGaussKernel(n)

    mixed = metric_dev = curv = 0.0
    control = math.inf
    for z in z_points:
        zvec = np.atleast_1d(np.asarray(z, dtype=complex))
        point = np.concatenate([zvec, [0.0 + 0.0j]])
        sample = metric_at(model, point, settings)
        r = curvature_from_sample(sample, settings)
        mixed = max(mixed, float(np.abs(sample.g[:n, n]).max()), float(np.abs(sample.g[n, :n]).max()))
        metric_dev = max(metric_dev, float(np.abs(sample.g[:n, :n] - np.eye(n)).max()))
        curv = max(curv, float(np.abs(r[:n, :n, :n, :n]).max()))

        w_off = math.sqrt(_CONTROL_WSQ * math.exp(-float((np.abs(zvec) ** 2).sum())))
        control_point = np.concatenate([zvec, [w_off + 0.0j]])
        sample_off = metric_at(model, control_point, settings)
        r_off = curvature_from_sample(sample_off, settings)
        control = min(control, float(np.abs(r_off[:n, :n, :n, :n]).max()))

    power = control >= control_factor * max(curv, 1e-12)
    passed = (
        mixed < mixed_tol and metric_dev < metric_tol and curv < curvature_tol and power
    )
    return CheckOutcome(
        name=f"flat_slice_n{n}",
        passed=passed,
        measured=curv,
        expected=0.0,
        tolerance=curvature_tol,
        details={
            "mixed_metric_max": mixed,
            "mixed_tol": mixed_tol,
            "tangential_metric_dev": metric_dev,
            "metric_tol": metric_tol,
            "tangential_curvature_max": curv,
            "off_slice_control_min": control,
            "control_ratio": control / max(curv, 1e-12),
            "control_factor": control_factor,
        },
    )


def gaussian_uniqueness_check(
    n: int, max_degree: int, tol: float = 1e-8
) -> CheckOutcome:
    """Numerically reproduce the Gaussian pairing a! * delta for all pairs.

    Covers every pair of multi-indices with degrees <= max_degree: angular
    orthogonality gives the structural zeros, Gauss-Laguerre quadrature the
    diagonal values.
    """
    if max_degree < 2:
        raise InputError(f"max_degree must be >= 2, got {max_degree}")
    indices = multi_indices(n, max_degree)
    worst = 0.0
    pairs = 0
    for a in indices:
        for b in indices:
            exact = gaussian_moment(a, b)
            quad = gaussian_moment_quadrature(a, b).value
            worst = max(worst, abs(quad - exact))
            pairs += 1
    return CheckOutcome(
        name=f"gaussian_moments_n{n}",
        passed=worst < tol,
        measured=worst,
        expected=0.0,
        tolerance=tol,
        details={"pairs": pairs, "max_degree": max_degree},
    )


DEFAULT_LAPLACIAN_POINTS = {
    1: ((1.0 + 1.0j,), (0.4 - 0.2j,)),
    2: ((0.3 + 0.1j, -0.2 + 0.5j), (1.0 + 1.0j, 0.0 + 0.5j)),
}


def laplacian_contradiction_check(
    n: int,
    points: Sequence | None = None,
    tol: float = 1e-6,
    step: float = 0.05,
) -> CheckOutcome:
    """Exhibit the incompatible Laplacians of the two candidate potentials.

    u1 = -|z|^2 has Delta u1 = -4n everywhere, while u2 = 2 log|f| for the
    nonvanishing holomorphic f = exp(sum z_j) has Delta u2 = 0; a function
    equal to both would force 0 = -4n.
    """
    if points is None:
        points = DEFAULT_LAPLACIAN_POINTS[n]
    dev_quadratic = dev_harmonic = 0.0
    for p in points:
        pvec = np.atleast_1d(np.asarray(p, dtype=complex))
        lap1 = laplacian(lambda zs: -(np.abs(zs) ** 2).sum(axis=1), pvec, step)
        lap2 = laplacian(lambda zs: 2.0 * np.log(np.abs(np.exp(zs.sum(axis=1)))), pvec, step)
        dev_quadratic = max(dev_quadratic, abs(lap1 + 4.0 * n))
        dev_harmonic = max(dev_harmonic, abs(lap2))
    worst = max(dev_quadratic, dev_harmonic)
    return CheckOutcome(
        name=f"laplacian_contradiction_n{n}",
        passed=worst < tol,
        measured=worst,
        expected=0.0,
        tolerance=tol,
        details={
            "quadratic_laplacian_dev": dev_quadratic,
            "harmonic_laplacian_dev": dev_harmonic,
            "target_quadratic": -4.0 * n,
        },
    )


def dalpha_pipeline(
    alpha: float,
    seed: int = 7,
    num_points: int = 20,
    directions: int = 16,
    tol: float = 1e-3,
    quad_settings: QuadratureSettings | None = None,
    geometry_settings: GeometrySettings | None = None,
) -> CheckOutcome:
    """End-to-end sliver run: classification, moments, kernel, curvature.

    Classifies all moments through degree 4 (exactly the constants, z and w
    survive), computes the surviving moments by quadrature, assembles the
    kernel series, and verdicts constant curvature 2 over sampled interior
    points.  Also checks the degree-1 moment bound 2 pi^2/(alpha-2) and the
    z/w symmetry of the degree-1 moments.
    """
    spec = Sliver(alpha)
    quad_settings = quad_settings or QuadratureSettings()
    start = time.perf_counter()

    table = build_moment_table(spec, 4, quad_settings)
    convergent = sorted(
        idx.entries for idx, r in table.entries.items() if r.verdict is Verdict.CONVERGENT
    )
    basis_ok = convergent == [(0, 0), (0, 1), (1, 0)]

    m00 = table.entries[mi(0, 0)]
    m10 = table.entries[mi(1, 0)]
    m01 = table.entries[mi(0, 1)]
    bound = 2.0 * math.pi**2 / (alpha - 2.0)
    bound_ok = m10.value < bound
    symmetric_ok = abs(m10.value - m01.value) <= m10.abs_error + m01.abs_error

    model = assemble_series(table, 4)
    points = sample_interior(spec, num_points, seed)
    report = constant_curvature_verdict(
        model, points, directions, seed=seed, tol=tol, settings=geometry_settings
    )
    value = 0.5 * (report.global_max + report.global_min)
    curvature_ok = report.is_constant and abs(value - 2.0) <= tol

    passed = basis_ok and bound_ok and symmetric_ok and curvature_ok
    return CheckOutcome(
        name=f"dalpha_pipeline_{alpha}",
        passed=passed,
        measured=value,
        expected=2.0,
        tolerance=tol,
        details={
            "convergent_indices": [list(e) for e in convergent],
            "basis_ok": basis_ok,
            "moment_00": m00.value,
            "moment_10": m10.value,
            "moment_01": m01.value,
            "moment_bound": bound,
            "bound_ok": bound_ok,
            "symmetric_ok": symmetric_ok,
            "c0": 1.0 / m00.value,
            "c1": m00.value / m10.value,
            "max_deviation": report.max_deviation,
            "hsc_min": report.global_min,
            "hsc_max": report.global_max,
            "runtime_s": time.perf_counter() - start,
        },
    )


def _constancy_check(
    name: str,
    model,
    points: np.ndarray,
    expected: float,
    tol: float,
    seed: int,
    settings: GeometrySettings | None,
    directions: int = 16,
) -> tuple[CheckOutcome, CurvatureReport]:
    report = constant_curvature_verdict(
        model, points, directions, seed=seed, tol=tol, settings=settings
    )
    dev = max(abs(report.global_max - expected), abs(report.global_min - expected))
    outcome = CheckOutcome(
        name=name,
        passed=dev <= tol,
        measured=0.5 * (report.global_max + report.global_min),
        expected=expected,
        tolerance=tol,
        details={
            "max_abs_deviation": dev,
            "hsc_min": report.global_min,
            "hsc_max": report.global_max,
            "points": len(points),
        },
    )
    return outcome, report


def paper_suite(
    tol_profile: str = "default", seed: int = 2024
) -> list[CheckOutcome]:
    """Run the full verification battery; outcomes sorted by check name.

    `tol_profile` 'strict' halves every tolerance (the suite is expected to
    pass either way; strict documents the headroom).
    """
    if tol_profile not in ("default", "strict"):
        raise InputError(f"unknown tol profile {tol_profile!r}")
    scale = 0.5 if tol_profile == "strict" else 1.0
    geo = GeometrySettings()
    if tol_profile == "strict":
        geo = geo.halved()

    outcomes: list[CheckOutcome] = []
    hsc_samples: list[tuple[str, float]] = []

    for alpha in (2.2, 2.5, 2.8):
        out = dalpha_pipeline(alpha, seed=seed, tol=1e-3 * scale, geometry_settings=geo)
        outcomes.append(out)
        hsc_samples.append((out.name, out.details["hsc_max"]))

    for n in (1, 2):
        outcomes.append(
            flat_slice_check(
                n,
                settings=geo,
                metric_tol=1e-6 * scale,
                mixed_tol=1e-8 * scale,
                curvature_tol=1e-5 * scale,
            )
        )
        outcomes.append(gaussian_uniqueness_check(n, 3, tol=1e-8 * scale))
        outcomes.append(laplacian_contradiction_check(n, tol=1e-6 * scale))

    lam_grid = [0.5 * k for k in range(1, 11)]
    coef_dev = 0.0
    dichotomy_ok = True
    first_negative = {}
    for lam in lam_grid:
        res = binomial_sign_test(lam, k_max=12)
        is_integer = float(lam).is_integer()
        dichotomy_ok &= (res is None) == is_integer
        if res is not None:
            direct = math.prod(lam - j for j in range(res.index)) / math.factorial(
                res.index
            )
            coef_dev = max(coef_dev, abs(res.coefficient - direct))
            first_negative[str(lam)] = res.index
    outcomes.append(
        CheckOutcome(
            name="binomial_sign_grid",
            passed=dichotomy_ok and coef_dev < 1e-12 * scale,
            measured=coef_dev,
            expected=0.0,
            tolerance=1e-12 * scale,
            details={"dichotomy_ok": dichotomy_ok, "first_negative": first_negative},
        )
    )

    for n in (1, 2, 3):
        pts = sample_interior(Ball(n), 10, seed=seed + n)
        out, rep = _constancy_check(
            f"ball_constancy_n{n}",
            BallKernel(n),
            pts,
            expected=-2.0 / (n + 1),
            tol=1e-6 * scale,
            seed=seed,
            settings=geo,
        )
        outcomes.append(out)
        hsc_samples.append((out.name, rep.global_max))

    fs_spec = ModelPotential("fubini_study", 1.0, 2)
    pts = sample_interior(fs_spec, 10, seed=seed)
    out, rep = _constancy_check(
        "fubini_study_constancy",
        ModelPotentialKernel(fs_spec),
        pts,
        expected=2.0,
        tol=1e-6 * scale,
        seed=seed,
        settings=geo,
    )
    outcomes.append(out)
    hsc_samples.append((out.name, rep.global_max))

    euc_spec = ModelPotential("euclidean", 1.0, 2)
    pts = sample_interior(euc_spec, 10, seed=seed, box_radius=0.7)
    out, rep = _constancy_check(
        "euclidean_flatness",
        ModelPotentialKernel(euc_spec),
        pts,
        expected=0.0,
        tol=1e-8 * scale,
        seed=seed,
        settings=geo,
    )
    outcomes.append(out)
    hsc_samples.append((out.name, rep.global_max))

    for n in (1, 2):
        spec = HartogsGauss(n)
        pts = sample_interior(spec, 6, seed=seed + n, margin=0.25, box_radius=1.0)
        report = constant_curvature_verdict(
            HartogsGaussKernel(n), pts, 16, seed=seed, tol=math.inf, settings=geo
        )
        hsc_samples.append((f"hartogs_sweep_n{n}", report.global_max))

    bound_tol = 1e-3 * scale
    max_name, max_val = max(hsc_samples, key=lambda kv: kv[1])
    outcomes.append(
        CheckOutcome(
            name="bergman_bound_sweep",
            passed=max_val <= 2.0 + bound_tol,
            measured=max_val,
            expected=2.0,
            tolerance=bound_tol,
            details={"max_source": max_name, "samples": dict(hsc_samples)},
        )
    )

    return sorted(outcomes, key=lambda o: o.name)

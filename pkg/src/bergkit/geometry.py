"""Bergman metric tensors and holomorphic sectional curvature.

The metric is g_ij = d^2 log K / dz_i dzbar_j and the curvature tensor is

    R_ijkl = - d^2 g_ij / dz_k dzbar_l
             + sum_{a,b} g^{ab} (d g_ib / dz_k) (d g_aj / dzbar_l)

(indices j, l, b conjugated).  Holomorphic sectional curvature is
H(v) = R(v, vbar, v, vbar) / g(v, vbar)^2, normalized so the unit-scale
Fubini-Study model has H = +2 everywhere.

Two derivative paths ship: the finite-difference path (`wirtinger`, works
for any potential, the default) and an exact chain-rule path for models
that expose a `sigma_profile` (used for cross-validation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import (
    BergkitError,
    DegenerateMetricError,
    InputError,
    NumericsError,
)
from .kernels import KernelModel
from .profiles import SigmaProfile
from .wirtinger import DerivativeBundle, derivative_bundle, wirtinger_hessian

__all__ = [
    "GeometrySettings",
    "MetricSample",
    "CurvatureReport",
    "metric_at",
    "curvature_tensor",
    "curvature_from_sample",
    "hsc",
    "hsc_from_sample",
    "constant_curvature_verdict",
    "exact_bundle",
    "wirtinger_hessian",
]


@dataclass(frozen=True)
class GeometrySettings:
    """Tolerances and stencil parameters for metric/curvature numerics.

    fd_step is the base stencil step, scaled by max(1, |point|_inf); with
    sixth-order stencils and Richardson pairing this balances truncation
    against the eps/h^4 roundoff of fourth derivatives in float64.
    """

    fd_step: float = 0.05
    fd_accuracy: int = 6
    method: str = "fd"  # 'fd' | 'exact'
    hermitian_tol: float = 1e-8
    curvature_sym_tol: float = 1e-6
    error_factor: float = 10.0
    pd_rel_tol: float = 1e-9

    def halved(self) -> "GeometrySettings":
        return replace(
            self,
            hermitian_tol=self.hermitian_tol / 2,
            curvature_sym_tol=self.curvature_sym_tol / 2,
        )


@dataclass
class MetricSample:
    """Metric data at one point: g, its inverse, and holomorphic derivatives.

    dg[i,j,k]    = d g_ij / dz_k          (j conjugated)
    ddg[i,j,k,l] = d^2 g_ij / dz_k dzbar_l

    The antiholomorphic first derivative is determined by Hermiticity:
    d g_ij / dzbar_l = conj(dg[j,i,l]).
    """

    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray
    cond: float
    err_g: float
    err_dg: float
    err_ddg: float


@dataclass
class CurvatureReport:
    points: np.ndarray
    hsc_min: np.ndarray  # per-point minimum over sampled directions
    hsc_max: np.ndarray
    is_constant: bool
    constant_value: Optional[float]
    max_deviation: float  # global max - min over all points and directions
    tolerance: float

    @property
    def global_min(self) -> float:
        return float(self.hsc_min.min())

    @property
    def global_max(self) -> float:
        return float(self.hsc_max.max())


def effective_step(settings: GeometrySettings, point: np.ndarray) -> float:
    scale = float(np.abs(point).max()) if point.size else 1.0
    return settings.fd_step * max(1.0, scale)


def exact_bundle(profile: SigmaProfile, point) -> DerivativeBundle:
    """Chain-rule derivatives for potentials F(|z_1|^2, .., |z_m|^2).

    With sigma_a = z_a zbar_a and F_{a..} the mixed sigma-partials:
        g_ij    = F_ij zbar_i z_j + delta_ij F_i
        dg_ijk  = F_ijk zbar_i z_j zbar_k + F_ij delta_jk zbar_i
                  + F_ik delta_ij zbar_k
        ddg_ijkl = F_ijkl zbar_i z_j zbar_k z_l
                  + F_ijk (delta_il z_j zbar_k + delta_kl zbar_i z_j)
                  + F_ijl delta_jk z_l zbar_i + F_ij delta_jk delta_il
                  + F_ikl delta_ij z_l zbar_k + F_ik delta_ij delta_kl
    """
    z = np.asarray(point, dtype=complex).reshape(-1)
    m = z.size
    sigma = np.abs(z) ** 2
    cz = np.conj(z)

    def part(*axes: int) -> float:
        return profile.partial(tuple(sorted(axes)), sigma)

    f1 = np.array([part(a) for a in range(m)])
    f2 = np.array([[part(a, b) for b in range(m)] for a in range(m)])
    f3 = np.array(
        [[[part(a, b, c) for c in range(m)] for b in range(m)] for a in range(m)]
    )
    f4 = np.array(
        [
            [
                [[part(a, b, c, d) for d in range(m)] for c in range(m)]
                for b in range(m)
            ]
            for a in range(m)
        ]
    )

    g = f2 * np.outer(cz, z) + np.diag(f1).astype(complex)
    dg = np.empty((m, m, m), dtype=complex)
    ddg = np.empty((m, m, m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            for k in range(m):
                dg[i, j, k] = (
                    f3[i, j, k] * cz[i] * z[j] * cz[k]
                    + f2[i, j] * (j == k) * cz[i]
                    + f2[i, k] * (i == j) * cz[k]
                )
                for l in range(m):
                    ddg[i, j, k, l] = (
                        f4[i, j, k, l] * cz[i] * z[j] * cz[k] * z[l]
                        + f3[i, j, k]
                        * ((i == l) * z[j] * cz[k] + (k == l) * cz[i] * z[j])
                        + f3[i, j, l] * (j == k) * z[l] * cz[i]
                        + f2[i, j] * (j == k) * (i == l)
                        + f3[i, k, l] * (i == j) * z[l] * cz[k]
                        + f2[i, k] * (i == j) * (k == l)
                    )
    return DerivativeBundle(
        point=z, g=g, dg=dg, ddg=ddg, err_g=0.0, err_dg=0.0, err_ddg=0.0
    )


def _bundle(model: KernelModel, point: np.ndarray, settings: GeometrySettings):
    if settings.method == "exact":
        profile = model.sigma_profile()
        if profile is None:
            raise InputError(
                f"{type(model).__name__} has no exact-derivative profile; "
                "use the finite-difference path"
            )
        return exact_bundle(profile, point)
    if settings.method != "fd":
        raise InputError(f"unknown derivative method {settings.method!r}")
    step = effective_step(settings, point)
    return derivative_bundle(model.potential, point, step, settings.fd_accuracy)


def metric_at(
    model: KernelModel, point, settings: GeometrySettings | None = None
) -> MetricSample:
    """Metric tensor with derivatives at an interior point.

    Rejects non-Hermitian or non-positive-definite results; positivity is
    the numeric proxy for the Bergman metric being well defined there.
    """
    settings = settings or GeometrySettings()
    point = np.asarray(point, dtype=complex).reshape(-1)
    if point.size != model.dimension:
        raise InputError(
            f"point arity {point.size} does not match model dimension {model.dimension}"
        )
    bundle = _bundle(model, point, settings)

    g = bundle.g
    herm_residual = float(np.abs(g - g.conj().T).max())
    gscale = float(np.abs(g).max())
    if herm_residual > max(
        settings.hermitian_tol * max(1.0, gscale), settings.error_factor * bundle.err_g
    ):
        raise NumericsError(
            f"metric Hermitian residual {herm_residual:.3e} exceeds tolerance at "
            f"point {point}"
        )
    g = 0.5 * (g + g.conj().T)

    # Kaehler property: d g_ij / dz_k is symmetric in (i, k) for any
    # potential-derived metric; treat violations like Hermitian failures.
    dg = bundle.dg
    kahler_residual = float(np.abs(dg - dg.transpose(2, 1, 0)).max())
    if kahler_residual > max(
        settings.hermitian_tol * max(1.0, gscale),
        settings.error_factor * bundle.err_dg,
    ):
        raise NumericsError(
            f"metric derivative symmetry residual {kahler_residual:.3e} exceeds "
            f"tolerance at point {point}"
        )
    dg = 0.5 * (dg + dg.transpose(2, 1, 0))

    eigs = np.linalg.eigvalsh(g)
    # relative to the top eigenvalue, with an absolute floor so an
    # (almost-)zero metric is still flagged as degenerate
    if eigs[0] <= settings.pd_rel_tol * max(abs(eigs[-1]), 1.0):
        raise DegenerateMetricError(
            f"metric fails positive definiteness at point {point}",
            smallest_eigenvalue=float(eigs[0]),
        )
    return MetricSample(
        point=point,
        g=g,
        g_inv=np.linalg.inv(g),
        dg=dg,
        ddg=bundle.ddg,
        cond=float(eigs[-1] / eigs[0]),
        err_g=bundle.err_g,
        err_dg=bundle.err_dg,
        err_ddg=bundle.err_ddg,
    )


def _curvature_error_scale(sample: MetricSample) -> float:
    dg_scale = float(np.abs(sample.dg).max()) if sample.dg.size else 0.0
    ginv_scale = float(np.abs(sample.g_inv).max())
    m = sample.g.shape[0]
    return sample.err_ddg + 2.0 * m * m * ginv_scale * dg_scale * sample.err_dg


def curvature_from_sample(
    sample: MetricSample, settings: GeometrySettings | None = None
) -> np.ndarray:
    """Curvature tensor R[i,j,k,l] (j, l conjugated) from a metric sample."""
    settings = settings or GeometrySettings()
    dgc = np.conj(sample.dg)
    # g^{ab} with the bar on b is the entrywise conjugate of the matrix
    # inverse: contraction below is ginv[b, a] dg[i, b, k] conj(dg)[j, a, l].
    r = -sample.ddg + np.einsum("ba,ibk,jal->ijkl", sample.g_inv, sample.dg, dgc)

    err = _curvature_error_scale(sample)
    rscale = max(1.0, float(np.abs(r).max()))
    threshold = max(settings.curvature_sym_tol * rscale, settings.error_factor * err)
    residual = max(
        float(np.abs(r - r.transpose(2, 1, 0, 3)).max()),
        float(np.abs(r - r.transpose(0, 3, 2, 1)).max()),
        float(np.abs(r - np.conj(r.transpose(1, 0, 3, 2))).max()),
    )
    if residual > threshold:
        raise NumericsError(
            f"curvature symmetry residual {residual:.3e} exceeds {threshold:.3e} "
            f"at point {sample.point}; the stencil step may be too large or the "
            "point too close to the boundary"
        )
    return r


def curvature_tensor(
    model: KernelModel, point, settings: GeometrySettings | None = None
) -> np.ndarray:
    return curvature_from_sample(metric_at(model, point, settings), settings)


def hsc_from_sample(sample: MetricSample, curvature: np.ndarray, direction) -> float:
    v = np.asarray(direction, dtype=complex).reshape(-1)
    if v.size != sample.g.shape[0]:
        raise InputError("direction arity does not match the metric dimension")
    if not np.any(v):
        raise InputError("direction must be nonzero")
    vc = np.conj(v)
    num = np.einsum("ijkl,i,j,k,l->", curvature, v, vc, v, vc).real
    den = np.einsum("ij,i,j->", sample.g, v, vc).real
    return float(num / den**2)


def hsc(
    model: KernelModel, point, direction, settings: GeometrySettings | None = None
) -> float:
    """Holomorphic sectional curvature along `direction` (scale-invariant)."""
    sample = metric_at(model, point, settings)
    return hsc_from_sample(sample, curvature_from_sample(sample, settings), direction)


def _direction_rng(seed: int, point_index: int) -> np.random.Generator:
    # Partitioned deterministically per point so per-point work can fan out.
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence((seed, point_index)))
    )


def constant_curvature_verdict(
    model: KernelModel,
    points,
    directions_per_point: int = 16,
    seed: int = 0,
    tol: float = 1e-3,
    settings: GeometrySettings | None = None,
) -> CurvatureReport:
    """Sample H over Haar-uniform directions and judge constancy.

    is_constant iff (global max - min) <= tol; constant_value is the
    midpoint when constant.  Failures are annotated with the failing point.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    if pts.shape[0] < 2:
        raise InputError("need at least 2 points for a constancy verdict")
    if directions_per_point < 8:
        raise InputError("need at least 8 directions per point")
    m = model.dimension
    mins = np.empty(pts.shape[0])
    maxs = np.empty(pts.shape[0])
    for i, p in enumerate(pts):
        rng = _direction_rng(seed, i)
        dirs = rng.standard_normal((directions_per_point, m)) + 1j * rng.standard_normal(
            (directions_per_point, m)
        )
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        try:
            sample = metric_at(model, p, settings)
            curv = curvature_from_sample(sample, settings)
            values = [hsc_from_sample(sample, curv, v) for v in dirs]
        except DegenerateMetricError as exc:
            raise DegenerateMetricError(
                f"at point index {i} ({p}): {exc}", exc.smallest_eigenvalue
            ) from exc
        except BergkitError as exc:
            raise NumericsError(f"at point index {i} ({p}): {exc}") from exc
        mins[i] = min(values)
        maxs[i] = max(values)
    deviation = float(maxs.max() - mins.min())
    constant = deviation <= tol
    return CurvatureReport(
        points=pts,
        hsc_min=mins,
        hsc_max=maxs,
        is_constant=constant,
        constant_value=float(0.5 * (maxs.max() + mins.min())) if constant else None,
        max_deviation=deviation,
        tolerance=tol,
    )

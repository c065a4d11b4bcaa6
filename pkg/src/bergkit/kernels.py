"""Evaluatable diagonal Bergman kernels for the model domains.

Kernels are represented on the diagonal only, as functions of the squared
moduli.  `log_kernel` evaluates log K(z, zbar) including the normalization
constant; `potential` drops the additive constant (the metric ignores it,
and smaller magnitudes reduce roundoff inside derivative stencils).

All evaluators are vectorized: points have shape (N, dimension), complex.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .domains import Ball, ModelPotential, Sliver
from .errors import EvaluationDomainError, InputError, KernelAssemblyError
from .moments import MomentTable, MultiIndex, Verdict, mi, multi_indices
from .profiles import AffineLogTerm, HartogsLogTerm, LinearTerm, SigmaProfile, log_derivatives


class KernelModel:
    """Base class: a diagonal kernel with an evaluatable log."""

    dimension: int
    constant: float  # additive constant of log K, dropped by `potential`

    def potential(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_kernel(self, pts: np.ndarray) -> np.ndarray:
        return self.potential(pts) + self.constant

    def valid(self, pts: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside the evaluation domain."""
        return np.ones(pts.shape[0], dtype=bool)

    def sigma_profile(self) -> SigmaProfile | None:
        """Exact-derivative profile, when the model structure supports one."""
        return None

    def tail_bound(self, pts: np.ndarray) -> np.ndarray:
        """Absolute truncation bound on log K (zero for closed forms)."""
        return np.zeros(pts.shape[0])


def _as_points(model: KernelModel, pts) -> np.ndarray:
    arr = np.asarray(pts, dtype=complex)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != model.dimension:
        raise InputError(
            f"points must have shape (N, {model.dimension}), got {arr.shape}"
        )
    return arr


def eval_log_kernel(model: KernelModel, point) -> float:
    """log K at a single point, with an explicit evaluation-domain check."""
    pts = _as_points(model, point)
    if not model.valid(pts).all():
        raise EvaluationDomainError(
            f"point {np.asarray(point)} outside the evaluation domain of {model!r}"
        )
    return float(model.log_kernel(pts)[0])


class MonomialSeriesKernel(KernelModel):
    """Orthonormal-monomial series K_N = sum |z^a|^2 / moment(a), deg a <= N."""

    def __init__(self, table: MomentTable, truncation: int):
        if truncation < 0:
            raise InputError(f"truncation must be >= 0, got {truncation}")
        self.dimension = table.domain.dimension
        self.truncation = truncation
        self.table = table
        wanted = multi_indices(self.dimension, truncation)
        missing = [i for i in wanted if i not in table.entries]
        if missing:
            raise KernelAssemblyError(
                f"moment table lacks verdicts for degree <= {truncation}: "
                f"missing {missing[0].entries}"
            )
        terms = [
            (idx, 1.0 / table.entries[idx].value)
            for idx in wanted
            if table.entries[idx].verdict is Verdict.CONVERGENT
        ]
        if not terms:
            raise KernelAssemblyError(
                "no convergent moments up to the truncation degree; the "
                "Bergman space is trivial at this truncation and cannot be modelled"
            )
        terms.sort(key=lambda t: (t[0].degree, t[0].entries))
        self.exponents = np.array([list(idx.entries) for idx, _ in terms])
        self.coefficients = np.array([c for _, c in terms])
        self.indices = [idx for idx, _ in terms]
        # Reference scale: the lowest-degree coefficient, factored out of the
        # logarithm so the potential stays O(1) near the origin.
        self.constant = math.log(self.coefficients[0])

    def potential(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        sq = np.abs(pts) ** 2
        terms = np.prod(sq[:, None, :] ** self.exponents[None, :, :], axis=2)
        rel = self.coefficients / self.coefficients[0]
        return np.log(terms @ rel)

    def valid(self, pts: np.ndarray) -> np.ndarray:
        sq = np.abs(np.atleast_2d(pts)) ** 2
        terms = np.prod(sq[:, None, :] ** self.exponents[None, :, :], axis=2)
        return (terms @ self.coefficients) > 0

    def sigma_profile(self) -> SigmaProfile | None:
        if any(idx.degree > 1 for idx in self.indices):
            return None
        offset = 0.0
        weights = [0.0] * self.dimension
        for idx, c in zip(self.indices, self.coefficients / self.coefficients[0]):
            if idx.degree == 0:
                offset = c
            else:
                weights[list(idx.entries).index(1)] = c
        return SigmaProfile((AffineLogTerm(1.0, offset, tuple(weights)),))


def assemble_series(table: MomentTable, truncation: int) -> MonomialSeriesKernel:
    """Kernel series from a moment table (divergent indices contribute nothing)."""
    return MonomialSeriesKernel(table, truncation)


class BallKernel(KernelModel):
    """Unit-ball kernel: K = n!/pi^n * (1-|z|^2)^-(n+1)."""

    def __init__(self, n: int):
        self.spec = Ball(n)
        self.dimension = n
        # metric-irrelevant normalization (additive constant in log K)
        self.constant = math.log(math.factorial(n) / math.pi**n)

    def potential(self, pts: np.ndarray) -> np.ndarray:
        t = (np.abs(np.atleast_2d(pts)) ** 2).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return -(self.dimension + 1) * np.log1p(-t)

    def valid(self, pts: np.ndarray) -> np.ndarray:
        return (np.abs(np.atleast_2d(pts)) ** 2).sum(axis=1) < 1.0

    def sigma_profile(self) -> SigmaProfile:
        m = self.dimension
        return SigmaProfile(
            (AffineLogTerm(-(m + 1.0), 1.0, (-1.0,) * m),)
        )


@lru_cache(maxsize=16)
def eulerian_polynomial(k: int) -> tuple[int, ...]:
    """Coefficients of the k-th Eulerian polynomial (ascending powers)."""
    if k < 1:
        raise InputError("k must be >= 1")
    row = [1]
    for n in range(2, k + 1):
        prev = row + [0]
        row = [(j + 1) * prev[j] + (n - j) * prev[j - 1] for j in range(n)]
        row = row[: n - 1] if row[-1] == 0 else row
    return tuple(row)


def _polyval_derivs(coeffs: np.ndarray, u: float, orders: int = 4) -> list[float]:
    vals = []
    c = np.asarray(coeffs, dtype=float)
    powers = np.arange(c.size)
    for k in range(orders + 1):
        if c.size == 0:
            vals.append(0.0)
            continue
        vals.append(float(np.polynomial.polynomial.polyval(u, c)))
        c = c[1:] * powers[1 : c.size]
    return vals


class HartogsGaussKernel(KernelModel):
    """Gauss-weighted Hartogs kernel, summed in closed form.

    The orthonormal series sums to
        K = exp(|z|^2)/pi^(n+1) * A_{n+1}(u) / (1-u)^(n+2),  u = exp(|z|^2)|w|^2,
    with A_k the k-th Eulerian polynomial (for n = 1 this is the familiar
    (1+u)/(1-u)^3 factor).  Valid on u < 1, i.e. on the domain itself.
    """

    def __init__(self, n: int):
        if n < 1:
            raise InputError(f"base dimension must be >= 1, got {n}")
        self.n = n
        self.dimension = n + 1
        self.constant = -(n + 1) * math.log(math.pi)
        self._euler = np.asarray(eulerian_polynomial(n + 1), dtype=float)

    def _u(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        sq = np.abs(np.atleast_2d(pts)) ** 2
        t = sq[:, :-1].sum(axis=1)
        return t, np.exp(t) * sq[:, -1]

    def potential(self, pts: np.ndarray) -> np.ndarray:
        t, u = self._u(pts)
        a = np.polynomial.polynomial.polyval(u, self._euler)
        with np.errstate(invalid="ignore", divide="ignore"):
            return t + np.log(a) - (self.n + 2) * np.log1p(-u)

    def valid(self, pts: np.ndarray) -> np.ndarray:
        return self._u(pts)[1] < 1.0

    def _log_series_derivs(self, u: float) -> tuple[float, float, float, float]:
        a = _polyval_derivs(self._euler, u)
        l_poly = log_derivatives(a)
        k = self.n + 2
        one = 1.0 - u
        return (
            l_poly[0] + k / one,
            l_poly[1] + k / one**2,
            l_poly[2] + 2.0 * k / one**3,
            l_poly[3] + 6.0 * k / one**4,
        )

    def sigma_profile(self) -> SigmaProfile:
        return SigmaProfile(
            (
                LinearTerm((1.0,) * self.n + (0.0,)),
                HartogsLogTerm(self.n, self._log_series_derivs),
            )
        )


class HartogsGaussSeriesKernel(KernelModel):
    """Truncated Hartogs series sum_{p<=N} (p+1)^(n+1) u^p, with tail control."""

    def __init__(self, n: int, truncation: int):
        if n < 1 or truncation < 0:
            raise InputError("need n >= 1 and truncation >= 0")
        self.n = n
        self.truncation = truncation
        self.dimension = n + 1
        self.constant = -(n + 1) * math.log(math.pi)
        p = np.arange(truncation + 1, dtype=float)
        self._coeffs = (p + 1.0) ** (n + 1)

    def _u(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        sq = np.abs(np.atleast_2d(pts)) ** 2
        t = sq[:, :-1].sum(axis=1)
        return t, np.exp(t) * sq[:, -1]

    def potential(self, pts: np.ndarray) -> np.ndarray:
        t, u = self._u(pts)
        return t + np.log(np.polynomial.polynomial.polyval(u, self._coeffs))

    def valid(self, pts: np.ndarray) -> np.ndarray:
        return self._u(pts)[1] < 1.0

    def tail_bound(self, pts: np.ndarray) -> np.ndarray:
        """Dropped-tail bound on the series factor (relative to the partial sum).

        sum_{p>N} (p+1)^(n+1) u^p <= (N+2)^(n+1) u^(N+1) / (1-u)^(n+2).
        """
        _, u = self._u(pts)
        if np.any(u >= 1.0):
            raise EvaluationDomainError("tail bound requires u < 1")
        partial = np.polynomial.polynomial.polyval(u, self._coeffs)
        tail = (
            (self.truncation + 2.0) ** (self.n + 1)
            * u ** (self.truncation + 1)
            / (1.0 - u) ** (self.n + 2)
        )
        return tail / partial

    def _log_series_derivs(self, u: float) -> tuple[float, float, float, float]:
        return log_derivatives(_polyval_derivs(self._coeffs, u))

    def sigma_profile(self) -> SigmaProfile:
        return SigmaProfile(
            (
                LinearTerm((1.0,) * self.n + (0.0,)),
                HartogsLogTerm(self.n, self._log_series_derivs),
            )
        )


def auto_truncation(n: int, u_max: float, rel_tol: float = 1e-12, cap: int = 500) -> int:
    """Smallest N whose relative tail bound at u_max is below rel_tol (capped)."""
    if not 0.0 <= u_max < 1.0:
        raise EvaluationDomainError(f"u_max must lie in [0, 1), got {u_max}")
    if u_max == 0.0:
        return 0
    for trunc in range(cap + 1):
        model = HartogsGaussSeriesKernel(n, trunc)
        probe = np.zeros((1, n + 1), dtype=complex)
        probe[0, -1] = math.sqrt(u_max)
        if model.tail_bound(probe)[0] < rel_tol:
            return trunc
    return cap


def truncation_error_bound(model: HartogsGaussSeriesKernel, point) -> float:
    """Relative truncation bound of a Hartogs series kernel at one point."""
    if not isinstance(model, HartogsGaussSeriesKernel):
        raise InputError("truncation bounds apply to Hartogs series kernels")
    return float(model.tail_bound(_as_points(model, point))[0])


class SliverAffineKernel(KernelModel):
    """Three-term sliver kernel K = c0 (1 + c1 |z|^2 + c1 |w|^2)."""

    def __init__(self, c0: float, c1: float):
        if c0 <= 0 or c1 <= 0:
            raise InputError("kernel constants must be positive")
        self.c0 = c0
        self.c1 = c1
        self.dimension = 2
        self.constant = math.log(c0)

    def potential(self, pts: np.ndarray) -> np.ndarray:
        t = (np.abs(np.atleast_2d(pts)) ** 2).sum(axis=1)
        return np.log1p(self.c1 * t)

    def sigma_profile(self) -> SigmaProfile:
        return SigmaProfile((AffineLogTerm(1.0, 1.0, (self.c1, self.c1)),))


class ModelPotentialKernel(KernelModel):
    """Metric-level model: log K is the model potential itself."""

    def __init__(self, spec: ModelPotential):
        self.spec = spec
        self.dimension = spec.dimension
        self.constant = 0.0

    def potential(self, pts: np.ndarray) -> np.ndarray:
        t = (np.abs(np.atleast_2d(pts)) ** 2).sum(axis=1)
        if self.spec.kind == "fubini_study":
            return self.spec.scale * np.log1p(t)
        if self.spec.kind == "hyperbolic":
            with np.errstate(invalid="ignore", divide="ignore"):
                return -self.spec.scale * np.log1p(-t)
        return self.spec.scale * t

    def valid(self, pts: np.ndarray) -> np.ndarray:
        if self.spec.kind != "hyperbolic":
            return np.ones(np.atleast_2d(pts).shape[0], dtype=bool)
        return (np.abs(np.atleast_2d(pts)) ** 2).sum(axis=1) < 1.0

    def sigma_profile(self) -> SigmaProfile:
        m = self.dimension
        s = self.spec.scale
        if self.spec.kind == "fubini_study":
            return SigmaProfile((AffineLogTerm(s, 1.0, (1.0,) * m),))
        if self.spec.kind == "hyperbolic":
            return SigmaProfile((AffineLogTerm(-s, 1.0, (-1.0,) * m),))
        return SigmaProfile((LinearTerm((s,) * m),))


def sliver_affine_from_moments(moment_00: float, moment_10: float) -> SliverAffineKernel:
    """Kernel constants from the volume and degree-1 moment: c0 = 1/M(0,0),
    c1 = 1/(c0 M(1,0))."""
    c0 = 1.0 / moment_00
    return SliverAffineKernel(c0=c0, c1=moment_00 / moment_10)


def canonical_model(spec, settings=None, truncation: int = 60) -> KernelModel:
    """Default kernel model for a domain spec (used by the CLI).

    Sliver specs run the moment pipeline to get (c0, c1); Hartogs and ball
    specs use their closed forms; model potentials evaluate directly.
    """
    from .moments import QuadratureSettings, moment_quadrature

    if isinstance(spec, Sliver):
        qs = settings or QuadratureSettings()
        m00 = moment_quadrature(spec, mi(0, 0), qs).value
        m10 = moment_quadrature(spec, mi(1, 0), qs).value
        return sliver_affine_from_moments(m00, m10)
    if isinstance(spec, Ball):
        return BallKernel(spec.n)
    if isinstance(spec, ModelPotential):
        return ModelPotentialKernel(spec)
    return HartogsGaussKernel(spec.n)

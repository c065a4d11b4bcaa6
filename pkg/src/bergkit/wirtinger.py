"""Batched finite-difference Wirtinger calculus.

Potentials are real-valued functions of points in C^m, evaluated in batches:
``potential(zs)`` with ``zs`` of shape (N, m) complex must return shape (N,)
floats.  Derivatives are taken in the 2m real coordinates (x_1..x_m,
y_1..y_m with z_j = x_j + i*y_j) with tensor products of 1-D central
stencils, then combined into Wirtinger tensors via

    d/dz_j  = (d/dx_j - i d/dy_j) / 2,    d/dzbar_j = (d/dx_j + i d/dy_j) / 2.

Numerical constraints that shaped this module:

* Stencil weights are computed exactly (Fornberg's recurrence over
  `fractions.Fraction`), so the only FD errors are truncation and roundoff.
* All mixed partials of a given order share one set of evaluation points;
  the engine dedupes them and calls the potential once per step size, which
  keeps a full metric/curvature derivative bundle at ~10^4 potential values.
* Each partial is computed at steps h and h/2 and Richardson-extrapolated;
  the pair difference doubles as the truncation-error estimate.
* Fourth derivatives in float64 force h well above the usual sqrt(eps)
  scales: roundoff grows like eps/h^4, so the default step lives in
  `geometry` (0.05) rather than anything smaller.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import StencilError

Potential = Callable[[np.ndarray], np.ndarray]


def _fornberg(offsets: tuple[int, ...], max_order: int) -> list[list[Fraction]]:
    # Weights for derivative orders 0..max_order at x0 = 0 on integer nodes.
    # B. Fornberg's recurrence, run in exact rational arithmetic.
    n = len(offsets)
    c = [[Fraction(0)] * n for _ in range(max_order + 1)]
    c[0][0] = Fraction(1)
    c1 = Fraction(1)
    c4 = Fraction(offsets[0])
    for i in range(1, n):
        mn = min(i, max_order)
        c2 = Fraction(1)
        c5 = c4
        c4 = Fraction(offsets[i])
        for j in range(i):
            c3 = Fraction(offsets[i] - offsets[j])
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2
            for k in range(mn, 0, -1):
                c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3
            c[0][j] = c4 * c[0][j] / c3
        c1 = c2
    return c


@lru_cache(maxsize=None)
def central_stencil(deriv_order: int, accuracy: int) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """Offsets and weights of the central stencil for one 1-D derivative.

    `accuracy` is the truncation order p (error O(h^p), p even).  Weights are
    exact rationals converted to float; zero weights (the centre node of odd
    orders) are dropped.
    """
    if deriv_order < 1:
        raise ValueError("derivative order must be >= 1")
    if accuracy < 2 or accuracy % 2:
        raise ValueError("accuracy must be a positive even integer")
    reach = (deriv_order + 1) // 2 + accuracy // 2 - 1
    offsets = tuple(range(-reach, reach + 1))
    weights = _fornberg(offsets, deriv_order)[deriv_order]
    keep = [(o, float(w)) for o, w in zip(offsets, weights) if w != 0]
    return tuple(o for o, _ in keep), tuple(w for _, w in keep)


@dataclass(frozen=True)
class _Plan:
    m: int
    accuracy: int
    center: int
    half_offsets: np.ndarray  # (P, 2m) int, displacements in units of h/2
    partials: dict  # axes tuple -> ((idx_h, w_h), (idx_h2, w_h2))


@lru_cache(maxsize=None)
def _plan(m: int, orders: tuple[int, ...], accuracy: int) -> _Plan:
    naxes = 2 * m
    index: dict[tuple[int, ...], int] = {}

    def idx_of(vec: tuple[int, ...]) -> int:
        i = index.get(vec)
        if i is None:
            i = len(index)
            index[vec] = i
        return i

    center = idx_of((0,) * naxes)
    partials: dict[tuple[int, ...], tuple] = {}
    for order in orders:
        for axes in itertools.combinations_with_replacement(range(naxes), order):
            counts = sorted(Counter(axes).items())
            stencils = [(ax, central_stencil(c, accuracy)) for ax, c in counts]
            per_scale = []
            for units in (2, 1):
                idxs, wts = [], []
                for combo in itertools.product(
                    *[list(zip(offs, ws)) for _, (offs, ws) in stencils]
                ):
                    vec = [0] * naxes
                    w = 1.0
                    for (ax, _), (off, wval) in zip(stencils, combo):
                        vec[ax] = off * units
                        w *= wval
                    idxs.append(idx_of(tuple(vec)))
                    wts.append(w)
                per_scale.append((np.asarray(idxs), np.asarray(wts)))
            partials[axes] = tuple(per_scale)
    offsets = np.zeros((len(index), naxes), dtype=np.int64)
    for vec, i in index.items():
        offsets[i] = vec
    return _Plan(m=m, accuracy=accuracy, center=center, half_offsets=offsets, partials=partials)


def _real_partials(potential: Potential, point: np.ndarray, step: float, plan: _Plan) -> dict:
    m = plan.m
    x0 = np.concatenate([point.real, point.imag])
    pts = x0[None, :] + (0.5 * step) * plan.half_offsets
    zs = pts[:, :m] + 1j * pts[:, m:]
    vals = np.asarray(potential(zs), dtype=float)
    if vals.shape != (zs.shape[0],):
        raise StencilError(
            f"potential returned shape {vals.shape}, expected ({zs.shape[0]},)"
        )
    finite = np.isfinite(vals)
    if not finite.all():
        raise StencilError(
            "non-finite potential value inside stencil", point=zs[~finite][0]
        )
    # Subtracting the centre value reduces cancellation in the weighted sums;
    # stencil weights of any derivative order annihilate constants exactly.
    dv = vals - vals[plan.center]
    gain = float(2 ** plan.accuracy)
    out = {}
    for axes, ((i1, w1), (i2, w2)) in plan.partials.items():
        k = len(axes)
        d_h = (dv[i1] @ w1) / step**k
        d_h2 = (dv[i2] @ w2) / (0.5 * step) ** k
        extrap = (gain * d_h2 - d_h) / (gain - 1.0)
        out[axes] = (extrap, abs(d_h2 - d_h) / (gain - 1.0))
    return out


def _wirtinger_entry(partials: dict, m: int, slots) -> tuple[complex, float]:
    # slots: sequence of (coordinate index, conjugate flag)
    options = []
    for idx, bar in slots:
        options.append(((idx, 0.5 + 0j), (idx + m, 0.5j if bar else -0.5j)))
    total = 0j
    err = 0.0
    for combo in itertools.product(*options):
        axes = tuple(sorted(ax for ax, _ in combo))
        coeff = 1.0 + 0j
        for _, c in combo:
            coeff *= c
        d, e = partials[axes]
        total += coeff * d
        err += abs(coeff) * e
    return total, err


@dataclass
class DerivativeBundle:
    """Metric-level Wirtinger derivatives of a potential at one point.

    g[i,j]       = d^2 u / dz_i dzbar_j
    dg[i,j,k]    = d g[i,j] / dz_k
    ddg[i,j,k,l] = d^2 g[i,j] / dz_k dzbar_l

    err_* are truncation-error estimates from the Richardson pairs (zero for
    the exact chain-rule path in `geometry`).
    """

    point: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray
    err_g: float
    err_dg: float
    err_ddg: float


def wirtinger_hessian(
    potential: Potential, point, step: float, accuracy: int = 6
) -> np.ndarray:
    """Complex Hessian d^2 u / dz_i dzbar_j of a real potential (Hermitian)."""
    g, _ = wirtinger_hessian_with_error(potential, point, step, accuracy)
    return g


def wirtinger_hessian_with_error(
    potential: Potential, point, step: float, accuracy: int = 6
) -> tuple[np.ndarray, float]:
    point = np.asarray(point, dtype=complex).reshape(-1)
    m = point.size
    plan = _plan(m, (2,), accuracy)
    partials = _real_partials(potential, point, step, plan)
    g = np.empty((m, m), dtype=complex)
    err = 0.0
    for i in range(m):
        for j in range(m):
            g[i, j], e = _wirtinger_entry(partials, m, [(i, False), (j, True)])
            err = max(err, e)
    return g, err


def laplacian(potential: Potential, point, step: float, accuracy: int = 6) -> float:
    """Real Laplacian; uses Delta u = 4 * trace of the complex Hessian."""
    g, _ = wirtinger_hessian_with_error(potential, point, step, accuracy)
    return float(4.0 * np.trace(g).real)


def derivative_bundle(
    potential: Potential, point, step: float, accuracy: int = 6
) -> DerivativeBundle:
    """Full bundle (g, dg, ddg) needed for the curvature tensor."""
    point = np.asarray(point, dtype=complex).reshape(-1)
    m = point.size
    plan = _plan(m, (2, 3, 4), accuracy)
    partials = _real_partials(potential, point, step, plan)

    g = np.empty((m, m), dtype=complex)
    dg = np.empty((m, m, m), dtype=complex)
    ddg = np.empty((m, m, m, m), dtype=complex)
    err_g = err_dg = err_ddg = 0.0
    for i in range(m):
        for j in range(m):
            g[i, j], e = _wirtinger_entry(partials, m, [(i, False), (j, True)])
            err_g = max(err_g, e)
            for k in range(m):
                dg[i, j, k], e = _wirtinger_entry(
                    partials, m, [(i, False), (j, True), (k, False)]
                )
                err_dg = max(err_dg, e)
                for l in range(m):
                    ddg[i, j, k, l], e = _wirtinger_entry(
                        partials, m, [(i, False), (j, True), (k, False), (l, True)]
                    )
                    err_ddg = max(err_ddg, e)
    return DerivativeBundle(
        point=point, g=g, dg=dg, ddg=ddg, err_g=err_g, err_dg=err_dg, err_ddg=err_ddg
    )

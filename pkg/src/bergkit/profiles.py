"""Exact chain-rule derivative profiles for potentials of the moduli.

Every kernel model in this toolkit is a function of the squared moduli
sigma_j = |z_j|^2 only.  For such potentials the Wirtinger tensors follow
from the sigma-partials by a closed chain rule (see `geometry.exact_bundle`),
so a model can expose a profile — a sum of terms, each knowing its own
mixed sigma-partials — and get machine-precision derivatives to cross-check
the finite-difference path.

Terms implement ``partial(axes, sigma) -> float``: the mixed partial
d^k F / d sigma_{axes[0]} .. d sigma_{axes[k-1]} at the point with squared
moduli ``sigma`` (axes is a sorted multiset; k from 1 to 4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class LinearTerm:
    """sum_j weights[j] * sigma_j."""

    weights: tuple[float, ...]

    def partial(self, axes: tuple[int, ...], sigma: np.ndarray) -> float:
        if len(axes) == 1:
            return self.weights[axes[0]]
        return 0.0


@dataclass(frozen=True)
class AffineLogTerm:
    """coef * log(offset + sum_j weights[j] * sigma_j)."""

    coef: float
    offset: float
    weights: tuple[float, ...]

    def partial(self, axes: tuple[int, ...], sigma: np.ndarray) -> float:
        k = len(axes)
        p = self.offset + float(np.dot(self.weights, sigma))
        prod = math.prod(self.weights[a] for a in axes)
        return self.coef * (-1.0) ** (k - 1) * math.factorial(k - 1) * prod / p**k


def log_derivatives(s: Sequence[float]) -> tuple[float, float, float, float]:
    """First four derivatives of log S from S and its derivatives S'..S''''."""
    s0, s1, s2, s3, s4 = s
    l1 = s1 / s0
    l2 = s2 / s0 - l1 * l1
    l3 = s3 / s0 - 3.0 * l1 * l2 - l1**3
    l4 = s4 / s0 - 4.0 * l1 * l3 - 3.0 * l2 * l2 - 6.0 * l1 * l1 * l2 - l1**4
    return l1, l2, l3, l4


@dataclass(frozen=True)
class HartogsLogTerm:
    """L(u) with u = exp(t) * s, t = sum of the first `base` moduli, s the last.

    `log_series_derivs(u)` must return (L'(u), ..., L''''(u)).  The mixed
    (t, s)-partials below follow from u_t = u, u_s = exp(t); they are what
    the exp-scaled fibre variable contributes on top of the base metric.
    """

    base: int
    log_series_derivs: Callable[[float], tuple[float, float, float, float]]

    def partial(self, axes: tuple[int, ...], sigma: np.ndarray) -> float:
        q = sum(1 for a in axes if a == self.base)
        p = len(axes) - q
        t = float(sigma[: self.base].sum())
        s = float(sigma[self.base])
        et = math.exp(t)
        u = et * s
        l1, l2, l3, l4 = self.log_series_derivs(u)
        table = {
            (1, 0): l1 * u,
            (0, 1): l1 * et,
            (2, 0): l2 * u * u + l1 * u,
            (1, 1): et * (l2 * u + l1),
            (0, 2): l2 * et * et,
            (3, 0): l3 * u**3 + 3.0 * l2 * u * u + l1 * u,
            (2, 1): et * (l3 * u * u + 3.0 * l2 * u + l1),
            (1, 2): et * et * (l3 * u + 2.0 * l2),
            (0, 3): l3 * et**3,
            (4, 0): l4 * u**4 + 6.0 * l3 * u**3 + 7.0 * l2 * u * u + l1 * u,
            (3, 1): et * (l4 * u**3 + 6.0 * l3 * u * u + 7.0 * l2 * u + l1),
            (2, 2): et * et * (l4 * u * u + 5.0 * l3 * u + 4.0 * l2),
            (1, 3): et**3 * (l4 * u + 3.0 * l3),
            (0, 4): l4 * et**4,
        }
        return table[(p, q)]


@dataclass(frozen=True)
class SigmaProfile:
    """Sum of terms; the exact-path derivative source of a kernel model."""

    terms: tuple

    def partial(self, axes: tuple[int, ...], sigma: np.ndarray) -> float:
        return sum(term.partial(axes, sigma) for term in self.terms)

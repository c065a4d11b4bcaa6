"""Model domains: membership tests, the sliver shadow strip, interior sampling.

Four families of specs are supported.  `Ball` and `HartogsGauss` are genuine
domains with Bergman spaces; `Sliver` is the thin Reinhardt neighbourhood of
the cone |w| = |z| whose Bergman space is three-dimensional; `ModelPotential`
is a metric-level model (a Kaehler potential without an underlying volume).

Complex points are numpy arrays (or sequences) of length ``spec.dimension``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, SamplingError

MODEL_KINDS = ("fubini_study", "hyperbolic", "euclidean")

#: Default radius caps for unbounded specs, so downstream series and
#: derivative stencils stay well conditioned.
SLIVER_BOX_RADIUS = 3.0
HARTOGS_BOX_RADIUS = 2.0
FUBINI_STUDY_BOX_RADIUS = 0.5
EUCLIDEAN_BOX_RADIUS = 1.0

DEFAULT_MARGIN = 0.8

_REJECTION_BATCH = 4096
_REJECTION_MAX_BATCHES = 500


@dataclass(frozen=True)
class Ball:
    """Unit ball in C^n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"ball dimension must be >= 1, got {self.n}")

    @property
    def dimension(self) -> int:
        return self.n


@dataclass(frozen=True)
class Sliver:
    """Thin Reinhardt domain { (z,w) in C^2 : ||w|^2-|z|^2| < (1+|z|^2+|w|^2)^-alpha }.

    The exponent must lie strictly inside (2, 3); at the endpoints the
    degree-1 / degree-2 integrability split that makes this domain useful
    is not settled, so construction rejects them.
    """

    alpha: float

    def __post_init__(self):
        if not (2.0 < self.alpha < 3.0):
            raise InputError(
                f"sliver exponent must lie strictly inside (2, 3), got {self.alpha}"
            )

    @property
    def dimension(self) -> int:
        return 2


@dataclass(frozen=True)
class HartogsGauss:
    """Hartogs domain { (z,w) in C^n x C : |w|^2 < exp(-|z|^2) }."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"Hartogs base dimension must be >= 1, got {self.n}")

    @property
    def dimension(self) -> int:
        return self.n + 1


@dataclass(frozen=True)
class ModelPotential:
    """Metric-level model potential on a chart of C^n.

    kind 'fubini_study' : scale * log(1 + |z|^2)
    kind 'hyperbolic'   : -scale * log(1 - |z|^2), chart |z| < 1
    kind 'euclidean'    : scale * |z|^2
    """

    kind: str
    scale: float
    n: int

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise InputError(f"unknown model potential kind {self.kind!r}")
        if self.scale <= 0:
            raise InputError(f"model potential scale must be > 0, got {self.scale}")
        if self.n < 1:
            raise InputError(f"model dimension must be >= 1, got {self.n}")

    @property
    def dimension(self) -> int:
        return self.n


DomainSpec = Ball | Sliver | HartogsGauss | ModelPotential


def _as_point(spec: DomainSpec, point) -> np.ndarray:
    p = np.asarray(point, dtype=complex)
    if p.shape != (spec.dimension,):
        raise InputError(
            f"point arity {p.shape} does not match spec dimension {spec.dimension}"
        )
    return p


def membership_slack(spec: DomainSpec, point) -> float:
    """Ratio LHS/RHS of the defining inequality (< 1 means inside).

    For specs without a constraint (Fubini-Study / Euclidean charts) the
    slack is 0.  Used both by `contains` (slack < 1) and by margin-aware
    interior sampling (slack < margin).
    """
    p = _as_point(spec, point)
    sq = np.abs(p) ** 2
    if isinstance(spec, Ball):
        return float(sq.sum())
    if isinstance(spec, Sliver):
        x, y = sq
        return float(abs(y - x) * (1.0 + x + y) ** spec.alpha)
    if isinstance(spec, HartogsGauss):
        return float(sq[-1] * math.exp(sq[:-1].sum()))
    if spec.kind == "hyperbolic":
        return float(sq.sum())
    return 0.0


def contains(spec: DomainSpec, point) -> bool:
    """True iff the defining strict inequality holds at `point`."""
    return membership_slack(spec, point) < 1.0


@dataclass(frozen=True)
class ShadowStrip:
    """Section of the sliver's Reinhardt shadow at fixed t = |z|^2.

    With y = |w|^2 and u = y - t, the shadow section is u in (u_minus, u_plus).
    `clipped` is set when the constraint y >= 0 forced u_minus = -t.
    """

    t: float
    u_minus: float
    u_plus: float
    clipped: bool

    @property
    def width(self) -> float:
        return self.u_plus - self.u_minus


def _bisect_increasing(f, lo: float, hi: float, tol: float) -> float:
    # f must be strictly increasing with f(lo) < 0 < f(hi).
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def shadow_strip(spec: Sliver, t: float, tol: float = 1e-14) -> ShadowStrip:
    """Solve the shadow-section bounds at t = |z|^2 by bisection.

    u_plus is the unique root of u = (1+2t+u)^-alpha on (0, 1]; u_minus is
    max(-t, root of u = -(1+2t+u)^-alpha).  Both fixed-point maps are
    strictly monotone on the bracket, so bisection cannot fail.
    """
    if t < 0:
        raise InputError(f"t must be >= 0, got {t}")
    if tol <= 0:
        raise InputError(f"tol must be > 0, got {tol}")
    a = spec.alpha
    base = 1.0 + 2.0 * t

    u_plus = _bisect_increasing(lambda u: u - (base + u) ** (-a), 0.0, 1.0, tol)

    lo = -min(t, 1.0)
    if lo == 0.0 or (lo + (base + lo) ** (-a)) >= 0.0:
        # The whole range y in [0, t) satisfies the inequality: clipped at y = 0.
        return ShadowStrip(t=t, u_minus=-t, u_plus=u_plus, clipped=True)
    u_minus = _bisect_increasing(lambda u: u + (base + u) ** (-a), lo, 0.0, tol)
    return ShadowStrip(t=t, u_minus=u_minus, u_plus=u_plus, clipped=False)


def _unit_vectors(rng, count: int, m: int) -> np.ndarray:
    v = rng.standard_normal((count, m)) + 1j * rng.standard_normal((count, m))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return v / norms


def _rng(seed: int) -> np.random.Generator:
    # Counter-based generator so draws are reproducible across platforms.
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def sample_interior(
    spec: DomainSpec,
    count: int,
    seed: int,
    margin: float = DEFAULT_MARGIN,
    box_radius: float | None = None,
) -> np.ndarray:
    """Deterministic interior points with margin slack.

    Every returned point satisfies the defining inequality with slack factor
    >= margin (`membership_slack` < margin), so that derivative stencils
    reaching away from the point stay inside the domain.  Points of unbounded
    specs are capped by `box_radius` (per-spec defaults) so downstream series
    converge.

    Returns an array of shape (count, spec.dimension), complex.
    """
    if count < 1:
        raise InputError(f"count must be >= 1, got {count}")
    if not (0.0 < margin < 1.0):
        raise InputError(f"margin must lie in (0, 1), got {margin}")
    rng = _rng(seed)

    if isinstance(spec, Ball) or (
        isinstance(spec, ModelPotential) and spec.kind == "hyperbolic"
    ):
        radius = 1.0 - margin if box_radius is None else min(box_radius, 1.0 - margin)
        m = spec.dimension
        r = radius * rng.random(count) ** (1.0 / (2 * m))
        return _unit_vectors(rng, count, m) * r[:, None]

    if isinstance(spec, ModelPotential):
        if box_radius is None:
            box_radius = (
                FUBINI_STUDY_BOX_RADIUS
                if spec.kind == "fubini_study"
                else EUCLIDEAN_BOX_RADIUS
            )
        m = spec.dimension
        r = box_radius * rng.random(count) ** (1.0 / (2 * m))
        return _unit_vectors(rng, count, m) * r[:, None]

    if isinstance(spec, HartogsGauss):
        box = HARTOGS_BOX_RADIUS if box_radius is None else box_radius
        n = spec.n
        # z uniform in a polydisc keeping |z| <= box; |w|^2 = v*margin*exp(-|z|^2)
        # is inside by construction with the required slack.
        r = (box / math.sqrt(n)) * np.sqrt(rng.random((count, n)))
        phases = np.exp(2j * np.pi * rng.random((count, n)))
        z = r * phases
        t = (np.abs(z) ** 2).sum(axis=1)
        wsq = rng.random(count) * margin * np.exp(-t)
        w = np.sqrt(wsq) * np.exp(2j * np.pi * rng.random(count))
        return np.concatenate([z, w[:, None]], axis=1)

    if isinstance(spec, Sliver):
        box = SLIVER_BOX_RADIUS if box_radius is None else box_radius
        a = spec.alpha
        xmax = box * box
        out = []
        need = count
        for _ in range(_REJECTION_MAX_BATCHES):
            x = rng.random(_REJECTION_BATCH) * xmax
            halfwidth = (1.0 + 2.0 * x) ** (-a) * 2.0**a
            u = (2.0 * rng.random(_REJECTION_BATCH) - 1.0) * halfwidth
            y = x + u
            ok = (y >= 0) & (y <= xmax)
            ok &= np.abs(u) * np.maximum(1.0 + x + y, 1e-9) ** a < margin
            x, y = x[ok], y[ok]
            ph = np.exp(2j * np.pi * rng.random((x.size, 2)))
            pts = np.stack([np.sqrt(x), np.sqrt(y)], axis=1) * ph
            out.append(pts[:need])
            need -= min(need, pts.shape[0])
            if need == 0:
                return np.concatenate(out, axis=0)
        raise SamplingError(
            f"rejection sampling exceeded its iteration cap for {spec!r}"
        )

    raise InputError(f"unsupported spec {spec!r}")  # pragma: no cover


def spec_to_json(spec: DomainSpec) -> dict:
    """JSON object form of a domain spec (see `spec_from_json`)."""
    if isinstance(spec, Ball):
        return {"type": "ball", "n": spec.n}
    if isinstance(spec, Sliver):
        return {"type": "dalpha", "alpha": spec.alpha}
    if isinstance(spec, HartogsGauss):
        return {"type": "hartogs_gauss", "n": spec.n}
    if isinstance(spec, ModelPotential):
        return {"type": "model", "kind": spec.kind, "scale": spec.scale, "n": spec.n}
    raise InputError(f"unsupported spec {spec!r}")  # pragma: no cover


_JSON_FIELDS = {
    "ball": {"n"},
    "dalpha": {"alpha"},
    "hartogs_gauss": {"n"},
    "model": {"kind", "scale", "n"},
}


def spec_from_json(obj: dict) -> DomainSpec:
    """Parse a domain spec from its JSON object form; unknown fields rejected."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise InputError("domain spec JSON must be an object with a 'type' field")
    kind = obj["type"]
    if kind not in _JSON_FIELDS:
        raise InputError(f"unknown domain type {kind!r}")
    extra = set(obj) - _JSON_FIELDS[kind] - {"type"}
    if extra:
        raise InputError(f"unknown field {sorted(extra)[0]!r} for domain type {kind!r}")
    missing = _JSON_FIELDS[kind] - set(obj)
    if missing:
        raise InputError(
            f"missing field {sorted(missing)[0]!r} for domain type {kind!r}"
        )
    if kind == "ball":
        return Ball(n=int(obj["n"]))
    if kind == "dalpha":
        return Sliver(alpha=float(obj["alpha"]))
    if kind == "hartogs_gauss":
        return HartogsGauss(n=int(obj["n"]))
    return ModelPotential(kind=obj["kind"], scale=float(obj["scale"]), n=int(obj["n"]))

"""Benchmark objectives: value, directional derivative, active subgradients.

Three families:

* max of Rayleigh quotients on the sphere,   f(x) = max_i 1/2 x^T A_i x
* geometric median on the sphere,            f(x) = sum_i w_i arccos(x_i^T x)
* center of mass of SPD matrices,            f(X) = 1/2 sum_i ||logm(X^-1/2 A_i X^-1/2)||_F^2

Each oracle exposes ``value``, ``dir_deriv`` and ``active_subgrad``; the last
returns a Clarke subgradient g with <g, xi> = f'(x; xi), which is what the
direction update consumes.  Oracles are immutable; evaluation counting happens
in a caller-owned :class:`EvalStats` sink via :class:`CountingOracle`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .manifolds import (SPD, ManifoldPoint, Sphere, TangentVector, _sym,
                        inner)

# Active-set tolerance for the Rayleigh max (exact float ties never happen).
_ACTIVE_TOL = 1e-10
# Median data term counts as singular (x at or antipodal to x_i) inside this.
_SINGULAR_TOL = 1e-12
# Gradient denominator floor near the median singularities.
_DENOM_FLOOR = 1e-6


class AmbiguousDirectionError(ValueError):
    """Zero-direction subgradient query at a nonsmooth point."""


@dataclass
class EvalStats:
    """Mutable per-run statistics sink owned by the calling solver."""
    nf: int = 0


class CountingOracle:
    """Wraps an oracle so that every value() call bumps stats.nf once."""

    def __init__(self, oracle, stats: EvalStats):
        self.oracle = oracle
        self.stats = stats

    @property
    def manifold(self):
        return self.oracle.manifold

    def value(self, x: ManifoldPoint) -> float:
        self.stats.nf += 1
        return self.oracle.value(x)

    def dir_deriv(self, x: ManifoldPoint, xi: TangentVector) -> float:
        return self.oracle.dir_deriv(x, xi)

    def active_subgrad(self, x: ManifoldPoint, xi: TangentVector) -> TangentVector:
        return self.oracle.active_subgrad(x, xi)


@dataclass(frozen=True)
class RayleighQuotientMax:
    """max_i 1/2 x^T A_i x over the unit sphere S^n (A_i symmetric)."""

    n: int
    m: int
    mats: np.ndarray  # (m, n+1, n+1), symmetric
    seed: int | None = None
    kind: str = field(default="rayleigh", init=False)

    def __post_init__(self):
        a = np.asarray(self.mats, dtype=float)
        if a.shape != (self.m, self.n + 1, self.n + 1):
            raise ValueError("matrix stack has wrong shape")
        if np.max(np.abs(a - np.transpose(a, (0, 2, 1)))) > 1e-12:
            raise ValueError("matrices must be symmetric")
        object.__setattr__(self, "mats", a)

    @property
    def manifold(self) -> Sphere:
        return Sphere(self.n + 1)

    def _components(self, x: np.ndarray):
        prods = self.mats @ x                    # (m, n+1)
        vals = 0.5 * prods @ x                   # (m,)
        return prods, vals

    def value(self, x: ManifoldPoint) -> float:
        _, vals = self._components(x.data)
        return float(np.max(vals))

    def _active(self, x: np.ndarray):
        prods, vals = self._components(x)
        fmax = np.max(vals)
        idx = np.flatnonzero(vals >= fmax - _ACTIVE_TOL * (1.0 + abs(fmax)))
        # Riemannian gradients of the active components: A_i x - (x^T A_i x) x.
        grads = prods[idx] - (2.0 * vals[idx])[:, None] * x
        return idx, grads

    def dir_deriv(self, x: ManifoldPoint, xi: TangentVector) -> float:
        _, grads = self._active(x.data)
        return float(np.max(grads @ xi.data))

    def active_subgrad(self, x: ManifoldPoint, xi: TangentVector) -> TangentVector:
        idx, grads = self._active(x.data)
        if len(idx) > 1 and float(np.linalg.norm(xi.data)) == 0.0:
            raise AmbiguousDirectionError(
                "zero direction at a point with several active components")
        slopes = grads @ xi.data
        best = int(np.argmax(slopes))  # argmax returns the smallest tied index
        return TangentVector(x, grads[best])


@dataclass(frozen=True)
class GeometricMedian:
    """sum_i w_i arccos(x_i^T x) over S^n; nonsmooth at the data points."""

    n: int
    m: int
    points: np.ndarray   # (m, n+1), unit rows
    weights: np.ndarray  # (m,), positive, sums to 1
    seed: int | None = None
    kind: str = field(default="median", init=False)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if p.shape != (self.m, self.n + 1) or w.shape != (self.m,):
            raise ValueError("data has wrong shape")
        if np.max(np.abs(np.linalg.norm(p, axis=1) - 1.0)) > 1e-12:
            raise ValueError("data points must be unit vectors")
        if np.any(w <= 0.0) or abs(float(np.sum(w)) - 1.0) > 1e-12:
            raise ValueError("weights must be positive and sum to 1")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)

    @property
    def manifold(self) -> Sphere:
        return Sphere(self.n + 1)

    def value(self, x: ManifoldPoint) -> float:
        u = np.clip(self.points @ x.data, -1.0, 1.0)
        return float(self.weights @ np.arccos(u))

    def _split(self, x: np.ndarray):
        """Regular-term gradient sum plus signed weights of singular terms."""
        u = np.clip(self.points @ x, -1.0, 1.0)
        sing_hi = u > 1.0 - _SINGULAR_TOL     # x at the data point
        sing_lo = u < -1.0 + _SINGULAR_TOL    # x antipodal to it
        reg = ~(sing_hi | sing_lo)
        grad = np.zeros_like(x)
        if np.any(reg):
            den = np.maximum(np.sqrt(1.0 - u[reg] ** 2), _DENOM_FLOOR)
            coef = self.weights[reg] / den
            tang = self.points[reg] - u[reg, None] * x
            grad = -(coef @ tang)
        sing_weight = float(np.sum(self.weights[sing_hi])
                            - np.sum(self.weights[sing_lo]))
        has_sing = bool(np.any(sing_hi) or np.any(sing_lo))
        return grad, sing_weight, has_sing

    def dir_deriv(self, x: ManifoldPoint, xi: TangentVector) -> float:
        grad, sw, _ = self._split(x.data)
        return float(grad @ xi.data + sw * np.linalg.norm(xi.data))

    def active_subgrad(self, x: ManifoldPoint, xi: TangentVector) -> TangentVector:
        grad, sw, has_sing = self._split(x.data)
        nxi = float(np.linalg.norm(xi.data))
        if has_sing:
            if nxi == 0.0:
                raise AmbiguousDirectionError(
                    "zero direction at a median data point")
            grad = grad + (sw / nxi) * xi.data
        return TangentVector(x, grad)


@dataclass(frozen=True)
class SpdCenterOfMass:
    """1/2 sum_i dist(X, A_i)^2 over SPD(n); smooth with unique minimizer."""

    n: int
    m: int
    mats: np.ndarray  # (m, n, n), SPD
    seed: int | None = None
    kind: str = field(default="karcher", init=False)

    def __post_init__(self):
        a = np.asarray(self.mats, dtype=float)
        if a.shape != (self.m, self.n, self.n):
            raise ValueError("matrix stack has wrong shape")
        if np.max(np.abs(a - np.transpose(a, (0, 2, 1)))) > 1e-12:
            raise ValueError("matrices must be symmetric")
        if np.any(np.linalg.eigvalsh(a)[:, 0] <= 0.0):
            raise ValueError("matrices must be positive definite")
        object.__setattr__(self, "mats", a)

    @property
    def manifold(self) -> SPD:
        return SPD(self.n)

    def _whitened(self, x: np.ndarray):
        w, q = np.linalg.eigh(_sym(x))
        rw = np.sqrt(np.maximum(w, 1e-14))
        rt = (q * rw) @ q.T
        irt = (q / rw) @ q.T
        return rt, irt, irt @ self.mats @ irt  # (m, n, n)

    def value(self, x: ManifoldPoint) -> float:
        _, _, m = self._whitened(x.data)
        ev = np.linalg.eigvalsh(0.5 * (m + np.transpose(m, (0, 2, 1))))
        logs = np.log(np.maximum(ev, 1e-14))
        return 0.5 * float(np.sum(logs ** 2))

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        # grad f(X) = -sum_i X^(1/2) logm(X^(-1/2) A_i X^(-1/2)) X^(1/2)
        rt, _, m = self._whitened(x)
        ev, vec = np.linalg.eigh(0.5 * (m + np.transpose(m, (0, 2, 1))))
        logs = np.log(np.maximum(ev, 1e-14))
        logm_sum = np.einsum("kij,kj,klj->il", vec, logs, vec)
        return _sym(-rt @ logm_sum @ rt)

    def dir_deriv(self, x: ManifoldPoint, xi: TangentVector) -> float:
        g = TangentVector(x, self._gradient(x.data))
        return inner(g, xi)

    def active_subgrad(self, x: ManifoldPoint, xi: TangentVector) -> TangentVector:
        return TangentVector(x, self._gradient(x.data))


Oracle = RayleighQuotientMax | GeometricMedian | SpdCenterOfMass

KINDS = ("rayleigh", "median", "karcher")


def generate_instance(kind: str, n: int, m: int, seed: int) -> Oracle:
    """Random problem instance, bit-reproducible for a given seed."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    rng = np.random.default_rng(seed)
    if kind == "rayleigh":
        b = rng.standard_normal((m, n + 1, n + 1))
        return RayleighQuotientMax(n, m, 0.5 * (b + np.transpose(b, (0, 2, 1))),
                                   seed=seed)
    if kind == "median":
        p = rng.standard_normal((m, n + 1))
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        return GeometricMedian(n, m, p, np.full(m, 1.0 / m), seed=seed)
    if kind == "karcher":
        mats = np.empty((m, n, n))
        for i in range(m):
            q, r = np.linalg.qr(rng.standard_normal((n, n)))
            q = q * np.sign(np.diag(r))
            d = rng.uniform(0.1, 10.0, size=n)
            mats[i] = _sym((q * d) @ q.T)
        return SpdCenterOfMass(n, m, mats, seed=seed)
    raise ValueError(f"unknown problem kind {kind!r}")


def instance_to_json(oracle: Oracle, include_data: bool = False) -> str:
    """Serialize an instance; by default only (kind, n, m, seed) is stored."""
    obj = {"kind": oracle.kind, "n": oracle.n, "m": oracle.m,
           "seed": oracle.seed}
    if include_data:
        if oracle.kind == "median":
            obj["data"] = {"points": oracle.points.tolist(),
                           "weights": oracle.weights.tolist()}
        else:
            obj["data"] = {"matrices": oracle.mats.tolist()}
    return json.dumps(obj)


def instance_from_json(text: str) -> Oracle:
    obj = json.loads(text)
    kind, n, m = obj["kind"], int(obj["n"]), int(obj["m"])
    data = obj.get("data")
    if data is None:
        if obj.get("seed") is None:
            raise ValueError("instance JSON needs either a seed or inline data")
        return generate_instance(kind, n, m, int(obj["seed"]))
    seed = obj.get("seed")
    if kind == "rayleigh":
        return RayleighQuotientMax(n, m, np.array(data["matrices"]), seed=seed)
    if kind == "median":
        return GeometricMedian(n, m, np.array(data["points"]),
                               np.array(data["weights"]), seed=seed)
    if kind == "karcher":
        return SpdCenterOfMass(n, m, np.array(data["matrices"]), seed=seed)
    raise ValueError(f"unknown problem kind {kind!r}")

"""Geometry for the unit sphere S^n and the SPD(n) manifold.

Points and tangent vectors are immutable value objects; every operation is a
pure function.  The sphere uses the projected (qf) retraction and parallel
transport along the connecting great circle; SPD(n) carries the
affine-invariant metric with the exponential map as retraction and parallel
transport along geodesics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class BasePointMismatchError(ValueError):
    """Tangent vectors combined across different base points."""


class DegenerateRetractionError(ValueError):
    """Retraction undefined for the given input (e.g. x + eta ~ 0)."""


class DegenerateTransportError(ValueError):
    """Transport along a geodesic that is not unique (antipodal endpoints)."""


# Tolerances used by the point / tangent validity checks.
_POINT_TOL = 1e-12
_TANGENT_TOL = 1e-10
_BASE_MATCH_TOL = 1e-14
_EIG_FLOOR = 1e-14


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ManifoldPoint:
    manifold: "Manifold"
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _readonly(self.data))


@dataclass(frozen=True)
class TangentVector:
    base: ManifoldPoint
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _readonly(self.data))

    def _check_same_base(self, other: "TangentVector") -> None:
        if not same_point(self.base, other.base):
            raise BasePointMismatchError(
                "tangent vectors live at different base points")

    def __add__(self, other: "TangentVector") -> "TangentVector":
        self._check_same_base(other)
        return TangentVector(self.base, self.data + other.data)

    def __sub__(self, other: "TangentVector") -> "TangentVector":
        self._check_same_base(other)
        return TangentVector(self.base, self.data - other.data)

    def __mul__(self, c: float) -> "TangentVector":
        return TangentVector(self.base, c * self.data)

    __rmul__ = __mul__

    def __neg__(self) -> "TangentVector":
        return TangentVector(self.base, -self.data)


def same_point(a: ManifoldPoint, b: ManifoldPoint) -> bool:
    """Whether a and b are the same point up to bitwise-level tolerance."""
    if a.manifold != b.manifold:
        return False
    return float(np.max(np.abs(a.data - b.data))) <= _BASE_MATCH_TOL


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _eigh_fun(a: np.ndarray, fun) -> np.ndarray:
    """Apply a scalar function to a symmetric matrix via eigendecomposition."""
    w, v = np.linalg.eigh(_sym(a))
    return _sym((v * fun(w)) @ v.T)


def _spd_log_eigvals(w: np.ndarray) -> np.ndarray:
    # Floor protects logs of nearly singular matrices produced by round-off.
    return np.log(np.maximum(w, _EIG_FLOOR))


def _floored_sqrt(w: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(w, _EIG_FLOOR))


class Manifold:
    """Common interface of the two supported manifolds."""

    injectivity_radius: float

    def point(self, data: np.ndarray) -> ManifoldPoint:
        """Validate raw coordinates and wrap them as a point."""
        data = np.asarray(data, dtype=float)
        self._check_point(data)
        return ManifoldPoint(self, data)

    def tangent(self, x: ManifoldPoint, data: np.ndarray) -> TangentVector:
        """Project raw coordinates onto T_x and wrap them."""
        return TangentVector(x, self._project(x.data, np.asarray(data, float)))

    def zero_tangent(self, x: ManifoldPoint) -> TangentVector:
        return TangentVector(x, np.zeros_like(x.data))

    def random_point(self, rng: np.random.Generator) -> ManifoldPoint:
        raise NotImplementedError

    def random_tangent(self, x: ManifoldPoint, rng: np.random.Generator,
                       unit: bool = True) -> TangentVector:
        """Random tangent vector at x, unit-norm unless unit=False."""
        xi = self.tangent(x, rng.standard_normal(x.data.shape))
        if unit:
            n = norm(xi)
            if n < 1e-14:
                return self.random_tangent(x, rng, unit)
            xi = xi * (1.0 / n)
        return xi

    # Subclasses implement the raw-array geometry.
    def _check_point(self, data: np.ndarray) -> None:
        raise NotImplementedError

    def _project(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _inner(self, x, u, v) -> float:
        raise NotImplementedError

    def _retract(self, x, v) -> np.ndarray:
        raise NotImplementedError

    def _transport(self, a, b, v) -> np.ndarray:
        raise NotImplementedError

    def _distance(self, a, b) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Sphere(Manifold):
    """Unit sphere S^n embedded in R^(n+1), n+1 = ambient_dim >= 2."""

    ambient_dim: int
    injectivity_radius: float = field(default=np.pi, init=False)

    def __post_init__(self):
        if self.ambient_dim < 2:
            raise ValueError("sphere ambient dimension must be >= 2")

    def _check_point(self, data):
        if data.shape != (self.ambient_dim,):
            raise ValueError(f"expected shape ({self.ambient_dim},), "
                             f"got {data.shape}")
        if abs(np.linalg.norm(data) - 1.0) > _POINT_TOL:
            raise ValueError("point is not unit-norm")

    def _project(self, x, v):
        return v - np.dot(v, x) * x

    def _inner(self, x, u, v):
        return float(np.dot(u, v))

    def _retract(self, x, v):
        w = x + v
        nw = np.linalg.norm(w)
        if nw < 1e-14:
            raise DegenerateRetractionError("x + eta is numerically zero")
        return w / nw

    def _transport(self, a, b, v):
        # Parallel transport along the minimal great circle from a to b:
        # the component of v along the geodesic direction u rotates in the
        # (a, u) plane, the orthogonal complement is untouched.
        c = float(np.clip(np.dot(a, b), -1.0, 1.0))
        if c <= -1.0 + _BASE_MATCH_TOL:
            raise DegenerateTransportError("antipodal endpoints")
        w = b - c * a
        nw = np.linalg.norm(w)
        if nw < 1e-14:
            return self._project(b, v)
        u = w / nw
        theta = np.arccos(c)
        vu = np.dot(v, u)
        out = v - vu * u + vu * (np.cos(theta) * u - np.sin(theta) * a)
        return self._project(b, out)

    def _distance(self, a, b):
        return float(np.arccos(np.clip(np.dot(a, b), -1.0, 1.0)))

    def random_point(self, rng):
        v = rng.standard_normal(self.ambient_dim)
        return ManifoldPoint(self, v / np.linalg.norm(v))


@dataclass(frozen=True)
class SPD(Manifold):
    """Symmetric positive definite n x n matrices, affine-invariant metric."""

    order: int
    injectivity_radius: float = field(default=np.inf, init=False)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("SPD order must be >= 1")

    def _check_point(self, data):
        if data.shape != (self.order, self.order):
            raise ValueError(f"expected shape ({self.order}, {self.order}), "
                             f"got {data.shape}")
        if np.max(np.abs(data - data.T)) > _POINT_TOL:
            raise ValueError("matrix is not symmetric")
        if np.linalg.eigvalsh(_sym(data))[0] <= 0.0:
            raise ValueError("matrix is not positive definite")

    def _project(self, x, v):
        return _sym(v)

    def _inner(self, x, u, v):
        # tr(X^-1 u X^-1 v)
        xu = np.linalg.solve(x, u)
        xv = np.linalg.solve(x, v)
        return float(np.sum(xu * xv.T))

    def _retract(self, x, v):
        # X^(1/2) expm(X^(-1/2) v X^(-1/2)) X^(1/2)
        w, q = np.linalg.eigh(_sym(x))
        rt = (q * _floored_sqrt(w)) @ q.T
        irt = (q / _floored_sqrt(w)) @ q.T
        return _sym(rt @ _eigh_fun(irt @ v @ irt, np.exp) @ rt)

    def _transport(self, a, b, v):
        # E v E^T with E = (B A^-1)^(1/2) = A^(1/2) (A^(-1/2) B A^(-1/2))^(1/2) A^(-1/2)
        w, q = np.linalg.eigh(_sym(a))
        rt = (q * _floored_sqrt(w)) @ q.T
        irt = (q / _floored_sqrt(w)) @ q.T
        m = _sym(irt @ b @ irt)
        e = rt @ _eigh_fun(m, _floored_sqrt) @ irt
        return _sym(e @ v @ e.T)

    def _distance(self, a, b):
        w, q = np.linalg.eigh(_sym(a))
        irt = (q / _floored_sqrt(w)) @ q.T
        ev = np.linalg.eigvalsh(_sym(irt @ b @ irt))
        return float(np.linalg.norm(_spd_log_eigvals(ev)))

    def random_point(self, rng):
        # Q D Q^T with random orthogonal Q and eigenvalues in [0.1, 10].
        g = rng.standard_normal((self.order, self.order))
        q, r = np.linalg.qr(g)
        q = q * np.sign(np.diag(r))
        d = rng.uniform(0.1, 10.0, size=self.order)
        return ManifoldPoint(self, _sym((q * d) @ q.T))

    def sqrt_point(self, x: ManifoldPoint) -> np.ndarray:
        return _eigh_fun(x.data, _floored_sqrt)

    def inv_sqrt_point(self, x: ManifoldPoint) -> np.ndarray:
        return _eigh_fun(x.data, lambda w: 1.0 / np.sqrt(np.maximum(w, _EIG_FLOOR)))


def _require_base(x: ManifoldPoint, xi: TangentVector, what: str) -> None:
    if not same_point(x, xi.base):
        raise BasePointMismatchError(f"{what}: base point mismatch")


def inner(xi: TangentVector, zeta: TangentVector) -> float:
    """Riemannian inner product of two tangent vectors at the same point."""
    xi._check_same_base(zeta)
    return xi.base.manifold._inner(xi.base.data, xi.data, zeta.data)


def norm(xi: TangentVector) -> float:
    return float(np.sqrt(max(inner(xi, xi), 0.0)))


def retract(x: ManifoldPoint, eta: TangentVector) -> ManifoldPoint:
    """Move from x along eta; R_x(0) = x."""
    _require_base(x, eta, "retract")
    m = x.manifold
    return ManifoldPoint(m, m._retract(x.data, eta.data))


def transport_between(a: ManifoldPoint, b: ManifoldPoint,
                      xi: TangentVector) -> TangentVector:
    """Parallel transport of xi from T_a to T_b along the geodesic a -> b."""
    _require_base(a, xi, "transport")
    if a.manifold != b.manifold:
        raise BasePointMismatchError("transport between different manifolds")
    if same_point(a, b):
        return TangentVector(b, xi.data)
    m = a.manifold
    return TangentVector(b, m._transport(a.data, b.data, xi.data))


def transport(x: ManifoldPoint, eta: TangentVector,
              xi: TangentVector) -> TangentVector:
    """Transport xi from x to retract(x, eta); identity when eta = 0."""
    _require_base(x, eta, "transport")
    _require_base(x, xi, "transport")
    if np.all(eta.data == 0.0):
        return TangentVector(x, xi.data)
    return transport_between(x, retract(x, eta), xi)


def distance(x: ManifoldPoint, y: ManifoldPoint) -> float:
    if x.manifold != y.manifold:
        raise BasePointMismatchError("distance between different manifolds")
    if same_point(x, y):
        return 0.0
    return x.manifold._distance(x.data, y.data)


def check_point(x: ManifoldPoint, tol: float = _POINT_TOL) -> bool:
    """True when x satisfies its manifold's membership invariants."""
    data = x.data
    if isinstance(x.manifold, Sphere):
        return abs(float(np.linalg.norm(data)) - 1.0) <= tol
    sym_ok = float(np.max(np.abs(data - data.T))) <= tol
    return sym_ok and float(np.linalg.eigvalsh(_sym(data))[0]) > 0.0


def check_tangent(xi: TangentVector, tol: float = _TANGENT_TOL) -> bool:
    """True when xi lies in the tangent space of its base point."""
    x, v = xi.base.data, xi.data
    if isinstance(xi.base.manifold, Sphere):
        return abs(float(np.dot(v, x))) <= tol * (1.0 + float(np.linalg.norm(v)))
    return float(np.max(np.abs(v - v.T))) <= max(tol, _POINT_TOL)

"""Anisotropic norm engines.

A norm here is an even, convex, positively 1-homogeneous function F on R^n,
smooth and strongly convex (in the F^2 sense) away from the origin.  Four
concrete families are supported:

* ``Euclidean``           F(xi) = |xi|
* ``DiagQuadratic(w)``    F(xi) = sqrt(sum_i w_i xi_i^2), w_i > 0
* ``Quadratic(A)``        F(xi) = sqrt(xi^T A xi), A symmetric positive definite
* ``PNorm(p)``            F(xi) = (sum_i |xi_i|^p)^(1/p), 1 < p < inf

Each family has a closed-form dual (polar) norm
F*(x) = sup_{xi != 0} xi.x / F(xi); a sampling-plus-ascent numeric polar is
available as a fallback and as a cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class ZeroVectorError(ValueError):
    """Gradient-type quantities are undefined at the origin."""


# ---------------------------------------------------------------------------
# descriptors


@dataclass(frozen=True)
class Euclidean:
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")


@dataclass(frozen=True)
class DiagQuadratic:
    weights: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if len(w) < 1 or any(v <= 0 for v in w):
            raise ValueError("weights must be strictly positive")
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return len(self.weights)


@dataclass(frozen=True)
class Quadratic:
    matrix: tuple  # row-major tuple of tuples, kept hashable

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max())):
            raise ValueError("matrix must be symmetric")
        if np.linalg.eigvalsh(a).min() <= 0:
            raise ValueError("matrix must be positive definite")
        object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in row) for row in a))

    @property
    def dim(self):
        return len(self.matrix)


@dataclass(frozen=True)
class PNorm:
    p: float
    dim: int

    def __post_init__(self):
        if not (1.0 < self.p < math.inf):
            raise ValueError("exponent must lie in (1, inf)")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")


Descriptor = Euclidean | DiagQuadratic | Quadratic | PNorm


# ---------------------------------------------------------------------------
# direction samples used by the numeric polar and the growth bounds


@lru_cache(maxsize=None)
def _unit_directions(dim: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = np.linspace(0.0, 2.0 * np.pi, 2048, endpoint=False)
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    if dim == 3:
        # Fibonacci sphere, 2^12 points
        n = 4096
        i = np.arange(n) + 0.5
        phi = np.arccos(1.0 - 2.0 * i / n)
        golden = np.pi * (1.0 + 5.0**0.5)
        theta = golden * i
        return np.stack(
            [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)],
            axis=1,
        )
    raise ValueError("only dimensions 1, 2, 3 are supported")


def _tangent_basis(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the tangent space at each unit vector v, (m, n-1, n)."""
    m, n = v.shape
    basis = np.zeros((m, n - 1, n))
    eye = np.eye(n)
    for k in range(m):
        # Gram-Schmidt of the coordinate frame against v[k]
        cols = []
        for j in np.argsort(np.abs(v[k])):  # start from axes least aligned with v
            w = eye[j] - (eye[j] @ v[k]) * v[k]
            for c in cols:
                w = w - (w @ c) * c
            norm = np.linalg.norm(w)
            if norm > 1e-8:
                cols.append(w / norm)
            if len(cols) == n - 1:
                break
        basis[k] = np.stack(cols)
    return basis


class NormEngine:
    """Evaluation engine for one norm descriptor.

    Immutable after construction; all methods are pure and accept arrays of
    shape (..., n).  ``polar_mode`` selects between closed-form duality and
    the numeric sampling-plus-ascent fallback.
    """

    def __init__(self, descriptor: Descriptor, polar_mode: str = "closed-form"):
        if polar_mode not in ("closed-form", "numeric"):
            raise ValueError("polar_mode must be 'closed-form' or 'numeric'")
        self.descriptor = descriptor
        self.polar_mode = polar_mode
        self.dim = descriptor.dim
        if isinstance(descriptor, Euclidean):
            self._A = np.eye(descriptor.dim)
            self._p = None
        elif isinstance(descriptor, DiagQuadratic):
            self._A = np.diag(descriptor.weights)
            self._p = None
        elif isinstance(descriptor, Quadratic):
            self._A = np.asarray(descriptor.matrix, dtype=float)
            self._p = None
        elif isinstance(descriptor, PNorm):
            self._A = None
            self._p = float(descriptor.p)
        else:
            raise TypeError(f"unknown descriptor {descriptor!r}")
        self.alpha1, self.alpha2 = self._growth_numeric()

    # -- basic calculus ----------------------------------------------------

    def value(self, xi) -> np.ndarray:
        """F(xi) for xi of shape (..., n)."""
        xi = np.asarray(xi, dtype=float)
        if self._A is not None:
            return np.sqrt(np.einsum("...i,ij,...j->...", xi, self._A, xi))
        return np.power(np.sum(np.abs(xi) ** self._p, axis=-1), 1.0 / self._p)

    __call__ = value

    def gradient(self, xi) -> np.ndarray:
        """F_xi(xi); raises ZeroVectorError on any zero input."""
        xi = np.asarray(xi, dtype=float)
        f = self.value(xi)
        if np.any(f == 0.0):
            raise ZeroVectorError("norm gradient undefined at the origin")
        if self._A is not None:
            return np.einsum("ij,...j->...i", self._A, xi) / f[..., None]
        g = np.sign(xi) * np.abs(xi) ** (self._p - 1.0)
        return g / f[..., None] ** (self._p - 1.0)

    def hessian(self, xi) -> np.ndarray:
        """Hessian of F at xi, shape (..., n, n)."""
        xi = np.asarray(xi, dtype=float)
        f = self.value(xi)
        if np.any(f == 0.0):
            raise ZeroVectorError("norm Hessian undefined at the origin")
        if self._A is not None:
            ax = np.einsum("ij,...j->...i", self._A, xi)
            outer = ax[..., :, None] * ax[..., None, :]
            return self._A / f[..., None, None] - outer / f[..., None, None] ** 3
        p = self._p
        # clamp components away from the axes: for p < 2 the Hessian blows up
        # where a component vanishes
        scale = np.linalg.norm(xi, axis=-1, keepdims=True)
        a = np.maximum(np.abs(xi), 1e-12 * scale)
        g = np.sign(xi) * a ** (p - 1.0)
        s = np.sum(a**p, axis=-1)
        diag = (p - 1.0) * s[..., None] ** (1.0 / p - 1.0) * a ** (p - 2.0)
        hess = -(p - 1.0) * s[..., None, None] ** (1.0 / p - 2.0) * (
            g[..., :, None] * g[..., None, :]
        )
        idx = np.arange(self.dim)
        hess[..., idx, idx] += diag
        return hess

    def flux(self, xi) -> np.ndarray:
        """F(xi) F_xi(xi) = grad(F^2)/2, continuous through xi = 0."""
        xi = np.asarray(xi, dtype=float)
        if self._A is not None:
            return np.einsum("ij,...j->...i", self._A, xi)
        f = self.value(xi)
        g = np.sign(xi) * np.abs(xi) ** (self._p - 1.0)
        with np.errstate(invalid="ignore"):
            out = g * np.where(f > 0.0, f, 1.0)[..., None] ** (2.0 - self._p)
        return np.where(f[..., None] > 0.0, out, 0.0)

    def axis_slopes(self) -> np.ndarray:
        """F(e_m) per axis; bounds |dF/dp_m| uniformly (used as sweep viscosity)."""
        return self.value(np.eye(self.dim))

    # -- polar norm ---------------------------------------------------------

    def polar_descriptor(self) -> Descriptor:
        d = self.descriptor
        if isinstance(d, Euclidean):
            return d
        if isinstance(d, DiagQuadratic):
            return DiagQuadratic(tuple(1.0 / w for w in d.weights))
        if isinstance(d, Quadratic):
            inv = np.linalg.inv(np.asarray(d.matrix))
            inv = 0.5 * (inv + inv.T)
            return Quadratic(tuple(tuple(row) for row in inv))
        q = d.p / (d.p - 1.0)
        return PNorm(q, d.dim)

    def polar_engine(self) -> "NormEngine":
        """Engine for the dual norm (closed form)."""
        return NormEngine(self.polar_descriptor(), polar_mode=self.polar_mode)

    def polar_value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.polar_mode == "closed-form":
            return NormEngine._closed_polar(self).value(x)
        return self._polar_numeric(x)

    def polar_gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(self.value(x) == 0.0) or np.any(np.all(x == 0.0, axis=-1)):
            raise ZeroVectorError("polar gradient undefined at the origin")
        if self.polar_mode == "closed-form":
            return NormEngine._closed_polar(self).gradient(x)
        # central differences of the numeric polar, step 1e-5 |x|
        flat = x.reshape(-1, self.dim)
        h = 1e-5 * np.linalg.norm(flat, axis=-1)
        grad = np.empty_like(flat)
        for m in range(self.dim):
            e = np.zeros(self.dim)
            e[m] = 1.0
            fp = self._polar_numeric(flat + h[:, None] * e)
            fm = self._polar_numeric(flat - h[:, None] * e)
            grad[:, m] = (fp - fm) / (2.0 * h)
        return grad.reshape(x.shape)

    @staticmethod
    @lru_cache(maxsize=None)
    def _closed_polar_cached(desc: Descriptor) -> "NormEngine":
        return NormEngine(NormEngine(desc).polar_descriptor())

    def _closed_polar(self) -> "NormEngine":
        return NormEngine._closed_polar_cached(self.descriptor)

    def _polar_numeric(self, x) -> np.ndarray:
        """sup_{|v|=1} v.x / F(v) by coarse sampling plus batched tangent ascent."""
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, self.dim)
        r = np.linalg.norm(flat, axis=-1)
        out = np.zeros(len(flat))
        live = r > 0.0
        pts = flat[live]
        if len(pts):
            dirs = _unit_directions(self.dim)
            fdirs = self.value(dirs)
            score = (pts @ dirs.T) / fdirs
            v = dirs[np.argmax(score, axis=1)].copy()
            if self.dim == 1:
                out[live] = np.max(score, axis=1)
            else:
                out[live] = self._ascend(v, pts)
        return out.reshape(x.shape[:-1])

    def _ascend(self, v: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Maximize g(v) = v.x / F(v) over the unit sphere, one v per row of x."""
        def g(u):
            return np.einsum("ij,ij->i", u, x) / self.value(u)

        best = g(v)
        tau = np.full(len(v), 0.1)
        for _ in range(200):
            f = self.value(v)
            grad = (x - best[:, None] * self.gradient(v)) / f[:, None]
            t = grad - np.einsum("ij,ij->i", grad, v)[:, None] * v
            tnorm = np.linalg.norm(t, axis=1)
            if np.all(tau * tnorm < 1e-14):
                break
            trial = v + tau[:, None] * t
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            val = g(trial)
            improved = val > best
            v[improved] = trial[improved]
            best[improved] = val[improved]
            tau[improved] *= 1.5
            tau[~improved] *= 0.4
        return best

    # -- growth constants ----------------------------------------------------

    def growth_bounds(self) -> tuple:
        """(alpha1, alpha2): extremes of F over the Euclidean unit sphere."""
        return self.alpha1, self.alpha2

    def _growth_numeric(self) -> tuple:
        dirs = _unit_directions(self.dim)
        f = self.value(dirs)
        lo = self._refine_extreme(dirs[np.argmin(f)], sign=-1.0)
        hi = self._refine_extreme(dirs[np.argmax(f)], sign=+1.0)
        return lo, hi

    def _refine_extreme(self, v0: np.ndarray, sign: float) -> float:
        if self.dim == 1:
            return float(self.value(v0))
        v = v0.copy()
        best = float(self.value(v))
        tau = 0.05
        for _ in range(200):
            grad = self.gradient(v[None])[0]
            t = grad - (grad @ v) * v
            tn = np.linalg.norm(t)
            if tau * tn < 1e-14:
                break
            trial = v + sign * tau * t
            trial /= np.linalg.norm(trial)
            val = float(self.value(trial))
            if sign * (val - best) > 0:
                v, best, tau = trial, val, tau * 1.5
            else:
                tau *= 0.4
        return best

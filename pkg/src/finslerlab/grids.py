"""Uniform Cartesian grid domains, fields, finite differences, quadrature.

A ``GridDomain`` is a cell-centered uniform grid with isotropic spacing ``h``
over the bounding box of a ``DomainSpec``.  Every interior cell center
satisfies the spec's membership predicate; the boundary is represented by a
dense sample of points with outward Euclidean unit normals.

Fields store one value per cell over the full grid box; cells outside the
inside mask hold ``nan`` unless a closed form supplies data there (oracle
fields use this to keep finite-difference stencils complete near the wall).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .norms import NormEngine


class GridError(Exception):
    pass


class EmptyDomainError(GridError):
    pass


class UnderresolvedError(GridError):
    pass


class NonFiniteFieldError(GridError):
    pass


# ---------------------------------------------------------------------------
# domain specifications


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lo and hi must have equal positive length")
        if any(b <= a for a, b in zip(lo, hi)):
            raise ValueError("box must be nonempty")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def membership(self, x):
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((x > lo) & (x < hi), axis=-1)

    def bounding_box(self):
        return np.asarray(self.lo), np.asarray(self.hi)

    def min_feature(self):
        return min(b - a for a, b in zip(self.lo, self.hi))

    def boundary_samples(self, h):
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        n = self.dim
        pts, nrm = [], []
        for m in range(n):
            for side, val in ((-1.0, lo[m]), (1.0, hi[m])):
                face = _face_lattice(lo, hi, m, val, h, n)
                pts.append(face)
                e = np.zeros(n)
                e[m] = side
                nrm.append(np.tile(e, (len(face), 1)))
        return np.concatenate(pts), np.concatenate(nrm)


@dataclass(frozen=True)
class Slab:
    normal: tuple
    width: float
    extent: float | None = None  # tangential truncation of the grid box

    def __post_init__(self):
        nu = np.asarray(self.normal, dtype=float)
        if nu.ndim != 1 or np.linalg.norm(nu) == 0:
            raise ValueError("normal must be a nonzero vector")
        nu = nu / np.linalg.norm(nu)
        if self.width <= 0:
            raise ValueError("width must be positive")
        object.__setattr__(self, "normal", tuple(nu))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "extent", float(self.extent or self.width))

    @property
    def dim(self):
        return len(self.normal)

    def _frame(self):
        nu = np.asarray(self.normal)
        n = self.dim
        frame = [nu]
        for e in np.eye(n):
            w = e - sum((e @ v) * v for v in frame)
            if np.linalg.norm(w) > 1e-10:
                frame.append(w / np.linalg.norm(w))
            if len(frame) == n:
                break
        return np.stack(frame)  # rows: nu, tau_1, ...

    def membership(self, x):
        s = np.asarray(x) @ np.asarray(self.normal)
        return (s > 0.0) & (s < self.width)

    def bounding_box(self):
        frame = self._frame()
        n = self.dim
        lo = np.full(n, np.inf)
        hi = np.full(n, -np.inf)
        ranges = [(0.0, self.width)] + [(-self.extent / 2, self.extent / 2)] * (n - 1)
        for k in range(2**n):
            coeff = [ranges[j][(k >> j) & 1] for j in range(n)]
            corner = sum(c * frame[j] for j, c in enumerate(coeff))
            lo = np.minimum(lo, corner)
            hi = np.maximum(hi, corner)
        return lo, hi

    def min_feature(self):
        return self.width

    def boundary_samples(self, h):
        # only the two bounding planes belong to the boundary; they extend
        # 50% past the tangential truncation so nearest-point queries near
        # the lateral cuts stay exact
        frame = self._frame()
        n = self.dim
        nu = frame[0]
        span = 0.75 * self.extent
        if n == 1:
            pts = np.array([[0.0], [self.width]]) * nu
            nrm = np.array([[-1.0], [1.0]]) * nu
            return pts, nrm
        step = h / 4 if n == 2 else h / 2
        ticks = np.arange(-span, span + step, step)
        lattice = np.stack(np.meshgrid(*([ticks] * (n - 1)), indexing="ij"), axis=-1)
        lattice = lattice.reshape(-1, n - 1)
        tang = lattice @ frame[1:]
        pts = np.concatenate([tang, tang + self.width * nu])
        nrm = np.concatenate([np.tile(-nu, (len(tang), 1)), np.tile(nu, (len(tang), 1))])
        return pts, nrm


@dataclass(frozen=True, eq=False)
class WulffBall:
    engine: NormEngine
    radius: float
    center: tuple

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        c = tuple(float(v) for v in self.center)
        if len(c) != self.engine.dim:
            raise ValueError("center dimension must match the norm")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.engine.dim

    def membership(self, x):
        z = np.asarray(x) - np.asarray(self.center)
        return self.engine.polar_value(z) < self.radius

    def bounding_box(self):
        # support function of {F* <= R} along e_m is R F(e_m)
        ext = self.radius * self.engine.axis_slopes()
        c = np.asarray(self.center)
        return c - ext, c + ext

    def min_feature(self):
        return 2.0 * self.radius * self.engine.alpha1

    def boundary_samples(self, h):
        from .norms import _unit_directions

        n = self.dim
        reach = self.radius * self.engine.alpha2
        if n == 1:
            u = np.array([[1.0], [-1.0]])
        elif n == 2:
            count = max(256, int(math.ceil(2 * np.pi * reach / (h / 4))))
            t = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
            u = np.stack([np.cos(t), np.sin(t)], axis=1)
        else:
            count = max(4096, int(math.ceil(16 * np.pi * reach**2 / h**2)))
            i = np.arange(count) + 0.5
            phi = np.arccos(1.0 - 2.0 * i / count)
            theta = np.pi * (1.0 + 5.0**0.5) * i
            u = np.stack(
                [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)],
                axis=1,
            )
        pts = np.asarray(self.center) + self.radius * u / self.engine.polar_value(u)[:, None]
        grad = self.engine.polar_gradient(pts - np.asarray(self.center))
        nrm = grad / np.linalg.norm(grad, axis=1, keepdims=True)
        return pts, nrm


@dataclass(frozen=True)
class Torus:
    """Solid of revolution of the ellipse (x2-R)^2 + x3^2/a^2 < r^2 about x3."""

    R: float
    r: float
    a: float

    def __post_init__(self):
        if not (self.R > self.r > 0):
            raise ValueError("torus requires R > r > 0")
        if self.a <= 0:
            raise ValueError("anisotropy must be positive")

    @property
    def dim(self):
        return 3

    def tube_radius(self, x):
        """sqrt((R - rho)^2 + x3^2 / a^2), the dual-norm distance to the core circle."""
        x = np.asarray(x, dtype=float)
        rho = np.hypot(x[..., 0], x[..., 1])
        return np.sqrt((self.R - rho) ** 2 + x[..., 2] ** 2 / self.a**2)

    def membership(self, x):
        return self.tube_radius(x) < self.r

    def bounding_box(self):
        s = self.R + self.r
        z = self.a * self.r
        return np.array([-s, -s, -z]), np.array([s, s, z])

    def min_feature(self):
        return 2.0 * self.r * min(1.0, self.a)

    def boundary_samples(self, h):
        nt = max(64, int(math.ceil(2 * np.pi * (self.R + self.r) / (h / 2))))
        ns = max(64, int(math.ceil(2 * np.pi * self.r * max(1.0, self.a) / (h / 2))))
        t = np.linspace(0.0, 2 * np.pi, nt, endpoint=False)
        th = np.linspace(0.0, 2 * np.pi, ns, endpoint=False)
        T, TH = np.meshgrid(t, th, indexing="ij")
        phi = self.R + self.r * np.cos(TH)
        x = np.stack([phi * np.cos(T), phi * np.sin(T), self.a * self.r * np.sin(TH)], axis=-1)
        # outward normal from the cross product of the parametrization partials
        psi_p = self.a * self.r * np.cos(TH)
        phi_p = -self.r * np.sin(TH)
        nrm = np.stack(
            [phi * psi_p * np.cos(T), phi * psi_p * np.sin(T), -phi * phi_p], axis=-1
        )
        nrm = nrm / np.linalg.norm(nrm, axis=-1, keepdims=True)
        return x.reshape(-1, 3), nrm.reshape(-1, 3)


@dataclass(frozen=True)
class Polytope:
    """Intersection of halfspaces a.x <= b, rows (a_1..a_n, b)."""

    halfspaces: tuple

    def __post_init__(self):
        hs = tuple(tuple(float(v) for v in row) for row in self.halfspaces)
        if not hs or len({len(r) for r in hs}) != 1 or len(hs[0]) < 3:
            raise ValueError("halfspaces must be rows (a_1..a_n, b) of equal length")
        object.__setattr__(self, "halfspaces", hs)

    @property
    def dim(self):
        return len(self.halfspaces[0]) - 1

    def _ab(self):
        m = np.asarray(self.halfspaces)
        return m[:, :-1], m[:, -1]

    def membership(self, x):
        a, b = self._ab()
        return np.all(np.asarray(x) @ a.T < b, axis=-1)

    def bounding_box(self):
        a, b = self._ab()
        n = self.dim
        lo, hi = np.empty(n), np.empty(n)
        for m in range(n):
            c = np.zeros(n)
            c[m] = 1.0
            res_lo = linprog(c, A_ub=a, b_ub=b, bounds=[(None, None)] * n, method="highs")
            res_hi = linprog(-c, A_ub=a, b_ub=b, bounds=[(None, None)] * n, method="highs")
            if not (res_lo.success and res_hi.success):
                raise ValueError("polytope appears unbounded or infeasible")
            lo[m], hi[m] = res_lo.x[m], res_hi.x[m]
        return lo, hi

    def min_feature(self):
        # twice the Chebyshev radius: max r with a.x + |a| r <= b
        a, b = self._ab()
        n = self.dim
        norms = np.linalg.norm(a, axis=1)
        c = np.zeros(n + 1)
        c[-1] = -1.0
        A = np.hstack([a, norms[:, None]])
        res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * n + [(0, None)], method="highs")
        if not res.success:
            raise ValueError("polytope appears unbounded or infeasible")
        return 2.0 * res.x[-1]

    def boundary_samples(self, h):
        a, b = self._ab()
        n = self.dim
        lo, hi = self.bounding_box()
        step = h / 4 if n <= 2 else h / 2
        pts, nrm = [], []
        for i, (ai, bi) in enumerate(zip(a, b)):
            ani = np.linalg.norm(ai)
            nu = ai / ani
            base = nu * bi / ani
            # lattice in the face plane covering the bounding box
            frame = []
            for e in np.eye(n):
                w = e - (e @ nu) * nu
                for f in frame:
                    w = w - (w @ f) * f
                if np.linalg.norm(w) > 1e-10:
                    frame.append(w / np.linalg.norm(w))
            span = np.linalg.norm(hi - lo)
            ticks = np.arange(-span, span + step, step)
            if n == 1:
                cand = base[None, :]
            else:
                lat = np.stack(np.meshgrid(*([ticks] * (n - 1)), indexing="ij"), axis=-1)
                cand = base + lat.reshape(-1, n - 1) @ np.stack(frame)
            others = [j for j in range(len(a)) if j != i]
            keep = np.all(cand @ a[others].T <= b[others] + 1e-12, axis=-1)
            cand = cand[keep]
            if len(cand):
                pts.append(cand)
                nrm.append(np.tile(nu, (len(cand), 1)))
        if not pts:
            raise ValueError("polytope has no boundary samples")
        return np.concatenate(pts), np.concatenate(nrm)


DomainSpec = Box | Slab | WulffBall | Torus | Polytope


def _face_lattice(lo, hi, axis, value, h, n):
    step = h / 4 if n <= 2 else h / 2
    if n == 1:
        return np.array([[value]])
    axes = [np.arange(lo[m], hi[m] + step / 2, step) for m in range(n) if m != axis]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.empty((mesh[0].size, n))
    k = 0
    for m in range(n):
        if m == axis:
            pts[:, m] = value
        else:
            pts[:, m] = mesh[k].ravel()
            k += 1
    return pts


# ---------------------------------------------------------------------------
# grid and fields


class GridDomain:
    """Cell-centered uniform grid over a domain spec.

    Immutable once built.  ``inside`` marks cells whose centers satisfy the
    membership predicate; ``boundary_adjacent`` marks inside cells with a
    neighboring center outside the true domain (these seed distance solvers).
    """

    def __init__(self, spec, h, origin, shape, inside, boundary_points, boundary_normals,
                 boundary_adjacent):
        self.spec = spec
        self.n = spec.dim
        self.h = float(h)
        self.origin = np.asarray(origin, dtype=float)
        self.shape = tuple(int(s) for s in shape)
        self.inside = inside
        self.boundary_points = boundary_points
        self.boundary_normals = boundary_normals
        self.boundary_adjacent = boundary_adjacent
        self.axes = [self.origin[m] + (np.arange(self.shape[m]) + 0.5) * self.h
                     for m in range(self.n)]

    @property
    def interior_count(self):
        return int(self.inside.sum())

    def cell_centers(self):
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def coordinate(self, m):
        """Broadcast coordinate m over the grid shape."""
        shape = [1] * self.n
        shape[m] = self.shape[m]
        return self.axes[m].reshape(shape)

    def index_of(self, flat_index):
        return tuple(int(i) for i in np.unravel_index(flat_index, self.shape))

    def center_of(self, idx):
        return np.array([self.axes[m][idx[m]] for m in range(self.n)])


def build_grid(spec: DomainSpec, resolution: float) -> GridDomain:
    """Build the grid at ``resolution`` cells per unit length."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    h = 1.0 / float(resolution)
    feature = spec.min_feature()
    if feature < 8.0 * h:
        raise UnderresolvedError(
            f"smallest feature {feature:.4g} needs h <= {feature / 8:.4g}, got h = {h:.4g}"
        )
    lo, hi = spec.bounding_box()
    lo = lo - 2.0 * h
    hi = hi + 2.0 * h
    shape = tuple(int(math.ceil((b - a) / h)) for a, b in zip(lo, hi))
    grid_tmp = GridDomain(spec, h, lo, shape,
                          inside=None, boundary_points=None, boundary_normals=None,
                          boundary_adjacent=None)
    centers = grid_tmp.cell_centers()
    inside = spec.membership(centers)
    if not inside.any():
        raise EmptyDomainError("no cell center lies inside the domain")
    adjacent = np.zeros_like(inside)
    for m in range(spec.dim):
        e = np.zeros(spec.dim)
        e[m] = h
        adjacent |= ~spec.membership(centers + e)
        adjacent |= ~spec.membership(centers - e)
    adjacent &= inside
    pts, nrm = spec.boundary_samples(h)
    return GridDomain(spec, h, lo, shape, inside, pts, nrm, adjacent)


class ScalarField:
    """One value per cell; nan where undefined."""

    def __init__(self, grid: GridDomain, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError("values shape must match the grid")
        self.grid = grid
        self.values = values

    @classmethod
    def from_function(cls, grid, fn, where="inside"):
        vals = np.asarray(fn(grid.cell_centers()), dtype=float)
        if where == "inside":
            vals = np.where(grid.inside, vals, np.nan)
        return cls(grid, vals)

    @classmethod
    def full(cls, grid, fill=np.nan):
        return cls(grid, np.full(grid.shape, fill))

    def copy(self):
        return ScalarField(self.grid, self.values.copy())

    def interior(self):
        return self.values[self.grid.inside]

    def _check(self, other):
        if isinstance(other, ScalarField):
            if other.grid is not self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return ScalarField(self.grid, self.values + self._check(other))

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - self._check(other))

    def __mul__(self, other):
        return ScalarField(self.grid, self.values * self._check(other))

    __rmul__ = __mul__


class VectorField:
    def __init__(self, grid: GridDomain, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape + (grid.n,):
            raise ValueError("values shape must match the grid")
        self.grid = grid
        self.values = values

    def component(self, m):
        return self.values[..., m]


def _shift(a: np.ndarray, axis: int, k: int, fill=np.nan) -> np.ndarray:
    """a shifted by k cells along axis; vacated cells take ``fill``."""
    out = np.full_like(a, fill)
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if k > 0:
        src[axis] = slice(0, a.shape[axis] - k)
        dst[axis] = slice(k, None)
    elif k < 0:
        src[axis] = slice(-k, None)
        dst[axis] = slice(0, a.shape[axis] + k)
    else:
        return a.copy()
    out[tuple(dst)] = a[tuple(src)]
    return out


def gradient_fd(u: ScalarField) -> VectorField:
    """Finite-difference gradient.

    Central differences wherever both axis neighbors carry data, one-sided
    toward the available neighbor otherwise.  Cells outside the domain count
    as data only if the field stores finite values there (closed-form
    oracles); admissible fields vanish at the wall and get one-sided stencils.
    """
    g = u.grid
    h = g.h
    vals = u.values
    ok = np.isfinite(vals)
    out = np.full(g.shape + (g.n,), np.nan)
    for m in range(g.n):
        vp = _shift(vals, m, -1)
        vm = _shift(vals, m, +1)
        okp = _shift(ok, m, -1, fill=False) & np.isfinite(vp)
        okm = _shift(ok, m, +1, fill=False) & np.isfinite(vm)
        comp = np.full(g.shape, np.nan)
        both = ok & okp & okm
        comp[both] = (vp[both] - vm[both]) / (2 * h)
        fwd = ok & okp & ~okm
        comp[fwd] = (vp[fwd] - vals[fwd]) / h
        bwd = ok & ~okp & okm
        comp[bwd] = (vals[bwd] - vm[bwd]) / h
        none = ok & ~okp & ~okm
        comp[none] = 0.0
        out[..., m] = comp
    return VectorField(g, out)


def integrate(u: ScalarField) -> float:
    """Midpoint quadrature: sum of interior values times h^n."""
    g = u.grid
    vals = u.values[g.inside]
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = np.flatnonzero(g.inside.ravel())[np.flatnonzero(bad)[:10]]
        cells = [g.index_of(i) for i in idx]
        raise NonFiniteFieldError(f"non-finite values at cells {cells}")
    return float(vals.sum() * g.h**g.n)


def dump_field(u: ScalarField, stream, extra_header: Sequence[str] = ()) -> None:
    """Deterministic text dump: header line, then row-major values."""
    g = u.grid
    dims = ",".join(str(s) for s in g.shape)
    origin = ",".join(f"{v:.17g}" for v in g.origin)
    stream.write(f"# grid n={g.n} h={g.h:.17g} dims={dims} origin={origin}\n")
    for line in extra_header:
        stream.write(f"# {line}\n")
    vals = np.where(g.inside, u.values, np.nan).ravel()
    stream.write("\n".join("nan" if not np.isfinite(v) else f"{v:.17g}" for v in vals))
    stream.write("\n")

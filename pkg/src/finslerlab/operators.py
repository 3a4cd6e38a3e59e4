"""Discrete anisotropic Laplacian, superharmonicity verdicts, torus oracles.

The operator div(F(grad u) F_xi(grad u)) is discretized in flux form: the
vector field V = F F_xi = grad(F^2)/2 is sampled at face midpoints from
one-sided normal differences and averaged tangential differences, and the
divergence is taken by face differences.  This preserves the summation-by-
parts structure that every integral identity downstream relies on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridDomain, ScalarField, Torus, _shift, gradient_fd, integrate
from .norms import NormEngine, ZeroVectorError
from .distance import _require_matching_torus_norm, ridge_detect

TorusSpec = Torus  # the domain spec doubles as the closed-form parameter set


@dataclass
class SuperharmonicVerdict:
    mode: str                 # "pointwise" or "distributional"
    verdict: bool
    worst_value: float        # max cell value of Lap_F d, or min normalized bump pairing
    witness: tuple            # offending cell index, or bump (center index, radius)
    excluded_fraction: float  # ridge / degenerate cells removed (pointwise mode)
    tol: float
    low_confidence: bool = False

    def summary(self):
        return (
            f"verdict={'true' if self.verdict else 'false'} mode={self.mode} "
            f"worst={self.worst_value:.6g} excluded={self.excluded_fraction:.4f}"
        )


# ---------------------------------------------------------------------------
# Finsler Laplacian


def finsler_laplacian(u: ScalarField, engine: NormEngine):
    """Flux-form Lap_F u; nan where the stencil is incomplete or grad u degenerates.

    Returns (field, excluded_fraction) where the fraction counts interior
    cells with a degenerate central gradient (|grad u| < 1e-12).
    """
    g = u.grid
    h = g.h
    vals = u.values
    ok = np.isfinite(vals)
    n = g.n

    # cellwise central/one-sided gradient used for the tangential averages
    cell_grad = gradient_fd(u).values

    div = np.zeros(g.shape)
    valid = np.ones(g.shape, dtype=bool)
    for m in range(n):
        vp = _shift(vals, m, -1)
        okp = _shift(ok, m, -1, fill=False)
        # face between c and c+e_m: normal component one-sided, tangential
        # components averaged from the two cells
        p_face = np.empty(g.shape + (n,))
        p_face[..., m] = (vp - vals) / h
        for t in range(n):
            if t == m:
                continue
            p_face[..., t] = 0.5 * (cell_grad[..., t] + _shift(cell_grad[..., t], m, -1))
        face_ok = ok & okp & np.all(np.isfinite(p_face), axis=-1)
        flux = engine.flux(p_face)[..., m]
        flux = np.where(face_ok, flux, np.nan)
        flux_lo = _shift(flux, m, +1)
        div += (flux - flux_lo) / h
        valid &= face_ok & _shift(face_ok, m, +1, fill=False)

    grad_norm = np.linalg.norm(np.where(np.isfinite(cell_grad), cell_grad, 0.0), axis=-1)
    degenerate = g.inside & valid & (grad_norm < 1e-12)
    out = np.where(valid & ~degenerate, div, np.nan)
    interior = max(1, g.interior_count)
    excluded = float(degenerate.sum()) / interior
    return ScalarField(g, out), excluded


def anisotropic_normal(nu, engine: NormEngine):
    """Anisotropic outer normal F_xi(nu) for a Euclidean unit normal nu."""
    nu = np.asarray(nu, dtype=float)
    if np.any(engine.value(nu) == 0.0):
        raise ZeroVectorError("anisotropic normal undefined for zero normal")
    return engine.gradient(nu)


# ---------------------------------------------------------------------------
# superharmonicity


def superharmonic_check(d: ScalarField, engine: NormEngine, mode: str = "distributional",
                        tol: float = None) -> SuperharmonicVerdict:
    """Check -Lap_F d >= 0, pointwise or against a family of bump test functions.

    The distributional pairing integral of F(grad d) F_xi(grad d) . grad phi
    must be nonnegative for every admissible bump phi >= 0; it sees the
    ridge's favorable singular part that pointwise evaluation cannot.
    """
    if mode == "pointwise":
        return _superharmonic_pointwise(d, engine, tol)
    if mode == "distributional":
        return _superharmonic_distributional(d, engine, tol)
    raise ValueError("mode must be 'pointwise' or 'distributional'")


def _superharmonic_pointwise(d, engine, tol):
    g = d.grid
    lap, _ = finsler_laplacian(d, engine)
    ridge = ridge_detect(d, engine)
    sel = g.inside & ~ridge & np.isfinite(lap.values)
    complete = g.inside & np.isfinite(lap.values)
    excluded = 1.0 - sel.sum() / max(1, complete.sum())
    vals = lap.values[sel]
    if len(vals) == 0:
        raise ValueError("no usable cells for the pointwise check")
    if (~np.isfinite(lap.values) & g.inside).sum() > 0.2 * g.interior_count:
        raise ValueError("more than 20% of interior cells have undefined gradient")
    # scale: typical operator magnitude, floored by the inradius scale so that
    # piecewise-linear distance fields (operator 0 a.e.) keep a sane tolerance
    dmax = float(np.nanmax(np.where(g.inside, d.values, np.nan)))
    scale = max(float(np.median(np.abs(vals))), 1.0 / max(dmax, 1e-12))
    if tol is None:
        tol = 0.05 * scale
    worst = float(vals.max())
    flat = np.where(sel, lap.values, -np.inf).ravel().argmax()
    return SuperharmonicVerdict(
        mode="pointwise",
        verdict=bool(worst <= tol),
        worst_value=worst,
        witness=g.index_of(int(flat)),
        excluded_fraction=float(excluded),
        tol=float(tol),
        low_confidence=bool(excluded >= 0.05),
    )


def _bump_centers(g: GridDomain, clearance: np.ndarray, radius: float, stride_cells: int):
    """Cell indices on a coarse lattice whose Euclidean clearance admits the bump."""
    sel = np.zeros(g.shape, dtype=bool)
    cuts = tuple(slice(None, None, stride_cells) for _ in range(g.n))
    sel[cuts] = True
    sel &= g.inside & (clearance > radius + g.h)
    return np.argwhere(sel)


def _superharmonic_distributional(d, engine, tol):
    g = d.grid
    if tol is None:
        tol = 5e-3
    grad = gradient_fd(d).values
    vfield = engine.flux(np.where(np.isfinite(grad), grad, 0.0))
    vfield[~g.inside] = 0.0
    vflat = vfield.reshape(-1, g.n)

    # Euclidean clearance bounded below through the growth constant; bumps
    # admitted on this bound are strictly supported inside the domain
    radii = [4 * g.h, 8 * g.h, 16 * g.h]
    clearance = np.where(g.inside, engine.alpha1 * np.maximum(d.values, 0.0), -1.0)

    hn = g.h**g.n
    # C-order flat strides for index arithmetic
    flat_stride = np.empty(g.n, dtype=np.int64)
    acc = 1
    for m in range(g.n - 1, -1, -1):
        flat_stride[m] = acc
        acc *= g.shape[m]

    worst = np.inf
    witness = None
    count = 0
    for radius in radii:
        rc = int(round(radius / g.h))
        idx = _bump_centers(g, clearance, radius, max(1, rc))
        if len(idx) == 0:
            continue
        # one kernel per radius: cell-aligned bumps share their sampled grad phi
        off_ax = np.arange(-rc, rc + 1)
        mesh = np.meshgrid(*([off_ax] * g.n), indexing="ij")
        offs = np.stack([m.ravel() for m in mesh], axis=1)
        z = offs * g.h / radius
        s2 = np.sum(z * z, axis=1)
        supp = s2 < 1.0
        offs = offs[supp]
        gphi = (-6.0 * (1.0 - s2[supp, None]) ** 2 / radius**2) * (offs * g.h)
        gphi_l1 = float(np.sum(np.linalg.norm(gphi, axis=1)) * hn)
        if gphi_l1 <= 0:
            continue
        off_flat = offs @ flat_stride
        for start in range(0, len(idx), 256):
            block = idx[start : start + 256]
            base = block @ flat_stride
            gathered = vflat[base[:, None] + off_flat[None, :]]  # (B, S, n)
            pairings = np.einsum("bsi,si->b", gathered, gphi) * hn
            normalized = pairings / gphi_l1
            count += len(block)
            b = int(np.argmin(normalized))
            if normalized[b] < worst:
                worst = float(normalized[b])
                witness = (tuple(int(v) for v in block[b]), radius)
    if count < 1:
        raise ValueError("no admissible bump fits inside the domain")
    return SuperharmonicVerdict(
        mode="distributional",
        verdict=bool(worst >= -tol),
        worst_value=float(worst),
        witness=witness,
        excluded_fraction=0.0,
        tol=float(tol),
        low_confidence=bool(count < 200),
    )


# ---------------------------------------------------------------------------
# torus closed forms


def torus_laplacian_oracle(spec: TorusSpec, grid: GridDomain, engine: NormEngine) -> ScalarField:
    """Closed-form Lap_F of the torus distance: (R - 2 rho) / (rho * tube radius).

    Undefined (nan) on the core circle and the rotation axis.
    """
    _require_matching_torus_norm(spec, engine)
    centers = grid.cell_centers()
    rho = np.hypot(centers[..., 0], centers[..., 1])
    tube = spec.tube_radius(centers)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = (spec.R - 2.0 * rho) / (rho * tube)
    vals[(rho < 1e-9) | (tube < 1e-9)] = np.nan
    return ScalarField(grid, vals)


def torus_mean_curvature(spec: TorusSpec, theta) -> np.ndarray:
    """Euclidean mean curvature of the rotated-ellipse boundary at angle theta."""
    th = np.asarray(theta, dtype=float)
    R, r, a = spec.R, spec.r, spec.a
    num = a * r**2 * (R + 2 * r * np.cos(th) + r * np.cos(th) ** 3 * (a**2 - 1.0))
    den = (
        2.0
        * np.abs(R + r * np.cos(th))
        * (r**2 * np.sin(th) ** 2 + a**2 * r**2 * np.cos(th) ** 2) ** 1.5
    )
    return num / den


def torus_mean_curvature_numeric(spec: TorusSpec, theta, t: float = 0.3,
                                 step: float = 1e-5) -> np.ndarray:
    """Mean curvature from finite-difference fundamental forms of the surface.

    Independent of the closed form above; outward orientation.
    """
    R, r, a = spec.R, spec.r, spec.a

    def surf(tt, th):
        phi = R + r * np.cos(th)
        return np.stack([phi * np.cos(tt), phi * np.sin(tt), a * r * np.sin(th)], axis=-1)

    th = np.asarray(theta, dtype=float)
    tt = np.full_like(th, t)
    s_t = (surf(tt + step, th) - surf(tt - step, th)) / (2 * step)
    s_h = (surf(tt, th + step) - surf(tt, th - step)) / (2 * step)
    s_tt = (surf(tt + step, th) - 2 * surf(tt, th) + surf(tt - step, th)) / step**2
    s_hh = (surf(tt, th + step) - 2 * surf(tt, th) + surf(tt, th - step)) / step**2
    s_th = (
        surf(tt + step, th + step)
        - surf(tt + step, th - step)
        - surf(tt - step, th + step)
        + surf(tt - step, th - step)
    ) / (4 * step**2)

    normal = np.cross(s_t, s_h)
    normal /= np.linalg.norm(normal, axis=-1, keepdims=True)
    E = np.einsum("...i,...i->...", s_t, s_t)
    Ff = np.einsum("...i,...i->...", s_t, s_h)
    G = np.einsum("...i,...i->...", s_h, s_h)
    e = np.einsum("...i,...i->...", s_tt, normal)
    f = np.einsum("...i,...i->...", s_th, normal)
    gg = np.einsum("...i,...i->...", s_hh, normal)
    return -(e * G - 2 * f * Ff + gg * E) / (2 * (E * G - Ff**2))

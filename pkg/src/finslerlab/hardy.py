"""Hardy-quotient functionals, quotient minimization, and near-extremal sweeps.

The singular-weight integrals that drive the optimality experiments
concentrate exponentially close to the boundary as the sharpness parameter
decreases; no uniform grid resolves that layer directly.  They are therefore
evaluated in two parts: a plain midpoint sum over cells with d above a small
threshold, plus a boundary-layer closure that integrates the exact

    integral_0^d0 eta(r) (S0 + S1 r) dr

in the variable u = -log r, where S(r) = S0 + S1 r is the level-set measure
of d fitted from the grid just above the threshold.  The closure follows the
coarea structure of the distance function; on smooth domains S is smooth and
the linear fit is accurate to the quadrature's own order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .grids import Box, GridDomain, ScalarField, _shift, gradient_fd
from .norms import NormEngine


class ResolutionGuardError(ValueError):
    """The requested sharpness outruns what the grid resolves."""


class DescentStallError(RuntimeError):
    pass


@dataclass
class HardyEstimate:
    quotient: float
    iterations: int
    history: list
    converged: bool
    h: float
    cells: int


@dataclass
class SweepRow:
    epsilon: float
    theta: float
    quotient_Ueps: float
    energy: float
    hardy_mass: float
    deficit_Q: float  # energy - hardy_mass/4, integrated without cancellation
    J_values: dict
    D: float


@dataclass(frozen=True)
class LocalCutoff:
    """Smooth cutoff supported in the dual ball of radius delta at x0,
    identically 1 inside radius delta/2."""

    x0: tuple
    delta: float


# ---------------------------------------------------------------------------
# elementary pieces


def weight_X(t):
    """X(t) = -1/log t on (0, 1); increasing, X -> 0 as t -> 0+."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0) or np.any(t >= 1.0):
        raise ValueError("weight argument must lie in (0, 1)")
    out = -1.0 / np.log(t)
    return float(out) if out.ndim == 0 else out


# Distance clamp (in cell widths) for 1/d^2 weights.  Excluding sub-h/2
# cells outright leaves the first layer with weight 4/h^2 and free boundary
# values, which lets discrete minimizers undercut the continuum constant by
# ~25% on flat walls; clamping at 5/8 h keeps the weight bounded while the
# discrete infimum tracks the continuum value on flat and curved walls alike.
WEIGHT_CLAMP = 0.625


def _interior_mask(grid: GridDomain, d: ScalarField):
    """Cells entering 1/d^2 quadratures: interior with positive distance."""
    return grid.inside & (d.values > 0) & np.isfinite(d.values)


def _clamped(grid: GridDomain, dvals):
    return np.maximum(dvals, WEIGHT_CLAMP * grid.h)


def cutoff_field(grid: GridDomain, cutoff, engine: NormEngine = None) -> ScalarField:
    if cutoff is None or cutoff == "global":
        return ScalarField(grid, np.where(grid.inside, 1.0, 0.0))
    if isinstance(cutoff, LocalCutoff):
        if engine is None:
            raise ValueError("a norm engine is required for a local cutoff")
        z = grid.cell_centers() - np.asarray(cutoff.x0)
        s = engine.polar_value(z) / cutoff.delta
        q = np.clip(2.0 * s - 1.0, 0.0, 1.0)
        vals = 1.0 - (10.0 * q**3 - 15.0 * q**4 + 6.0 * q**5)  # C^2 ramp
        return ScalarField(grid, np.where(grid.inside, vals, 0.0))
    raise ValueError(f"unknown cutoff {cutoff!r}")


# ---------------------------------------------------------------------------
# quotients and deficits (fixed test functions, central stencils)


def dirichlet_energy(u: ScalarField, engine: NormEngine) -> float:
    """integral of F(grad u)^2 by midpoint quadrature of the cellwise gradient."""
    g = u.grid
    grad = gradient_fd(u).values
    f2 = engine.value(np.where(np.isfinite(grad), grad, 0.0)) ** 2
    return float(np.sum(f2[g.inside]) * g.h**g.n)


def hardy_mass(u: ScalarField, d: ScalarField) -> float:
    """integral of u^2 / d^2 with the distance clamped at the wall scale."""
    g = u.grid
    sel = _interior_mask(g, d)
    vals = u.values[sel] ** 2 / _clamped(g, d.values[sel]) ** 2
    return float(vals.sum() * g.h**g.n)


def hardy_quotient(u: ScalarField, d: ScalarField, engine: NormEngine) -> float:
    """Rayleigh quotient of the Hardy functional; exactly scale invariant."""
    den = hardy_mass(u, d)
    if den <= 0.0:
        raise ValueError("test function vanishes on the regularized interior")
    return dirichlet_energy(u, engine) / den


def deficit_logremainder(u: ScalarField, d: ScalarField, engine: NormEngine, D: float) -> float:
    """energy - (1/4) u^2/d^2 mass - (1/4) u^2 X^2(d/D)/d^2 mass."""
    g = u.grid
    sel = _interior_mask(g, d)
    dv = d.values[sel]
    dc = _clamped(g, dv)
    uv = u.values[sel]
    x = weight_X(dv / D)
    hn = g.h**g.n
    m = float(np.sum(uv**2 / dc**2) * hn)
    r = float(np.sum(uv**2 * x**2 / dc**2) * hn)
    return dirichlet_energy(u, engine) - 0.25 * m - 0.25 * r


def deficit_l2(u: ScalarField, d: ScalarField, engine: NormEngine, r_F: float) -> float:
    """energy - (1/4) u^2/d^2 mass - 1/(4 r_F^2) u^2 mass.

    Checks the pointwise bound -d log(d/(e r_F)) <= r_F that makes this a
    consequence of the log-remainder deficit.
    """
    g = u.grid
    sel = _interior_mask(g, d)
    dv = d.values[sel]
    dominance = -dv * np.log(dv / (math.e * r_F))
    if np.any(dominance > r_F + 1e-10):
        worst = float(dominance.max())
        raise ValueError(f"pointwise dominance failed: max {worst} > r_F = {r_F}")
    uv = u.values[sel]
    hn = g.h**g.n
    m = float(np.sum(uv**2 / _clamped(g, dv) ** 2) * hn)
    l2 = float(np.sum(u.values[g.inside] ** 2) * hn)
    return dirichlet_energy(u, engine) - 0.25 * m - l2 / (4.0 * r_F**2)


def random_sine_fields(grid: GridDomain, count: int, rng, kmax: int = 4,
                       envelope: ScalarField = None):
    """Seeded random sine combinations vanishing on the domain boundary.

    On a box the sine products vanish exactly; other domains multiply a
    bounding-box sine combination by the (normalized) distance envelope.
    """
    spec = grid.spec
    if isinstance(spec, Box):
        lo = np.asarray(spec.lo)
        span = np.asarray(spec.hi) - lo
        env = None
    else:
        if envelope is None:
            raise ValueError("non-box domains need a distance envelope")
        lo, hi = spec.bounding_box()
        span = hi - lo
        env = envelope.values / np.nanmax(np.where(grid.inside, envelope.values, np.nan))
    centers = grid.cell_centers()
    xhat = (centers - lo) / span
    fields = []
    for _ in range(count):
        coeffs = rng.normal(size=(kmax,) * grid.n)
        vals = np.zeros(grid.shape)
        for kidx in np.ndindex(*coeffs.shape):
            term = np.ones(grid.shape)
            for m in range(grid.n):
                term *= np.sin((kidx[m] + 1) * np.pi * xhat[..., m])
            vals += coeffs[kidx] * term
        if env is not None:
            vals = vals * env
        fields.append(ScalarField(grid, np.where(grid.inside, vals, 0.0)))
    return fields


# ---------------------------------------------------------------------------
# quotient minimization (one-sided symmetric stencil; no checkerboard modes)


def _sym_energy_and_flux(uvals, grid, engine):
    """Energy (h^n/2) sum_c [F(grad+ u)^2 + F(grad- u)^2] and its u-gradient.

    Admissible functions vanish at ghost cells one spacing outside the
    domain; a mirror term restores full weight to wall faces, which the
    one-sided sums alone would count at half weight.  The adjoint is
    assembled exactly from the same stencil, so descent on the reported
    energy is monotone.
    """
    g = grid
    h = g.h
    hn = h**g.n
    u0 = np.where(g.inside, uvals, 0.0)
    energy = 0.0
    gradE = np.zeros(g.shape)
    slopes2 = engine.axis_slopes() ** 2
    for sgn in (-1, +1):  # -1: forward differences, +1: backward
        p = np.empty(g.shape + (g.n,))
        for m in range(g.n):
            nb = _shift(u0, m, sgn, fill=0.0)
            p[..., m] = (nb - u0) / h if sgn < 0 else (u0 - nb) / h
        p[~g.inside] = 0.0
        f2 = engine.value(p) ** 2
        energy += 0.5 * hn * float(f2[g.inside].sum())
        w = engine.flux(p)  # F F_xi = grad(F^2)/2
        w[~g.inside] = 0.0
        for m in range(g.n):
            wm = w[..., m]
            if sgn < 0:
                gradE -= wm * (hn / h)
                gradE += _shift(wm, m, +1, fill=0.0) * (hn / h)
            else:
                gradE += wm * (hn / h)
                gradE -= _shift(wm, m, -1, fill=0.0) * (hn / h)
            # mirror completion: the ghost-side half of each wall face, so
            # faces on the boundary carry the same weight as interior ones
            ok = _shift(g.inside, m, sgn, fill=False)
            wallsq = np.where(g.inside & ~ok, u0 * u0, 0.0)
            energy += 0.5 * hn * slopes2[m] * float(wallsq.sum()) / h**2
            gradE += np.where(g.inside & ~ok, u0, 0.0) * (hn * slopes2[m] / h**2)
    gradE[~g.inside] = 0.0
    return energy, gradE


def _laplacian_apply(grid, v):
    out = np.zeros(grid.shape)
    h2 = grid.h**2
    for m in range(grid.n):
        out += (2.0 * v - _shift(v, m, -1, fill=0.0) - _shift(v, m, +1, fill=0.0)) / h2
    out[~grid.inside] = 0.0
    return out


def _sobolev_lift(grid, r, iters=25):
    """Approximate (I - Lap)^-1 r by a fixed number of CG steps.

    Representing the functional gradient in the H^1 inner product removes the
    1/h^2 stiffness that stalls plain descent.
    """
    x = np.zeros(grid.shape)
    res = np.where(grid.inside, r, 0.0)
    p = res.copy()
    rs = float(np.sum(res * res))
    if rs == 0.0:
        return x
    for _ in range(iters):
        ap = p + _laplacian_apply(grid, p)
        alpha = rs / float(np.sum(p * ap))
        x += alpha * p
        res -= alpha * ap
        rs_new = float(np.sum(res * res))
        if rs_new < 1e-28 * rs:
            break
        p = res + (rs_new / rs) * p
        rs = rs_new
    return x


def _descend_quotient(grid, engine, u0, mass_weight, max_iters, tol,
                      precondition=False):
    """Minimize energy(u)/sum(mass_weight u^2) by normalized gradient descent
    with backtracking; the quotient history is non-increasing."""
    hn = grid.h**grid.n
    w = np.where(np.isfinite(mass_weight) & grid.inside, mass_weight, 0.0)

    def mass(u):
        return float(np.sum(w * u * u) * hn)

    u = np.where(grid.inside, u0, 0.0)
    m = mass(u)
    if m <= 0:
        raise ValueError("starting function has zero mass")
    u = u / math.sqrt(m)
    energy, gradE = _sym_energy_and_flux(u, grid, engine)
    q = energy  # mass is 1 after normalization
    history = [q]
    step = 1.0
    converged = False
    for _ in range(max_iters):
        gradM = 2.0 * hn * w * u
        direction = gradE - q * gradM
        if precondition:
            direction = _sobolev_lift(grid, direction)
        dId = float(np.sum(direction * direction))
        if dId == 0.0:
            converged = True
            break
        accepted = False
        for _ in range(30):
            trial = u - step * direction
            mt = mass(trial)
            if mt > 0:
                trial = trial / math.sqrt(mt)
                et, gt = _sym_energy_and_flux(trial, grid, engine)
                if et < q:
                    accepted = True
                    break
            step *= 0.4
        if not accepted:
            break
        u, q, gradE = trial, et, gt
        history.append(q)
        step *= 1.6
        rel = (history[-2] - history[-1]) / max(history[-2], 1e-300)
        if rel < tol:
            converged = True
            break
    return HardyEstimate(
        quotient=float(q),
        iterations=len(history) - 1,
        history=history,
        converged=converged,
        h=grid.h,
        cells=grid.interior_count,
    ), ScalarField(grid, u)


def hardy_estimate(grid: GridDomain, d: ScalarField, engine: NormEngine,
                   max_iters: int = 2000, tol: float = 1e-6) -> HardyEstimate:
    """Certified upper bound on the discrete Hardy quotient, by descent from
    the borderline profile sqrt(d)."""
    sel = _interior_mask(grid, d)
    weight = np.where(sel, 1.0 / _clamped(grid, np.where(sel, d.values, 1.0)) ** 2, 0.0)
    u0 = np.sqrt(np.maximum(np.where(grid.inside, d.values, 0.0), 0.0))
    est, _ = _descend_quotient(grid, engine, u0, weight, max_iters, tol,
                               precondition=True)
    return est


def lambda1_estimate(grid: GridDomain, engine: NormEngine, d: ScalarField,
                     max_iters: int = 2000, tol: float = 1e-6) -> HardyEstimate:
    """Upper bound on the first Dirichlet eigenvalue of the anisotropic
    operator; descent from the distance profile."""
    weight = np.where(grid.inside, 1.0, 0.0)
    u0 = np.maximum(np.where(grid.inside, d.values, 0.0), 0.0)
    est, _ = _descend_quotient(grid, engine, u0, weight, max_iters, tol,
                               precondition=True)
    return est


# ---------------------------------------------------------------------------
# distance profile with boundary-layer closure


@dataclass
class DistanceProfile:
    """Weighted distribution of d over the grid, split at d0 = threshold.

    integrate(eta) = midpoint sum of w * eta(d) over cells with d >= d0
                   + integral_0^d0 eta(r) (S0 + S1 r) dr

    with S fitted on bins of width h just above d0.
    """

    d_vals: np.ndarray
    w_vals: np.ndarray
    cellvol: float
    d0: float
    S0: float
    S1: float

    @classmethod
    def build(cls, grid: GridDomain, d: ScalarField, weight=None,
              threshold_cells: int = 4, fit_cells: int = 8):
        h = grid.h
        d0 = threshold_cells * h
        sel = grid.inside & np.isfinite(d.values) & (d.values > 0)
        dv = d.values[sel]
        wv = np.ones_like(dv) if weight is None else np.asarray(weight)[sel]
        if dv.max() < d0 + (fit_cells + 1) * h:
            raise ResolutionGuardError("domain too shallow for the layer fit")
        hn = h**grid.n
        # level measure on bins [d0 + j h, d0 + (j+1) h)
        mids, dens = [], []
        for j in range(fit_cells):
            lo = d0 + j * h
            pick = (dv >= lo) & (dv < lo + h)
            mids.append(lo + 0.5 * h)
            dens.append(wv[pick].sum() * hn / h)
        mids = np.asarray(mids)
        dens = np.asarray(dens)
        s1, s0 = np.polyfit(mids, dens, 1)
        if s0 <= 0.0:
            s0, s1 = float(dens.mean()), 0.0
        keep = dv >= d0
        return cls(dv[keep], wv[keep], hn, d0, float(s0), float(s1))

    def integrate(self, eta, eta_u=None) -> float:
        """Grid part plus layer closure.

        ``eta_u``, if given, must equal eta(exp(-u)) * exp(-u) and is used in
        the layer integral; supplying it directly avoids underflow of
        exp(-u) for singular weights.
        """
        grid_part = float(np.sum(self.w_vals * eta(self.d_vals)) * self.cellvol)
        u0 = -math.log(self.d0)
        if eta_u is None:
            def eta_u(u):
                r = math.exp(-u)
                return eta(r) * r

        def f(u):
            return eta_u(u) * (self.S0 + self.S1 * math.exp(-u))

        layer, _ = quad(f, u0, np.inf, limit=200)
        return grid_part + float(layer)


# ---------------------------------------------------------------------------
# the near-extremal family and its functionals


def _check_sweep_params(epsilon, theta):
    if not (0.0 < epsilon <= 0.5):
        raise ValueError("sharpness parameter must lie in (0, 1/2]")
    if not (0.5 < theta < 1.0):
        raise ValueError("weight exponent must lie strictly inside (1/2, 1)")


def _profile_g(epsilon, theta, D):
    def g(r):
        r = np.asarray(r, dtype=float)
        return r ** (0.5 + epsilon) * (-np.log(r / D)) ** theta

    def gprime(r):
        r = np.asarray(r, dtype=float)
        x = -1.0 / np.log(r / D)
        return r ** (epsilon - 0.5) * (-np.log(r / D)) ** theta * (0.5 + epsilon - theta * x)

    return g, gprime


def _singular_eta(epsilon, D, W):
    """eta(r) = r^(2 eps - 1) W(-log(r/D)) together with its stable u-form
    eta(exp(-u)) exp(-u) = exp(-2 eps u) W(u + log D)."""
    logD = math.log(D)

    def eta(r):
        r = np.asarray(r, dtype=float)
        return r ** (2.0 * epsilon - 1.0) * W(-np.log(r / D))

    def eta_u(u):
        return math.exp(-2.0 * epsilon * u) * W(u + logD)

    return eta, eta_u


def build_Ueps(grid: GridDomain, d: ScalarField, epsilon: float, theta: float,
               cutoff="global", engine: NormEngine = None) -> ScalarField:
    """Near-extremal test function phi * d^(1/2+eps) * X^(-theta)(d/D)."""
    _check_sweep_params(epsilon, theta)
    r_F = float(np.nanmax(np.where(grid.inside, d.values, np.nan)))
    D = math.e * r_F
    g, _ = _profile_g(epsilon, theta, D)
    phi = cutoff_field(grid, cutoff, engine)
    vals = np.zeros(grid.shape)
    ok = grid.inside & np.isfinite(d.values) & (d.values > 0)
    vals[ok] = phi.values[ok] * g(d.values[ok])
    return ScalarField(grid, vals)


def jbeta(grid: GridDomain, d: ScalarField, phi, beta: float, epsilon: float,
          D: float, profile: DistanceProfile = None) -> float:
    """integral of phi^2 d^(-1+2 eps) X^(-beta)(d/D)."""
    if epsilon <= 0:
        raise ValueError("sharpness parameter must be positive")
    if profile is None:
        weight = None if phi is None else np.asarray(phi.values) ** 2
        profile = DistanceProfile.build(grid, d, weight)
    eta, eta_u = _singular_eta(epsilon, D, lambda L: L**beta)
    return profile.integrate(eta, eta_u)


def ueps_functionals(grid: GridDomain, d: ScalarField, engine: NormEngine,
                     epsilon: float, theta: float, cutoff="global",
                     profiles=None):
    """(energy, hardy mass, deficit Q, D) of the near-extremal function.

    The function is a profile of d by construction, so F(grad U)^2 splits into
    g'(d)^2 F(grad d)^2 plus cutoff terms; evaluating it this way avoids
    re-differencing a known composition across the boundary layer.  Q is the
    energy minus a quarter of the mass, integrated as one signed density:
    at small sharpness the two terms agree to many digits and subtracting
    their separately accumulated values would lose the difference entirely.
    """
    _check_sweep_params(epsilon, theta)
    r_F = float(np.nanmax(np.where(grid.inside, d.values, np.nan)))
    D = math.e * r_F
    g, gp = _profile_g(epsilon, theta, D)
    if profiles is None:
        profiles = build_sweep_profiles(grid, d, engine, cutoff)

    t2 = 2 * theta

    def w_energy(L):
        return L**t2 * (0.5 + epsilon - theta / L) ** 2

    def w_mass(L):
        return L**t2

    def w_deficit(L):
        b = 0.5 + epsilon - theta / L
        return L**t2 * (b * b - 0.25)

    energy = profiles.integrate(*_singular_eta(epsilon, D, w_energy))
    mass = profiles.integrate(*_singular_eta(epsilon, D, w_mass))
    qval = profiles.integrate(*_singular_eta(epsilon, D, w_deficit))

    extra = _cutoff_energy_terms(grid, d, engine, profiles, g, gp)
    return energy + extra, mass, qval + extra, D


def _cutoff_energy_terms(grid, d, engine, profiles, g, gp):
    phi = profiles.phi
    if phi is None or np.all(phi.values[grid.inside] == 1.0):
        return 0.0
    gphi = gradient_fd(phi).values
    gphi = np.where(np.isfinite(gphi), gphi, 0.0)
    fphi = engine.value(gphi)
    grad_d = gradient_fd(d).values
    grad_d = np.where(np.isfinite(grad_d), grad_d, 0.0)
    flux_d = engine.flux(grad_d)
    cross_density = 2.0 * phi.values * np.einsum("...i,...i->...", flux_d, gphi)
    hn = grid.h**grid.n
    out = 0.0
    sel = grid.inside & np.isfinite(d.values) & (d.values > 0) & (np.abs(cross_density) > 0)
    if sel.any():
        dv = d.values[sel]
        out += float(np.sum(cross_density[sel] * g(dv) * gp(dv)) * hn)
    sel2 = grid.inside & (fphi > 0) & np.isfinite(d.values) & (d.values > 0)
    if sel2.any():
        out += float(np.sum(fphi[sel2] ** 2 * g(d.values[sel2]) ** 2) * hn)
    return out


class SweepProfiles:
    """Cutoff-weighted distance profile shared by every functional of a sweep.

    All near-extremal functionals are profiles of d; with the eikonal
    identity F(grad d) = 1 they reduce to weighted integrals against the
    distribution of d, so one profile serves energy, mass, deficit and J.
    """

    def __init__(self, grid, d, engine, cutoff="global"):
        self.phi = cutoff_field(grid, cutoff, engine)
        self.profile = DistanceProfile.build(grid, d, weight=self.phi.values**2)

    def integrate(self, eta, eta_u=None):
        return self.profile.integrate(eta, eta_u)


def build_sweep_profiles(grid, d, engine, cutoff="global"):
    """Distance profile shared by every sharpness value of a sweep."""
    return SweepProfiles(grid, d, engine, cutoff)


def _resolution_guard(grid, d, epsilons):
    r_F = float(np.nanmax(np.where(grid.inside, d.values, np.nan)))
    floor = 2.0 * grid.h / r_F
    bad = [e for e in epsilons if e < floor]
    if bad:
        raise ResolutionGuardError(
            f"sharpness values {bad} below the grid floor {floor:.4g}"
        )


def optimality_sweep(grid: GridDomain, d: ScalarField, engine: NormEngine,
                     theta: float = 0.75, epsilons=(0.2, 0.1, 0.05, 0.025),
                     cutoff="global"):
    """One SweepRow per sharpness value, sharpest last."""
    _check_sweep_params(min(epsilons), theta)
    _resolution_guard(grid, d, epsilons)
    profiles = build_sweep_profiles(grid, d, engine, cutoff)
    rows = []
    for eps in sorted(epsilons, reverse=True):
        energy, mass, qval, D = ueps_functionals(
            grid, d, engine, eps, theta, cutoff, profiles=profiles
        )
        jvals = {}
        for beta in (2 * theta, 2 * theta - 1.5, 2 * theta - 2.0):
            jvals[beta] = jbeta(grid, d, profiles.phi, beta, eps, D,
                                profile=profiles.profile)
        if not np.isfinite(energy) or not np.isfinite(mass) or not all(
            np.isfinite(v) for v in jvals.values()
        ):
            raise FloatingPointError(f"non-finite functional at sharpness {eps}")
        rows.append(
            SweepRow(
                epsilon=eps,
                theta=theta,
                quotient_Ueps=energy / mass,
                energy=energy,
                hardy_mass=mass,
                deficit_Q=qval,
                J_values=jvals,
                D=D,
            )
        )
    return rows


def jbeta_scaling_sweep(grid: GridDomain, d: ScalarField, phi, betas, epsilons):
    """Fitted log-log slope of J_beta per beta (bounded-ratio report below -1)."""
    _resolution_guard(grid, d, epsilons)
    weight = None if phi is None else np.asarray(phi.values) ** 2
    profile = DistanceProfile.build(grid, d, weight)
    r_F = float(np.nanmax(np.where(grid.inside, d.values, np.nan)))
    D = math.e * r_F
    eps_sorted = sorted(epsilons, reverse=True)
    out = {}
    for beta in betas:
        js = [jbeta(grid, d, phi, beta, e, D, profile=profile) for e in eps_sorted]
        entry = {"epsilons": list(eps_sorted), "J": js}
        if beta > -1.0:
            slope = float(np.polyfit(np.log(eps_sorted), np.log(js), 1)[0])
            entry["slope"] = slope
        else:
            entry["ratio"] = float(max(js) / min(js))
        out[beta] = entry
    return out

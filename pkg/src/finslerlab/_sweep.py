"""Grid kernels: Lax-Friedrichs fast sweeping and nearest-sample propagation."""
import numpy as np
from numba import njit

# cell states
OUTSIDE = 0
FROZEN = 1
ACTIVE = 2      # needs ghost handling at some neighbor
ACTIVE_FAST = 3 # all six neighbors in-bounds and readable


@njit(cache=True, fastmath=True, inline="always")
def _slope(p0, p1, p2, axis, kind, A, pexp):
    """|dF/dp_axis| at p; zero when p = 0."""
    if kind == 0:
        q = (
            A[0, 0] * p0 * p0
            + A[1, 1] * p1 * p1
            + A[2, 2] * p2 * p2
            + 2.0 * (A[0, 1] * p0 * p1 + A[0, 2] * p0 * p2 + A[1, 2] * p1 * p2)
        )
        f = np.sqrt(q)
        if f < 1e-300:
            return 0.0
        if axis == 0:
            return abs(A[0, 0] * p0 + A[0, 1] * p1 + A[0, 2] * p2) / f
        if axis == 1:
            return abs(A[0, 1] * p0 + A[1, 1] * p1 + A[1, 2] * p2) / f
        return abs(A[0, 2] * p0 + A[1, 2] * p1 + A[2, 2] * p2) / f
    f = (abs(p0) ** pexp + abs(p1) ** pexp + abs(p2) ** pexp) ** (1.0 / pexp)
    if f < 1e-300:
        return 0.0
    if axis == 0:
        return abs(p0) ** (pexp - 1.0) / f ** (pexp - 1.0)
    if axis == 1:
        return abs(p1) ** (pexp - 1.0) / f ** (pexp - 1.0)
    return abs(p2) ** (pexp - 1.0) / f ** (pexp - 1.0)


@njit(cache=True, fastmath=True, inline="always")
def _dual_dist(z0, z1, z2, kind, C, qexp):
    # kind 0: |C^T z| (dual of a quadratic norm); kind 1: q-norm (dual of p-norm)
    if kind == 0:
        w0 = C[0, 0] * z0 + C[1, 0] * z1 + C[2, 0] * z2
        w1 = C[0, 1] * z0 + C[1, 1] * z1 + C[2, 1] * z2
        w2 = C[0, 2] * z0 + C[1, 2] * z1 + C[2, 2] * z2
        return np.sqrt(w0 * w0 + w1 * w1 + w2 * w2)
    return (abs(z0) ** qexp + abs(z1) ** qexp + abs(z2) ** qexp) ** (1.0 / qexp)


@njit(cache=True, fastmath=True)
def nearest_sample_propagate(samples, origin, h, shape, kind, C, qexp, max_rounds=12):
    """Per-cell index of the (approximately) dual-norm-nearest boundary sample.

    Seeds each sample into its containing cell, then propagates candidate
    indices along all 2^3 sweep orderings until no cell improves.  Candidate
    distances are evaluated exactly; the propagated minimum can exceed the
    true sample minimum only by a fraction of a cell width, far below the
    boundary-sampling error.

    Returns (distance array, candidate index array, rounds used).
    """
    nx, ny, nz = shape
    d = np.full((nx, ny, nz), np.inf)
    cand = np.full((nx, ny, nz), -1, dtype=np.int64)
    ox, oy, oz = origin[0], origin[1], origin[2]
    for s in range(len(samples)):
        yx, yy, yz = samples[s, 0], samples[s, 1], samples[s, 2]
        ic = int(np.floor((yx - ox) / h))
        jc = int(np.floor((yy - oy) / h))
        kc = int(np.floor((yz - oz) / h))
        # scatter into the 3^n neighborhood so each cell's representative
        # competes among every sample within ~1.5 h
        for i in range(max(0, ic - 1), min(nx, ic + 2)):
            cx = ox + (i + 0.5) * h
            for j in range(max(0, jc - 1), min(ny, jc + 2)):
                cy = oy + (j + 0.5) * h
                for k in range(max(0, kc - 1), min(nz, kc + 2)):
                    cz = oz + (k + 0.5) * h
                    dist = _dual_dist(cx - yx, cy - yy, cz - yz, kind, C, qexp)
                    if dist < d[i, j, k]:
                        d[i, j, k] = dist
                        cand[i, j, k] = s
    rounds = 0
    for rnd in range(max_rounds):
        changed = False
        for order in range(8):
            sx = 1 if (order & 1) == 0 else -1
            sy = 1 if (order & 2) == 0 else -1
            sz = 1 if (order & 4) == 0 else -1
            i0 = 0 if sx == 1 else nx - 1
            i1 = nx if sx == 1 else -1
            j0 = 0 if sy == 1 else ny - 1
            j1 = ny if sy == 1 else -1
            k0 = 0 if sz == 1 else nz - 1
            k1 = nz if sz == 1 else -1
            for i in range(i0, i1, sx):
                cx = ox + (i + 0.5) * h
                for j in range(j0, j1, sy):
                    cy = oy + (j + 0.5) * h
                    for k in range(k0, k1, sz):
                        cz = oz + (k + 0.5) * h
                        dc = d[i, j, k]
                        best = -1
                        # pull the best candidate seen by the 6 neighbors
                        for t in range(6):
                            if t == 0:
                                ii, jj, kk = i - 1, j, k
                            elif t == 1:
                                ii, jj, kk = i + 1, j, k
                            elif t == 2:
                                ii, jj, kk = i, j - 1, k
                            elif t == 3:
                                ii, jj, kk = i, j + 1, k
                            elif t == 4:
                                ii, jj, kk = i, j, k - 1
                            else:
                                ii, jj, kk = i, j, k + 1
                            if ii < 0 or ii >= nx or jj < 0 or jj >= ny or kk < 0 or kk >= nz:
                                continue
                            s = cand[ii, jj, kk]
                            if s < 0 or s == cand[i, j, k]:
                                continue
                            dist = _dual_dist(
                                cx - samples[s, 0],
                                cy - samples[s, 1],
                                cz - samples[s, 2],
                                kind,
                                C,
                                qexp,
                            )
                            if dist < dc:
                                dc = dist
                                best = s
                        if best >= 0:
                            d[i, j, k] = dc
                            cand[i, j, k] = best
                            changed = True
        rounds = rnd + 1
        if not changed:
            break
    return d, cand, rounds


@njit(cache=True, fastmath=True)
def lf_sweep(d, state, h, sig, kind, A, pexp, tol, max_rounds):
    """Gauss-Seidel sweeps over all 2^n orderings until stationarity.

    ``state`` encodes outside/frozen/active cells; active cells whose full
    6-neighborhood is readable take a branch-free path.  Cells are revisited
    only while their neighborhood keeps changing (dirty flags); propagation
    of sub-threshold changes is cut at tol/100, far below the stopping rule.

    Returns (rounds_used, per-round max-update history, converged flag).
    """
    nx, ny, nz = d.shape
    s0, s1, s2 = sig[0], sig[1], sig[2]
    use0, use1, use2 = s0 > 0.0, s1 > 0.0, s2 > 0.0
    denom = (s0 + s1 + s2) / h
    inv2h = 1.0 / (2.0 * h)
    a00, a11, a22 = A[0, 0], A[1, 1], A[2, 2]
    a01, a02, a12 = A[0, 1], A[0, 2], A[1, 2]
    diag = a01 == 0.0 and a02 == 0.0 and a12 == 0.0
    mark = tol * 0.01

    dirty = np.zeros(d.shape, dtype=np.uint8)
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                if state[i, j, k] >= ACTIVE:
                    dirty[i, j, k] = 1

    history = np.zeros(max_rounds)
    for rnd in range(max_rounds):
        maxch = 0.0
        for order in range(8):
            sx = 1 if (order & 1) == 0 else -1
            sy = 1 if (order & 2) == 0 else -1
            sz = 1 if (order & 4) == 0 else -1
            i0 = 0 if sx == 1 else nx - 1
            i1 = nx if sx == 1 else -1
            j0 = 0 if sy == 1 else ny - 1
            j1 = ny if sy == 1 else -1
            k0 = 0 if sz == 1 else nz - 1
            k1 = nz if sz == 1 else -1
            for i in range(i0, i1, sx):
                for j in range(j0, j1, sy):
                    for k in range(k0, k1, sz):
                        st = state[i, j, k]
                        if st < ACTIVE or dirty[i, j, k] == 0:
                            continue
                        dc = d[i, j, k]
                        if st == ACTIVE_FAST:
                            ap0 = d[i + 1, j, k] if use0 else dc
                            am0 = d[i - 1, j, k] if use0 else dc
                            ap1 = d[i, j + 1, k] if use1 else dc
                            am1 = d[i, j - 1, k] if use1 else dc
                            ap2 = d[i, j, k + 1] if use2 else dc
                            am2 = d[i, j, k - 1] if use2 else dc
                        else:
                            ap0 = d[i + 1, j, k] if (i + 1 < nx and state[i + 1, j, k] != OUTSIDE) else dc
                            am0 = d[i - 1, j, k] if (i - 1 >= 0 and state[i - 1, j, k] != OUTSIDE) else dc
                            ap1 = d[i, j + 1, k] if (j + 1 < ny and state[i, j + 1, k] != OUTSIDE) else dc
                            am1 = d[i, j - 1, k] if (j - 1 >= 0 and state[i, j - 1, k] != OUTSIDE) else dc
                            ap2 = d[i, j, k + 1] if (k + 1 < nz and state[i, j, k + 1] != OUTSIDE) else dc
                            am2 = d[i, j, k - 1] if (k - 1 >= 0 and state[i, j, k - 1] != OUTSIDE) else dc
                        p0 = (ap0 - am0) * inv2h if use0 else 0.0
                        p1 = (ap1 - am1) * inv2h if use1 else 0.0
                        p2 = (ap2 - am2) * inv2h if use2 else 0.0
                        if kind == 0:
                            q = a00 * p0 * p0 + a11 * p1 * p1 + a22 * p2 * p2
                            if not diag:
                                q += 2.0 * (a01 * p0 * p1 + a02 * p0 * p2 + a12 * p1 * p2)
                            hval = np.sqrt(q)
                        else:
                            hval = (
                                abs(p0) ** pexp + abs(p1) ** pexp + abs(p2) ** pexp
                            ) ** (1.0 / pexp)
                        # local viscosity: |dF/dp_m| maximized over the one-sided
                        # and central gradients plus headroom, capped by F(e_m)
                        if hval > 1e-3:
                            q0m = (dc - am0) / h if use0 else 0.0
                            q0p = (ap0 - dc) / h if use0 else 0.0
                            q1m = (dc - am1) / h if use1 else 0.0
                            q1p = (ap1 - dc) / h if use1 else 0.0
                            q2m = (dc - am2) / h if use2 else 0.0
                            q2p = (ap2 - dc) / h if use2 else 0.0
                            g0 = _slope(p0, p1, p2, 0, kind, A, pexp)
                            g1 = _slope(p0, p1, p2, 1, kind, A, pexp)
                            g2 = _slope(p0, p1, p2, 2, kind, A, pexp)
                            t0v = _slope(q0m, q1m, q2m, 0, kind, A, pexp)
                            t1v = _slope(q0m, q1m, q2m, 1, kind, A, pexp)
                            t2v = _slope(q0m, q1m, q2m, 2, kind, A, pexp)
                            if t0v > g0:
                                g0 = t0v
                            if t1v > g1:
                                g1 = t1v
                            if t2v > g2:
                                g2 = t2v
                            t0v = _slope(q0p, q1p, q2p, 0, kind, A, pexp)
                            t1v = _slope(q0p, q1p, q2p, 1, kind, A, pexp)
                            t2v = _slope(q0p, q1p, q2p, 2, kind, A, pexp)
                            if t0v > g0:
                                g0 = t0v
                            if t1v > g1:
                                g1 = t1v
                            if t2v > g2:
                                g2 = t2v
                            l0 = min(s0, g0 + 0.1 * s0)
                            l1 = min(s1, g1 + 0.1 * s1)
                            l2 = min(s2, g2 + 0.1 * s2)
                        else:
                            l0, l1, l2 = s0, s1, s2
                        dnew = (
                            1.0
                            - hval
                            + (l0 * (ap0 + am0) + l1 * (ap1 + am1) + l2 * (ap2 + am2)) * inv2h
                        ) / ((l0 + l1 + l2) / h)
                        if dnew < 0.0:
                            dnew = 0.0
                        dirty[i, j, k] = 0
                        if dnew < dc:
                            d[i, j, k] = dnew
                            ch = dc - dnew
                            if ch > maxch:
                                maxch = ch
                            if ch > mark:
                                # wake the neighborhood
                                if i + 1 < nx:
                                    dirty[i + 1, j, k] = 1
                                if i - 1 >= 0:
                                    dirty[i - 1, j, k] = 1
                                if j + 1 < ny:
                                    dirty[i, j + 1, k] = 1
                                if j - 1 >= 0:
                                    dirty[i, j - 1, k] = 1
                                if k + 1 < nz:
                                    dirty[i, j, k + 1] = 1
                                if k - 1 >= 0:
                                    dirty[i, j, k - 1] = 1
        history[rnd] = maxch
        if maxch < tol:
            return rnd + 1, history[: rnd + 1], True
    return max_rounds, history, False

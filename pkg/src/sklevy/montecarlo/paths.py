"""Path kernels for Z^D (killed subordinate BM) and Y^D = Z^D(T_t).

Geometry is passed to the kernels as flat float arrays:

dom   : [kind (0 ball, 1 annulus), r_in, r_out, c_0, ..., c_{d-1}]
prims : rows [kind, c(3), n(3), R, r1, r2, 0, 0] describing the stopping
        region U as an intersection of primitives; kind 1 is a ball
        (center c, radius R), kind 2 a boundary box D_Q(r1, r2) at Q = c with
        inward normal n on the circle of radius R. An empty array means U = D.
cells : [x_lo, y_lo, h, nx, ny] for a planar occupation grid, nx = 0 for none.

Step sizes adapt to the local boundary distance, which keeps the scheme
exact between grid points (both processes are Markov) and only discretizes
the detection of killing and of exits from U:

    inner Z step   ds = c_in  * Phi(max(delta_D(z), floor))
    outer Y step   h  = c_out * Phi(max(delta_U(y), floor))^gamma

with floor = floor_frac * (the starting distance of the path), so a path
started twice as close to the boundary is simulated on a grid scaled in the
same way. Phi(r) = r^(2 delta_phi).
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .stable import stable1

PRIM_W = 12
EMPTY_PRIMS = np.zeros((0, PRIM_W))
NO_CELLS = np.zeros(5)

ALIVE, EXITED, DIED, TRUNCATED = -1, 0, 1, 2


@njit(cache=True, nogil=True)
def dom_dist(x, dom):
    """Signed distance to the domain boundary (negative outside)."""
    s = 0.0
    for i in range(x.shape[0]):
        v = x[i] - dom[3 + i]
        s += v * v
    rho = math.sqrt(s)
    dist = dom[2] - rho
    if dom[0] == 1.0:
        dist = min(dist, rho - dom[1])
    return dist


@njit(cache=True, nogil=True)
def _prim_dist(x, p):
    d = x.shape[0]
    if p[0] == 1.0:
        s = 0.0
        for i in range(d):
            v = x[i] - p[1 + i]
            s += v * v
        return p[7] - math.sqrt(s)
    # boundary box
    yd = 0.0
    for i in range(d):
        yd += (x[i] - p[1 + i]) * p[4 + i]
    tt = 0.0
    for i in range(d):
        v = x[i] - p[1 + i] - yd * p[4 + i]
        tt += v * v
    yt = math.sqrt(tt)
    R = p[7]
    if yt >= R:
        return -1.0
    rq = yd - (R - math.sqrt(R * R - yt * yt))
    return min(min(rq, p[8] - rq), p[9] - yt)


@njit(cache=True, nogil=True)
def reg_dist(x, prims):
    """Distance proxy to the boundary of U (negative outside U); inf when U = D."""
    out = np.inf
    for k in range(prims.shape[0]):
        out = min(out, _prim_dist(x, prims[k]))
    return out


@njit(cache=True, nogil=True)
def _cell(x, cells):
    nx = int(cells[3])
    if nx == 0:
        return -1
    ny = int(cells[4])
    i = int(math.floor((x[0] - cells[0]) / cells[2]))
    j = int(math.floor((x[1] - cells[1]) / cells[2]))
    if i < 0 or j < 0 or i >= nx or j >= ny:
        return -1
    return i * ny + j


@njit(cache=True, nogil=True)
def advance_z(z, rem, dom, a, c_in, lfloor, bridge, rng, zn):
    """Run Z^D for Z-time rem from z (in place). Returns True if killed.

    On killing z keeps the last skeleton position inside D.
    """
    d = z.shape[0]
    two_a = 2.0 * a
    inv_a = 1.0 / a
    while rem > 0.0:
        dz = dom_dist(z, dom)
        ds = c_in * max(dz, lfloor) ** two_a
        if ds >= rem:
            ds = rem
            rem = 0.0
        else:
            rem -= ds
        S = ds ** inv_a * stable1(a, rng)
        sd = math.sqrt(2.0 * S)
        for j in range(d):
            zn[j] = z[j] + sd * rng.standard_normal()
        dn = dom_dist(zn, dom)
        if dn <= 0.0:
            return True
        if bridge and S > 0.0 and rng.random() < math.exp(-dz * dn / S):
            return True
        for j in range(d):
            z[j] = zn[j]
    return False


@njit(cache=True, nogil=True)
def z_paths(X0, dom, a, c_in, floor_frac, zcap, bridge, gam, ucoef, cells, rng):
    """Killed Z^D paths from each row of X0.

    Returns (tau, truncated, cell_sum, cell_sumsq). Cell scores accumulate the
    renewal weights U(s_{k+1}) - U(s_k), U(s) = ucoef s^gam, at Z(s_k); their
    per-path total is U(tau).
    """
    n, d = X0.shape
    tau = np.empty(n)
    trunc = np.zeros(n, np.bool_)
    nx, ny = int(cells[3]), int(cells[4])
    ncell = nx * ny
    csum = np.zeros(max(ncell, 1))
    csq = np.zeros(max(ncell, 1))
    local = np.zeros(max(ncell, 1))
    touched = np.empty(max(ncell, 1), np.int64)
    seen = np.zeros(max(ncell, 1), np.bool_)
    z = np.empty(d)
    zn = np.empty(d)
    two_a = 2.0 * a
    inv_a = 1.0 / a
    for i in range(n):
        for j in range(d):
            z[j] = X0[i, j]
        lfloor = floor_frac * dom_dist(z, dom)
        s = 0.0
        nt = 0
        while True:
            dz = dom_dist(z, dom)
            ds = c_in * max(dz, lfloor) ** two_a
            last = False
            if s + ds >= zcap:
                ds = zcap - s
                last = True
            if ncell > 0:
                c = _cell(z, cells)
                if c >= 0:
                    local[c] += ucoef * ((s + ds) ** gam - s ** gam)
                    if not seen[c]:
                        seen[c] = True
                        touched[nt] = c
                        nt += 1
            S = ds ** inv_a * stable1(a, rng)
            sd = math.sqrt(2.0 * S)
            for j in range(d):
                zn[j] = z[j] + sd * rng.standard_normal()
            s += ds
            dn = dom_dist(zn, dom)
            if dn <= 0.0:
                break
            if bridge and S > 0.0 and rng.random() < math.exp(-dz * dn / S):
                break
            for j in range(d):
                z[j] = zn[j]
            if last:
                trunc[i] = True
                break
        tau[i] = s
        for q in range(nt):
            c = touched[q]
            csum[c] += local[c]
            csq[c] += local[c] * local[c]
            local[c] = 0.0
            seen[c] = False
    return tau, trunc, csum, csq


@njit(cache=True, nogil=True)
def y_paths(X0, dom, prims, a, gam, c_out, c_in, floor_frac, ycap, wexp, bridge, cells, rng):
    """Y^D paths run until exit from U, death, or the time cap.

    Returns (status, ytime, exitpos, functional, n_outer, cell_sum, cell_sumsq).
    ytime is tau_U for exits and the outer-step midpoint for deaths.
    The functional is the left-endpoint sum of h * delta_D(Y)^wexp.
    """
    n, d = X0.shape
    status = np.empty(n, np.int8)
    ytime = np.empty(n)
    exitpos = np.empty((n, d))
    func = np.empty(n)
    nout = np.empty(n, np.int64)
    nx, ny = int(cells[3]), int(cells[4])
    ncell = nx * ny
    csum = np.zeros(max(ncell, 1))
    csq = np.zeros(max(ncell, 1))
    local = np.zeros(max(ncell, 1))
    touched = np.empty(max(ncell, 1), np.int64)
    seen = np.zeros(max(ncell, 1), np.bool_)
    y = np.empty(d)
    zn = np.empty(d)
    pw = 2.0 * a * gam
    inv_g = 1.0 / gam
    for i in range(n):
        for j in range(d):
            y[j] = X0[i, j]
        lfloor = floor_frac * min(dom_dist(y, dom), reg_dist(y, prims))
        t = 0.0
        F = 0.0
        k = 0
        nt = 0
        st = ALIVE
        while True:
            dd = dom_dist(y, dom)
            du = min(dd, reg_dist(y, prims))
            h = c_out * max(du, lfloor) ** pw
            last = False
            if t + h >= ycap:
                h = ycap - t
                last = True
            F += h * dd ** wexp
            if ncell > 0:
                c = _cell(y, cells)
                if c >= 0:
                    local[c] += h
                    if not seen[c]:
                        seen[c] = True
                        touched[nt] = c
                        nt += 1
            dT = h ** inv_g * stable1(gam, rng)
            dead = advance_z(y, dT, dom, a, c_in, lfloor, bridge, rng, zn)
            t += h
            k += 1
            if dead:
                st = DIED
                ytime[i] = t - 0.5 * h
                break
            if reg_dist(y, prims) <= 0.0:
                st = EXITED
                ytime[i] = t
                break
            if last:
                st = TRUNCATED
                ytime[i] = t
                break
        status[i] = st
        for j in range(d):
            exitpos[i, j] = y[j]
        func[i] = F
        nout[i] = k
        for q in range(nt):
            c = touched[q]
            csum[c] += local[c]
            csq[c] += local[c] * local[c]
            local[c] = 0.0
            seen[c] = False
    return status, ytime, exitpos, func, nout, csum, csq


@njit(cache=True, nogil=True)
def y_record(x0, dom, prims, a, gam, c_out, c_in, floor_frac, ycap, bridge, rng):
    """One Y^D path with its full outer skeleton: (times, positions, status)."""
    d = x0.shape[0]
    y = x0.copy()
    zn = np.empty(d)
    times = [0.0]
    pos = [x0.copy()]
    lfloor = floor_frac * min(dom_dist(y, dom), reg_dist(y, prims))
    pw = 2.0 * a * gam
    t = 0.0
    st = ALIVE
    while True:
        du = min(dom_dist(y, dom), reg_dist(y, prims))
        h = c_out * max(du, lfloor) ** pw
        last = False
        if t + h >= ycap:
            h = ycap - t
            last = True
        dT = h ** (1.0 / gam) * stable1(gam, rng)
        dead = advance_z(y, dT, dom, a, c_in, lfloor, bridge, rng, zn)
        t += h
        if dead:
            st = DIED
            break
        times.append(t)
        pos.append(y.copy())
        if reg_dist(y, prims) <= 0.0:
            st = EXITED
            break
        if last:
            st = TRUNCATED
            break
    P = np.empty((len(pos), d))
    for i in range(len(pos)):
        P[i] = pos[i]
    return np.array(times), P, st, t

"""Compiled right-hand side and Dormand-Prince 5(4) stepper.

The state vector is ``[n(3), j(3), r/L(3), v/L(3)]`` where ``L`` is the
length scale stored in the parameter block (the FG radius).  Positions and
velocities are carried in units of ``L`` so that a single pair of tolerances
works for every component.

Parameter block layout (float64 array, see ``pack_params``)::

    0  omega_I          rad/s
    1  omega_L          rad/s, gamma * |B_ext|
    2-4 B_hat           unit vector (zeros when B_ext == 0)
    5  gamma            rad/(s T)
    6  image_coeff      T, mu0*mu / (32 pi L^3); image field scale at z = L
    7  image_on         0 / 1
    8  com_on           0 / 1, integrate centre-of-mass motion
    9  force_coeff      1/s^2, 3*mu*image_coeff / (2 m L^2)
    10 g_over_L         1/s^2 (zero when gravity is off)
"""

import numpy as np
from numba import njit

N_PARAMS = 11
STATE_DIM = 12

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_GEOMETRY = 2
STATUS_MAX_STEPS = 3

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (-71.0 / 57600.0, 71.0 / 16695.0, -71.0 / 1920.0,
                                17253.0 / 339200.0, -22.0 / 525.0, 1.0 / 40.0)

# Shampine's continuous extension, rows = stages, columns = theta**1..4
DENSE_P = np.array([
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
     69997945.0 / 29380423.0],
])


@njit(cache=True, nogil=True)
def rhs(y, prm, out):
    """Write dy/dt into ``out``; return False if the FG is at or below the SC plane."""
    nx, ny, nz = y[0], y[1], y[2]
    jx, jy, jz = y[3], y[4], y[5]
    w_i = prm[0]
    w_l = prm[1]
    bx, by, bz = prm[2], prm[3], prm[4]

    # dn/dt = omega_I (j x n)
    out[0] = w_i * (jy * nz - jz * ny)
    out[1] = w_i * (jz * nx - jx * nz)
    out[2] = w_i * (jx * ny - jy * nx)
    # dj/dt = omega_L (n x B_hat)
    out[3] = w_l * (ny * bz - nz * by)
    out[4] = w_l * (nz * bx - nx * bz)
    out[5] = w_l * (nx * by - ny * bx)
    for k in range(6, 12):
        out[k] = 0.0

    if prm[7] == 0.0 and prm[8] == 0.0:
        return True

    zs = y[8]
    if not zs > 0.0:
        return False
    inv3 = 1.0 / (zs * zs * zs)
    force = 0.0
    if prm[7] != 0.0:
        # image field = -K (nx, ny, 2 nz)
        k_img = prm[6] * inv3
        b1 = -k_img * nx
        b2 = -k_img * ny
        b3 = -2.0 * k_img * nz
        out[3] += prm[5] * (ny * b3 - nz * b2)
        out[4] += prm[5] * (nz * b1 - nx * b3)
        out[5] += prm[5] * (nx * b2 - ny * b1)
        # (mu/2) d/dz (image . n) with n held fixed
        force = prm[9] * (nx * nx + ny * ny + 2.0 * nz * nz) * inv3 / zs

    if prm[8] == 0.0:
        return True
    out[6] = y[9]
    out[7] = y[10]
    out[8] = y[11]
    out[11] = force - prm[10]
    return True


@njit(cache=True, nogil=True)
def _error_norm(y, y_new, err, rtol, atol):
    acc = 0.0
    n = y.shape[0]
    for k in range(n):
        sc = atol + rtol * max(abs(y[k]), abs(y_new[k]))
        e = err[k] / sc
        acc += e * e
    return np.sqrt(acc / n)


@njit(cache=True, nogil=True)
def _normalize_n(y):
    s = np.sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])
    y[0] /= s
    y[1] /= s
    y[2] /= s


@njit(cache=True, nogil=True)
def _initial_step(y0, f0, prm, rtol, atol, max_step, work):
    # Hairer, Norsett & Wanner, Solving ODEs I, sec. II.4
    n = y0.shape[0]
    d0 = 0.0
    d1 = 0.0
    for k in range(n):
        sc = atol + rtol * abs(y0[k])
        d0 += (y0[k] / sc) ** 2
        d1 += (f0[k] / sc) ** 2
    d0 = np.sqrt(d0 / n)
    d1 = np.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = y0 + h0 * f0
    rhs(y1, prm, work)
    d2 = 0.0
    for k in range(n):
        sc = atol + rtol * abs(y0[k])
        d2 += ((work[k] - f0[k]) / sc) ** 2
    d2 = np.sqrt(d2 / n) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, max_step)


@njit(cache=True, nogil=True)
def integrate_dopri5(y0, prm, sample_dt, n_samples, rtol, atol, max_step,
                     renormalize, max_steps):
    """Integrate from t=0, sampling at k*sample_dt for k < n_samples.

    Returns (samples, status, t_fail, n_accepted, n_rejected).  On failure the
    samples array holds everything produced before ``t_fail``; rows after the
    failure are NaN.
    """
    dim = y0.shape[0]
    out = np.full((n_samples, dim), np.nan)
    y = y0.copy()
    for k in range(dim):
        out[0, k] = y[k]
    t_end = sample_dt * (n_samples - 1)
    next_idx = 1

    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    k5 = np.empty(dim)
    k6 = np.empty(dim)
    k7 = np.empty(dim)
    ytmp = np.empty(dim)
    y_new = np.empty(dim)
    err = np.empty(dim)
    work = np.empty(dim)

    if not rhs(y, prm, k1):
        return out, STATUS_GEOMETRY, 0.0, 0, 0
    if n_samples <= 1:
        return out, STATUS_OK, 0.0, 0, 0

    h = _initial_step(y, k1, prm, rtol, atol, max_step, work)
    t = 0.0
    n_acc = 0
    n_rej = 0
    rejected_last = False
    eps = 2.220446049250313e-16

    while next_idx < n_samples:
        if n_acc + n_rej >= max_steps:
            return out, STATUS_MAX_STEPS, t, n_acc, n_rej
        h = min(h, max_step)
        if t_end - t <= 16.0 * eps * abs(t):
            # round-off remainder at the end of the run
            while next_idx < n_samples:
                for k in range(dim):
                    out[next_idx, k] = y[k]
                next_idx += 1
            break
        if t + h > t_end:
            h = t_end - t
        if h <= 16.0 * eps * abs(t):
            return out, STATUS_STEP_UNDERFLOW, t, n_acc, n_rej

        ok = True
        for k in range(dim):
            ytmp[k] = y[k] + h * _A21 * k1[k]
        ok = ok and rhs(ytmp, prm, k2)
        for k in range(dim):
            ytmp[k] = y[k] + h * (_A31 * k1[k] + _A32 * k2[k])
        ok = ok and rhs(ytmp, prm, k3)
        for k in range(dim):
            ytmp[k] = y[k] + h * (_A41 * k1[k] + _A42 * k2[k] + _A43 * k3[k])
        ok = ok and rhs(ytmp, prm, k4)
        for k in range(dim):
            ytmp[k] = y[k] + h * (_A51 * k1[k] + _A52 * k2[k] + _A53 * k3[k] + _A54 * k4[k])
        ok = ok and rhs(ytmp, prm, k5)
        for k in range(dim):
            ytmp[k] = y[k] + h * (_A61 * k1[k] + _A62 * k2[k] + _A63 * k3[k]
                                  + _A64 * k4[k] + _A65 * k5[k])
        ok = ok and rhs(ytmp, prm, k6)
        for k in range(dim):
            y_new[k] = y[k] + h * (_B1 * k1[k] + _B3 * k3[k] + _B4 * k4[k]
                                   + _B5 * k5[k] + _B6 * k6[k])
        ok = ok and rhs(y_new, prm, k7)

        if not ok:
            # a trial stage dipped below the surface: shrink and retry, give up
            # only when the accepted state itself is infeasible
            n_rej += 1
            h *= 0.25
            rejected_last = True
            if h <= 16.0 * eps * abs(t):
                return out, STATUS_GEOMETRY, t, n_acc, n_rej
            continue

        for k in range(dim):
            err[k] = h * (_E1 * k1[k] + _E3 * k3[k] + _E4 * k4[k] + _E5 * k5[k]
                          + _E6 * k6[k] + _E7 * k7[k])
        en = _error_norm(y, y_new, err, rtol, atol)

        if en <= 1.0:
            t_new = t + h
            # dense output for every sample time inside (t, t_new]
            while next_idx < n_samples and next_idx * sample_dt <= t_new * (1.0 + 4.0 * eps):
                ts = next_idx * sample_dt
                th = (ts - t) / h
                if th > 1.0:
                    th = 1.0
                t1 = th
                t2 = th * th
                t3 = t2 * th
                t4 = t3 * th
                for k in range(dim):
                    acc = 0.0
                    acc += k1[k] * (DENSE_P[0, 0] * t1 + DENSE_P[0, 1] * t2
                                    + DENSE_P[0, 2] * t3 + DENSE_P[0, 3] * t4)
                    acc += k3[k] * (DENSE_P[2, 1] * t2 + DENSE_P[2, 2] * t3 + DENSE_P[2, 3] * t4)
                    acc += k4[k] * (DENSE_P[3, 1] * t2 + DENSE_P[3, 2] * t3 + DENSE_P[3, 3] * t4)
                    acc += k5[k] * (DENSE_P[4, 1] * t2 + DENSE_P[4, 2] * t3 + DENSE_P[4, 3] * t4)
                    acc += k6[k] * (DENSE_P[5, 1] * t2 + DENSE_P[5, 2] * t3 + DENSE_P[5, 3] * t4)
                    acc += k7[k] * (DENSE_P[6, 1] * t2 + DENSE_P[6, 2] * t3 + DENSE_P[6, 3] * t4)
                    out[next_idx, k] = y[k] + h * acc
                if renormalize:
                    s = np.sqrt(out[next_idx, 0] ** 2 + out[next_idx, 1] ** 2
                                + out[next_idx, 2] ** 2)
                    out[next_idx, 0] /= s
                    out[next_idx, 1] /= s
                    out[next_idx, 2] /= s
                next_idx += 1

            for k in range(dim):
                y[k] = y_new[k]
            if renormalize:
                _normalize_n(y)
                rhs(y, prm, k1)
            else:
                for k in range(dim):
                    k1[k] = k7[k]
            t = t_new
            n_acc += 1

            if en == 0.0:
                fac = 10.0
            else:
                fac = min(10.0, 0.9 * en ** -0.2)
            if rejected_last:
                fac = min(1.0, fac)
            h *= fac
            rejected_last = False
        else:
            n_rej += 1
            h *= max(0.2, 0.9 * en ** -0.2)
            rejected_last = True
            if h <= 16.0 * eps * abs(t):
                return out, STATUS_STEP_UNDERFLOW, t, n_acc, n_rej

    return out, STATUS_OK, t, n_acc, n_rej

"""Numba kernels for the projected nonlinear Gauss-Seidel sweeps.

Every nodal solve exploits that the center value t enters the discrete
Hessian only through the diagonal second differences (s_i - 2t)/h^2 (the
cross stencil omits the center), so F as a function of t is piecewise
linear and strictly decreasing, and the nodal equation has a closed-form
root for every operator kind.  Penalized nodal equations get a closed-form
branch solve for the piecewise-linear family and a safeguarded bisection
fallback otherwise.

Operator kind codes: 0 laplace, 1 pucci_plus, 2 pucci_minus,
3 bellman_min, 4 bellman_max.  Penalty codes: -1 none, 0 piecewise_linear,
1 smooth_exp.  Obstacle modes: 0 none, 1 lower clip (max), 2 upper clip (min).
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def beta_value(pen_kind, eps, cap_n, t):
    if pen_kind == 0:
        b = t / (eps * eps) if t < 0.0 else 0.0
    else:
        b = -np.exp(min(-t / eps, 700.0))
    if cap_n > 0.0:
        if b > cap_n:
            b = cap_n
        elif b < -cap_n:
            b = -cap_n
    return b


@njit(cache=True)
def _f1(kind, lam, Lam, cmin, cmax, H):
    if kind == 0:
        return H
    if kind == 1:
        return Lam * H if H >= 0.0 else lam * H
    if kind == 2:
        return lam * H if H >= 0.0 else Lam * H
    if kind == 3:
        return cmin * H if H >= 0.0 else cmax * H
    return cmax * H if H >= 0.0 else cmin * H


@njit(cache=True)
def _finv1(kind, lam, Lam, cmin, cmax, g):
    # root H of F(H) = g
    if kind == 0:
        return g
    if kind == 1:
        return g / Lam if g >= 0.0 else g / lam
    if kind == 2:
        return g / lam if g >= 0.0 else g / Lam
    if kind == 3:
        return g / cmin if g >= 0.0 else g / cmax
    return g / cmax if g >= 0.0 else g / cmin


@njit(cache=True)
def _slopes1(kind, lam, Lam, cmin, cmax):
    # (slope for H >= 0, slope for H < 0)
    if kind == 0:
        return 1.0, 1.0
    if kind == 1:
        return Lam, lam
    if kind == 2:
        return lam, Lam
    if kind == 3:
        return cmin, cmax
    return cmax, cmin


@njit(cache=True)
def _node1_plain(kind, lam, Lam, cmin, cmax, s, h2, g):
    return 0.5 * (s - _finv1(kind, lam, Lam, cmin, cmax, g) * h2)


@njit(cache=True)
def _node1_pen_bisect(kind, lam, Lam, cmin, cmax, s, h2, g,
                      pen_kind, eps, cap_n, phi, t0):
    # G(t) = F(H(t)) - beta(t - phi) - g is strictly decreasing with
    # G(t0) >= 0 (beta <= 0 at the unpenalized root), so the root is >= t0.
    lo = t0
    d = max(eps * eps, 1e-8)
    hi = t0 + d
    for _ in range(200):
        H = (s - 2.0 * hi) / h2
        gv = _f1(kind, lam, Lam, cmin, cmax, H) - beta_value(pen_kind, eps, cap_n, hi - phi) - g
        if gv <= 0.0:
            break
        lo = hi
        d *= 2.0
        hi = t0 + d
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        H = (s - 2.0 * mid) / h2
        gv = _f1(kind, lam, Lam, cmin, cmax, H) - beta_value(pen_kind, eps, cap_n, mid - phi) - g
        if gv > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def _node1_pen(kind, lam, Lam, cmin, cmax, s, h2, g, pen_kind, eps, cap_n, phi):
    t0 = _node1_plain(kind, lam, Lam, cmin, cmax, s, h2, g)
    if pen_kind == 0:
        if t0 >= phi:
            return t0
        ie = 1.0 / (eps * eps)
        cpos, cneg = _slopes1(kind, lam, Lam, cmin, cmax)
        # linear branch: c*(s - 2t)/h2 = (t - phi)*ie + g
        for br in range(2):
            c = cpos if br == 0 else cneg
            t = (g - phi * ie - c * s / h2) / (-2.0 * c / h2 - ie)
            H = (s - 2.0 * t) / h2
            sign_ok = H >= 0.0 if br == 0 else H <= 0.0
            if sign_ok and t <= phi and (cap_n <= 0.0 or (t - phi) * ie >= -cap_n):
                return t
        if cap_n > 0.0:
            # saturated branch: beta = -cap_n
            t = _node1_plain(kind, lam, Lam, cmin, cmax, s, h2, g - cap_n)
            if t <= phi and (t - phi) * ie <= -cap_n:
                return t
    return _node1_pen_bisect(kind, lam, Lam, cmin, cmax, s, h2, g,
                             pen_kind, eps, cap_n, phi, t0)


@njit(cache=True)
def gauss_seidel_1d(v, f, obst, obs_mode, kind, lam, Lam, cmin, cmax, h2,
                    pen_kind, eps, cap_n, phi_pen, nsweeps, start_rev):
    m = v.shape[0]
    maxupd = 0.0
    for sw in range(nsweeps):
        rev = (start_rev + sw) % 2 == 1
        maxupd = 0.0
        for idx in range(m - 2):
            i = (m - 2 - idx) if rev else (idx + 1)
            s = v[i - 1] + v[i + 1]
            if pen_kind >= 0:
                t = _node1_pen(kind, lam, Lam, cmin, cmax, s, h2, f[i],
                               pen_kind, eps, cap_n, phi_pen[i])
            else:
                t = _node1_plain(kind, lam, Lam, cmin, cmax, s, h2, f[i])
            if obs_mode == 1:
                t = max(t, obst[i])
            elif obs_mode == 2:
                t = min(t, obst[i])
            du = abs(t - v[i])
            if du > maxupd:
                maxupd = du
            v[i] = t
    return maxupd


@njit(cache=True)
def _f2(kind, lam, Lam, a11, a12, a22, mu, d, b):
    # eigenvalues are mu +- r with r = hypot(d, b)
    if kind == 0:
        return 2.0 * mu
    if kind == 1 or kind == 2:
        r = np.sqrt(d * d + b * b)
        if kind == 1:
            if mu >= r:
                return 2.0 * Lam * mu
            if mu <= -r:
                return 2.0 * lam * mu
            return (Lam + lam) * mu + (Lam - lam) * r
        if mu >= r:
            return 2.0 * lam * mu
        if mu <= -r:
            return 2.0 * Lam * mu
        return (lam + Lam) * mu - (Lam - lam) * r
    best = 0.0
    for k in range(a11.size):
        val = (a11[k] + a22[k]) * mu + (a11[k] - a22[k]) * d + 2.0 * a12[k] * b
        if k == 0:
            best = val
        elif kind == 3:
            best = min(best, val)
        else:
            best = max(best, val)
    return best


@njit(cache=True)
def _finv2(kind, lam, Lam, a11, a12, a22, d, b, g):
    # root mu of F2(mu) = g
    if kind == 0:
        return 0.5 * g
    if kind == 1 or kind == 2:
        r = np.sqrt(d * d + b * b)
        if kind == 1:
            if g >= 2.0 * Lam * r:
                return g / (2.0 * Lam)
            if g <= -2.0 * lam * r:
                return g / (2.0 * lam)
            return (g - (Lam - lam) * r) / (Lam + lam)
        if g >= 2.0 * lam * r:
            return g / (2.0 * lam)
        if g <= -2.0 * Lam * r:
            return g / (2.0 * Lam)
        return (g + (Lam - lam) * r) / (lam + Lam)
    # Bellman: Howard iteration over the active coefficient matrix
    k = 0
    mu = 0.0
    for _ in range(a11.size + 3):
        mslope = a11[k] + a22[k]
        boff = (a11[k] - a22[k]) * d + 2.0 * a12[k] * b
        mu = (g - boff) / mslope
        kb = 0
        best = (a11[0] + a22[0]) * mu + (a11[0] - a22[0]) * d + 2.0 * a12[0] * b
        for kk in range(1, a11.size):
            val = (a11[kk] + a22[kk]) * mu + (a11[kk] - a22[kk]) * d + 2.0 * a12[kk] * b
            better = val < best if kind == 3 else val > best
            if better:
                best = val
                kb = kk
        if kb == k:
            break
        k = kb
    return mu


@njit(cache=True)
def _node2_plain(kind, lam, Lam, a11, a12, a22, s1, s2, b, h2, g):
    d = (s1 - s2) / (2.0 * h2)
    mu = _finv2(kind, lam, Lam, a11, a12, a22, d, b, g)
    return 0.25 * (s1 + s2 - 2.0 * h2 * mu)


@njit(cache=True)
def _node2_pen(kind, lam, Lam, a11, a12, a22, s1, s2, b, h2, g,
               pen_kind, eps, cap_n, phi):
    t0 = _node2_plain(kind, lam, Lam, a11, a12, a22, s1, s2, b, h2, g)
    if pen_kind == 0 and t0 >= phi:
        return t0
    d = (s1 - s2) / (2.0 * h2)
    lo = t0
    step = max(eps * eps, 1e-8)
    hi = t0 + step
    for _ in range(200):
        mu = (s1 + s2 - 4.0 * hi) / (2.0 * h2)
        gv = _f2(kind, lam, Lam, a11, a12, a22, mu, d, b) \
            - beta_value(pen_kind, eps, cap_n, hi - phi) - g
        if gv <= 0.0:
            break
        lo = hi
        step *= 2.0
        hi = t0 + step
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        mu = (s1 + s2 - 4.0 * mid) / (2.0 * h2)
        gv = _f2(kind, lam, Lam, a11, a12, a22, mu, d, b) \
            - beta_value(pen_kind, eps, cap_n, mid - phi) - g
        if gv > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def gauss_seidel_2d(v, f, obst, obs_mode, kind, lam, Lam, a11, a12, a22, h2,
                    pen_kind, eps, cap_n, phi_pen, nsweeps, start_rev):
    m0, m1 = v.shape
    maxupd = 0.0
    for sw in range(nsweeps):
        rev = (start_rev + sw) % 2 == 1
        maxupd = 0.0
        for ii in range(m0 - 2):
            i = (m0 - 2 - ii) if rev else (ii + 1)
            for jj in range(m1 - 2):
                j = (m1 - 2 - jj) if rev else (jj + 1)
                s1 = v[i - 1, j] + v[i + 1, j]
                s2 = v[i, j - 1] + v[i, j + 1]
                b = (v[i + 1, j + 1] + v[i - 1, j - 1]
                     - v[i + 1, j - 1] - v[i - 1, j + 1]) / (4.0 * h2)
                if pen_kind >= 0:
                    t = _node2_pen(kind, lam, Lam, a11, a12, a22, s1, s2, b, h2,
                                   f[i, j], pen_kind, eps, cap_n, phi_pen[i, j])
                else:
                    t = _node2_plain(kind, lam, Lam, a11, a12, a22, s1, s2, b, h2,
                                     f[i, j])
                if obs_mode == 1:
                    t = max(t, obst[i, j])
                elif obs_mode == 2:
                    t = min(t, obst[i, j])
                du = abs(t - v[i, j])
                if du > maxupd:
                    maxupd = du
                v[i, j] = t
    return maxupd

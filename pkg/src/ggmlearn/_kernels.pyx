# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner-loop kernels.

Same functions and semantics as ``_kernels_py``; see that module for the
Gram-form conventions. Discrete outputs (selection orders, subsets, masks)
agree exactly with the numpy version on inputs without near ties;
floating point outputs agree to rounding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY, isinf, NAN, isnan
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double COLLINEAR_TOL = 1e-12
TIE_TOL = 1e-12


cdef void _project(const double[::1] v, double radius, double[::1] out, double* work) noexcept nogil:
    # Michelot's fixed point: drop entries below the current threshold and
    # recompute it from the survivors until nothing changes.
    cdef Py_ssize_t n = v.shape[0], k, cnt, kept
    cdef double total = 0.0, theta, a
    if radius <= 0:
        for k in range(n):
            out[k] = 0.0
        return
    for k in range(n):
        a = fabs(v[k])
        work[k] = a
        total += a
    if total <= radius:
        for k in range(n):
            out[k] = v[k]
        return
    cnt = n
    theta = (total - radius) / cnt
    while True:
        kept = 0
        total = 0.0
        for k in range(cnt):
            if work[k] > theta:
                work[kept] = work[k]
                total += work[k]
                kept += 1
        if kept == cnt:
            break
        cnt = kept
        theta = (total - radius) / cnt
    for k in range(n):
        a = fabs(v[k]) - theta
        if a <= 0:
            out[k] = 0.0
        elif v[k] > 0:
            out[k] = a
        else:
            out[k] = -a


def project_l1_ball(v, double radius):
    cdef const double[::1] vv = np.ascontiguousarray(v, dtype=float)
    out = np.zeros(vv.shape[0])
    cdef double[::1] o = out
    cdef double* work = <double*>malloc(max(vv.shape[0], 1) * sizeof(double))
    try:
        _project(vv, radius, o, work)
    finally:
        free(work)
    return out


def omp_gram(G, b, double yy, candidates, Py_ssize_t t, double tie_tol=TIE_TOL):
    cdef const double[:, ::1] g = np.ascontiguousarray(G, dtype=float)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=float)
    cdef const cnp.int64_t[::1] cand = np.ascontiguousarray(candidates, dtype=np.int64)
    cdef Py_ssize_t p = cand.shape[0], steps = min(t, p), s, r, k, pick, piv
    cdef double[::1] gdiag = np.empty(p), rdiag = np.empty(p), rcorr = np.empty(p)
    cdef double[:, ::1] rows = np.zeros((max(steps, 1), p))
    cdef double[::1] qs = np.zeros(max(steps, 1))
    cdef cnp.uint8_t[::1] active = np.ones(p, dtype=np.uint8)
    order = np.empty(steps, dtype=np.int64)
    reductions = np.empty(steps)
    cdef cnp.int64_t[::1] ov = order
    cdef double[::1] rv = reductions
    cdef double best, sc, q, coef, sq, thresh
    cdef Py_ssize_t done = 0
    for k in range(p):
        gdiag[k] = g[cand[k], cand[k]]
        rdiag[k] = gdiag[k]
        rcorr[k] = bv[cand[k]]
    with nogil:
        for s in range(steps):
            best = -INFINITY
            for k in range(p):
                if active[k] and rdiag[k] > COLLINEAR_TOL * max(gdiag[k], 1e-300):
                    sc = rcorr[k] * rcorr[k] / rdiag[k]
                    if sc > best:
                        best = sc
            if isinf(best) and best < 0:
                break
            thresh = best - tie_tol * fabs(best)
            pick = -1
            for k in range(p):
                if active[k] and rdiag[k] > COLLINEAR_TOL * max(gdiag[k], 1e-300):
                    if rcorr[k] * rcorr[k] / rdiag[k] >= thresh:
                        pick = k
                        break
            piv = cand[pick]
            q = bv[piv]
            for k in range(p):
                rows[s, k] = g[piv, cand[k]]
            for r in range(s):
                coef = rows[r, pick]
                for k in range(p):
                    rows[s, k] -= coef * rows[r, k]
                q -= coef * qs[r]
            sq = sqrt(rdiag[pick])
            for k in range(p):
                rows[s, k] /= sq
            q /= sq
            qs[s] = q
            for k in range(p):
                rdiag[k] -= rows[s, k] * rows[s, k]
                rcorr[k] -= rows[s, k] * q
            active[pick] = 0
            ov[s] = piv
            rv[s] = q * q
            done += 1
    return order[:done].copy(), reductions[:done].copy()


cdef double _rms_idx(const double[:, ::1] g, const double[::1] bv, double yy, Py_ssize_t* idx, Py_ssize_t k,
                     double* chol, double* z) noexcept nogil:
    """Residual mean square on support ``idx[:k]``; NaN when collinear."""
    cdef Py_ssize_t a, c, e
    cdef double s, dmax = 0.0, dmin = INFINITY, out = yy
    if k == 0:
        return yy
    for a in range(k):
        if g[idx[a], idx[a]] > dmax:
            dmax = g[idx[a], idx[a]]
    for a in range(k):
        for c in range(a + 1):
            s = g[idx[a], idx[c]]
            for e in range(c):
                s -= chol[a * k + e] * chol[c * k + e]
            if a == c:
                if s <= 0:
                    return NAN
                chol[a * k + a] = sqrt(s)
                if s < dmin:
                    dmin = s
            else:
                chol[a * k + c] = s / chol[c * k + c]
    if dmin <= COLLINEAR_TOL * dmax:
        return NAN
    for a in range(k):
        s = bv[idx[a]]
        for e in range(a):
            s -= chol[a * k + e] * z[e]
        z[a] = s / chol[a * k + a]
        out -= z[a] * z[a]
    return out


def residual_variance(G, b, double yy, idx, double m):
    cdef const double[:, ::1] g = np.ascontiguousarray(G, dtype=float)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=float)
    cdef const Py_ssize_t[::1] iv = np.ascontiguousarray(idx, dtype=np.intp)
    cdef Py_ssize_t k = iv.shape[0]
    cdef double* chol = <double*>malloc(max(k * k, 1) * sizeof(double))
    cdef double* z = <double*>malloc(max(k, 1) * sizeof(double))
    cdef double r
    try:
        r = _rms_idx(g, bv, yy, &iv[0] if k else NULL, k, chol, z)
    finally:
        free(chol)
        free(z)
    if isinf(m):
        return r
    return r * m / (m - k)


def prune_gram(G, b, double yy, order, double threshold, double m):
    cdef const double[:, ::1] g = np.ascontiguousarray(G, dtype=float)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=float)
    cdef const Py_ssize_t[::1] ordv = np.ascontiguousarray(order, dtype=np.intp)
    cdef Py_ssize_t k = ordv.shape[0], pos, a, nk, cur_n = k
    keep = np.ones(k, dtype=bool)
    cdef cnp.uint8_t[::1] kv = keep.view(np.uint8)
    cdef Py_ssize_t* cur = <Py_ssize_t*>malloc(max(k, 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t* trial = <Py_ssize_t*>malloc(max(k, 1) * sizeof(Py_ssize_t))
    cdef double* chol = <double*>malloc(max(k * k, 1) * sizeof(double))
    cdef double* z = <double*>malloc(max(k, 1) * sizeof(double))
    cdef double var_s, var_t
    cdef bint pop = isinf(m)
    try:
        with nogil:
            for a in range(k):
                cur[a] = ordv[a]
            var_s = _rms_idx(g, bv, yy, cur, cur_n, chol, z)
            if not pop:
                var_s = var_s * m / (m - cur_n)
            for pos in range(k):
                nk = 0
                for a in range(cur_n):
                    if cur[a] != ordv[pos]:
                        trial[nk] = cur[a]
                        nk += 1
                var_t = _rms_idx(g, bv, yy, trial, nk, chol, z)
                if not pop:
                    var_t = var_t * m / (m - nk)
                if var_t - var_s < threshold:
                    kv[pos] = 0
                    for a in range(nk):
                        cur[a] = trial[a]
                    cur_n = nk
                    var_s = var_t
    finally:
        free(cur)
        free(trial)
        free(chol)
        free(z)
    return keep


def best_subsets(G, b, double yy, candidates, Py_ssize_t kmax, double tie_tol=1e-10, chunk=None):
    cdef const double[:, ::1] g = np.ascontiguousarray(G, dtype=float)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=float)
    cand_arr = np.ascontiguousarray(candidates, dtype=np.int64)
    cdef const cnp.int64_t[::1] cand = cand_arr
    cdef Py_ssize_t p = cand.shape[0], k, a, best_pos, pos
    cdef Py_ssize_t* comb
    cdef Py_ssize_t* idx
    cdef double* chol
    cdef double* z
    cdef double val, best, best_val
    subsets = [np.zeros(0, dtype=np.int64)]
    values = [yy]
    for k in range(1, min(kmax, p) + 1):
        comb = <Py_ssize_t*>malloc((k + 1) * sizeof(Py_ssize_t))
        idx = <Py_ssize_t*>malloc(k * sizeof(Py_ssize_t))
        chol = <double*>malloc(k * k * sizeof(double))
        z = <double*>malloc(k * sizeof(double))
        try:
            with nogil:
                for a in range(k):
                    comb[a] = a
                comb[k] = p
                # first pass: minimum; second pass: colex-first within tolerance
                best = INFINITY
                while True:
                    for a in range(k):
                        idx[a] = cand[comb[a]]
                    val = _rms_idx(g, bv, yy, idx, k, chol, z)
                    if not isnan(val) and val < best:
                        best = val
                    a = 0
                    while a < k and comb[a] + 1 == comb[a + 1]:
                        a += 1
                    if a == k:
                        break
                    comb[a] += 1
                    for pos in range(a):
                        comb[pos] = pos
                for a in range(k):
                    comb[a] = a
                best_val = INFINITY
                best_pos = -1
                while True:
                    for a in range(k):
                        idx[a] = cand[comb[a]]
                    val = _rms_idx(g, bv, yy, idx, k, chol, z)
                    if not isnan(val) and val <= best + tie_tol * fabs(yy):
                        best_val = val
                        best_pos = 1
                        break
                    a = 0
                    while a < k and comb[a] + 1 == comb[a + 1]:
                        a += 1
                    if a == k:
                        break
                    comb[a] += 1
                    for pos in range(a):
                        comb[pos] = pos
            if best_pos < 0:
                subsets.append(cand_arr[:k].copy())
                values.append(INFINITY)
            else:
                subsets.append(np.array([cand[comb[a]] for a in range(k)], dtype=np.int64))
                values.append(best_val)
        finally:
            free(comb)
            free(idx)
            free(chol)
            free(z)
    return subsets, np.array(values)


cdef double _quad(const double[:, ::1] g, const double[::1] br, double* x, double* gx, Py_ssize_t p) noexcept nogil:
    """Fill ``gx = G x`` and return ``0.5 x.G.x - b.x``."""
    cdef Py_ssize_t r, c
    cdef double s, f = 0.0
    for r in range(p):
        s = 0.0
        for c in range(p):
            s += g[r, c] * x[c]
        gx[r] = s
    for r in range(p):
        f += 0.5 * x[r] * gx[r] - br[r] * x[r]
    return f


cdef double _power_lmax(const double[:, ::1] g, Py_ssize_t p, double* v, double* w, int iters) noexcept nogil:
    cdef Py_ssize_t r, c, it
    cdef double lam = 0.0, nw, s
    for r in range(p):
        v[r] = 1.0 / sqrt(<double>p)
    for it in range(iters):
        nw = 0.0
        lam = 0.0
        for r in range(p):
            s = 0.0
            for c in range(p):
                s += g[r, c] * v[c]
            w[r] = s
            nw += s * s
            lam += v[r] * s
        if nw == 0.0:
            return 0.0
        nw = sqrt(nw)
        for r in range(p):
            v[r] = w[r] / nw
    s = 0.0
    for r in range(p):
        nw = 0.0
        for c in range(p):
            nw += g[r, c] * v[c]
        s += v[r] * nw
    return lam if lam > s else s


cdef double _gap(double* gw, const double[::1] br, double* w, Py_ssize_t p, double radius) noexcept nogil:
    cdef Py_ssize_t r
    cdef double gr, dot = 0.0, mx = 0.0
    for r in range(p):
        gr = gw[r] - br[r]
        dot += gr * w[r]
        if fabs(gr) > mx:
            mx = fabs(gr)
    return dot + radius * mx


def l1_ls_gram(G, b, double radius, Py_ssize_t free=-1, double tol=1e-8, double scale=1.0,
               Py_ssize_t max_iter=100000, x0=None):
    from . import _kernels_py

    Gf = np.asarray(G, dtype=float)
    bf = np.asarray(b, dtype=float)
    n = bf.size
    if free >= 0:
        rest = np.array([k for k in range(n) if k != free], dtype=np.int64)
        gaa = Gf[free, free]
        gwa = Gf[rest, free]
        Gr_arr = Gf[np.ix_(rest, rest)] - np.outer(gwa, gwa) / gaa
        br_arr = bf[rest] - gwa * bf[free] / gaa
    else:
        rest = np.arange(n)
        Gr_arr = Gf
        br_arr = bf
    cdef Py_ssize_t p = rest.size
    if p == 0 or radius <= 0:
        return _kernels_py.l1_ls_gram(G, b, radius, free, tol, scale, max_iter, x0)

    cdef const double[:, ::1] gr = np.ascontiguousarray(Gr_arr)
    cdef const double[::1] br = np.ascontiguousarray(br_arr)
    w_arr = np.zeros(p) if x0 is None else _kernels_py.project_l1_ball(np.asarray(x0, float)[rest], radius)
    buf = np.zeros((9, p))
    cdef double[:, ::1] bb = buf
    cdef double* w = &bb[0, 0]
    cdef double* gw = &bb[1, 0]
    cdef double* y = &bb[2, 0]
    cdef double* gy = &bb[3, 0]
    cdef double* z = &bb[4, 0]
    cdef double* gz = &bb[5, 0]
    cdef double* wprev = &bb[6, 0]
    cdef double[::1] step = np.zeros(p)
    cdef double[::1] zv = np.zeros(p)
    cdef double* work = &bb[7, 0]
    cdef double* work2 = &bb[8, 0]
    cdef Py_ssize_t r, it, used = max_iter
    cdef double lip, fw, fy, fz, t = 1.0, t_next, lin, dd, gap = INFINITY, target = tol * scale
    cdef bint ok = False
    for r in range(p):
        w[r] = w_arr[r]
    with nogil:
        lip = 1.05 * _power_lmax(gr, p, work, work2, 100)
        if lip <= 0:
            lip = 1.0
        fw = _quad(gr, br, w, gw, p)
        for r in range(p):
            y[r] = w[r]
            wprev[r] = w[r]
        for it in range(1, max_iter + 1):
            gap = _gap(gw, br, w, p, radius)
            if gap <= target:
                ok = True
                used = it - 1
                break
            fy = _quad(gr, br, y, gy, p)
            while True:
                for r in range(p):
                    step[r] = y[r] - (gy[r] - br[r]) / lip
                _project(step, radius, zv, work)
                for r in range(p):
                    z[r] = zv[r]
                fz = _quad(gr, br, z, gz, p)
                lin = 0.0
                dd = 0.0
                for r in range(p):
                    lin += (gy[r] - br[r]) * (z[r] - y[r])
                    dd += (z[r] - y[r]) * (z[r] - y[r])
                if fz <= fy + lin + 0.5 * lip * dd + 1e-14 * fabs(fy):
                    break
                lip *= 2.0
            # restart the momentum once it points uphill
            lin = 0.0
            for r in range(p):
                lin += (y[r] - z[r]) * (z[r] - w[r])
            if lin > 0.0:
                t = 1.0
            t_next = 0.5 * (1.0 + sqrt(1.0 + 4.0 * t * t))
            for r in range(p):
                wprev[r] = w[r]
            if fz <= fw:
                for r in range(p):
                    w[r] = z[r]
                    gw[r] = gz[r]
                fw = fz
            for r in range(p):
                y[r] = w[r] + (t / t_next) * (z[r] - w[r]) + ((t - 1.0) / t_next) * (w[r] - wprev[r])
            t = t_next
        if not ok:
            gap = _gap(gw, br, w, p, radius)
            ok = gap <= target
    wres = buf[0].copy()
    x = np.zeros(n)
    x[rest] = wres
    if free >= 0:
        x[free] = (bf[free] - gwa @ wres) / gaa
    return x, float(gap), int(used), bool(ok)

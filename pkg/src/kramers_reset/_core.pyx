# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, language_level=3
"""Compiled ensemble kernel: stochastic Heun + resets + first-passage detection.

Arithmetic is written in the same order as the pure-Python step so that a
trajectory driven by the same stream reproduces bit for bit.
"""

from libc.math cimport sqrt, log, cos, sin, ceil, floor, isfinite, M_PI
from libc.stdint cimport uint64_t, int64_t, int8_t
from cython.parallel cimport prange, parallel

import numpy as np

cdef extern from *:
    """
    #define KR_GOLDEN 0x9E3779B97F4A7C15ULL
    #define KR_INV53 (1.0 / 9007199254740992.0)
    """
    const uint64_t GOLDEN "KR_GOLDEN"
    const double INV53 "KR_INV53"

cdef enum:
    ST_ESCAPED = 0
    ST_CENSORED = 1
    ST_BLOWUP = 2

ESCAPED = ST_ESCAPED
CENSORED = ST_CENSORED
BLOWUP = ST_BLOWUP


cdef struct Model:
    double alpha
    double beta
    double eta
    double amp
    double x0
    double v0
    double dt
    double sqrt_dt
    double absorb_x
    double validate_x
    double reset_x
    int64_t n_max
    int kind
    double sched
    int validate


cdef inline uint64_t fmix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t splitmix(uint64_t x) noexcept nogil:
    return fmix(x + <uint64_t>GOLDEN)


cdef inline uint64_t skey(uint64_t seed, uint64_t index, uint64_t sub) noexcept nogil:
    cdef uint64_t k = splitmix(seed)
    k = splitmix(k ^ index)
    return splitmix(k + sub)


cdef inline uint64_t raw(uint64_t key, uint64_t ctr) noexcept nogil:
    return fmix(key + (ctr + 1) * <uint64_t>GOLDEN)


cdef inline double u_open0(uint64_t key, uint64_t ctr) noexcept nogil:
    return <double>((raw(key, ctr) >> 11) + 1) * INV53


cdef inline double u_closed0(uint64_t key, uint64_t ctr) noexcept nogil:
    return <double>(raw(key, ctr) >> 11) * INV53


cdef inline double grad(const Model* m, double x) noexcept nogil:
    return m.alpha * x - m.beta * x * x


cdef inline int64_t next_reset_step(const Model* m, int64_t k, int64_t n_res,
                                    uint64_t rkey, int64_t* rctr) noexcept nogil:
    cdef double epoch
    cdef int64_t s
    if m.kind == 0:
        return -1
    if m.kind == 1:
        epoch = n_res * m.sched + m.sched
    else:
        epoch = k * m.dt + (-log(u_open0(rkey, <uint64_t>rctr[0])) / m.sched)
        rctr[0] += 1
    s = <int64_t>ceil(epoch / m.dt - 1e-9)
    if s <= k:
        s = k + 1
    return s


cdef int run_one(const Model* m, uint64_t nkey, uint64_t rkey,
                 int64_t nctr0, int64_t rctr0,
                 double* fpt, int64_t* n_resets, double* max_x, int8_t* comeback,
                 int64_t* nctr_out, int64_t* rctr_out, double* bad) noexcept nogil:
    """Integrate one trajectory; returns ST_ESCAPED, ST_CENSORED or ST_BLOWUP."""
    cdef double x = m.x0, v = m.v0, xn, vn, xp, vp, ax, av, bv, noise
    cdef double z = 0.0, z0 = 0.0, z1 = 0.0, r, th, mx = m.x0
    cdef double half_dt = 0.5 * m.dt
    cdef int64_t k = 0, n_res = 0, rctr = rctr0, next_rs
    cdef uint64_t c
    cdef int status = ST_CENSORED
    comeback[0] = 0
    next_rs = next_reset_step(m, 0, 0, rkey, &rctr)
    while k < m.n_max:
        c = <uint64_t>(nctr0 + k)
        if (c & 1) == 0 or k == 0:
            r = sqrt(-2.0 * log(u_open0(nkey, 2 * (c >> 1))))
            th = 2.0 * M_PI * u_closed0(nkey, 2 * (c >> 1) + 1)
            z0 = r * cos(th)
            z1 = r * sin(th)
        z = z1 if (c & 1) else z0
        noise = m.amp * (m.sqrt_dt * z)
        ax = v
        av = -m.eta * v - grad(m, x)
        xp = x + m.dt * ax
        vp = v + m.dt * av + noise
        bv = -m.eta * vp - grad(m, xp)
        xn = x + half_dt * (ax + vp)
        vn = v + half_dt * (av + bv) + noise
        k += 1
        if not (isfinite(xn) and isfinite(vn)):
            bad[0] = xn; bad[1] = vn; bad[2] = k * m.dt
            status = ST_BLOWUP
            break
        if xn > mx:
            mx = xn
        if xn >= m.absorb_x:
            fpt[0] = (k - 1) * m.dt + m.dt * (m.absorb_x - x) / (xn - x)
            status = ST_ESCAPED
            if m.validate:
                x = xn
                v = vn
                while k < m.n_max:
                    c = <uint64_t>(nctr0 + k)
                    if (c & 1) == 0:
                        r = sqrt(-2.0 * log(u_open0(nkey, 2 * (c >> 1))))
                        th = 2.0 * M_PI * u_closed0(nkey, 2 * (c >> 1) + 1)
                        z0 = r * cos(th)
                        z1 = r * sin(th)
                    z = z1 if (c & 1) else z0
                    noise = m.amp * (m.sqrt_dt * z)
                    ax = v
                    av = -m.eta * v - grad(m, x)
                    xp = x + m.dt * ax
                    vp = v + m.dt * av + noise
                    bv = -m.eta * vp - grad(m, xp)
                    xn = x + half_dt * (ax + vp)
                    vn = v + half_dt * (av + bv) + noise
                    k += 1
                    if not (isfinite(xn) and isfinite(vn)):
                        comeback[0] = 3
                        break
                    x = xn
                    v = vn
                    if x > m.validate_x:
                        comeback[0] = 2
                        break
                    if x < m.absorb_x:
                        comeback[0] = 1
                        break
            break
        x = xn
        v = vn
        if next_rs >= 0 and k >= next_rs:
            x = m.reset_x
            v = 0.0
            n_res += 1
            next_rs = next_reset_step(m, k, n_res, rkey, &rctr)
    n_resets[0] = n_res
    max_x[0] = mx
    nctr_out[0] = nctr0 + k
    rctr_out[0] = rctr
    return status


cdef Model make_model(double alpha, double beta, double eta, double amp, double x0, double v0,
                      double dt, double t_max, double absorb_x, double validate_x,
                      double reset_x, int kind, double sched, bint validate):
    cdef Model m
    m.alpha = alpha
    m.beta = beta
    m.eta = eta
    m.amp = amp
    m.x0 = x0
    m.v0 = v0
    m.dt = dt
    m.sqrt_dt = sqrt(dt)
    m.absorb_x = absorb_x
    m.validate_x = validate_x
    m.reset_x = reset_x
    m.n_max = <int64_t>floor(t_max / dt + 1e-9)
    m.kind = kind
    m.sched = sched
    m.validate = 1 if validate else 0
    return m


def run_ensemble(double alpha, double beta, double eta, double amp, double x0, double v0,
                 double dt, double t_max, double absorb_x, double validate_x,
                 double reset_x, int kind, double sched, uint64_t master_seed,
                 int64_t start_index, Py_ssize_t n, int n_threads=1, bint validate=False):
    """Run ``n`` trajectories with indices ``start_index .. start_index + n - 1``.

    Returns a dict of per-trajectory arrays (fpt, n_resets, status, max_x,
    comeback, bad). Output is independent of ``n_threads``.
    """
    cdef Model m = make_model(alpha, beta, eta, amp, x0, v0, dt, t_max, absorb_x,
                              validate_x, reset_x, kind, sched, validate)
    fpt_a = np.full(n, np.nan)
    nres_a = np.zeros(n, dtype=np.int64)
    status_a = np.zeros(n, dtype=np.int8)
    maxx_a = np.zeros(n)
    cb_a = np.zeros(n, dtype=np.int8)
    bad_a = np.full((n, 3), np.nan)
    nctr_a = np.zeros(n, dtype=np.int64)
    rctr_a = np.zeros(n, dtype=np.int64)
    cdef double[::1] fpt = fpt_a
    cdef int64_t[::1] nres = nres_a
    cdef int8_t[::1] status = status_a
    cdef double[::1] maxx = maxx_a
    cdef int8_t[::1] cb = cb_a
    cdef double[:, ::1] bad = bad_a
    cdef int64_t[::1] nctr = nctr_a
    cdef int64_t[::1] rctr = rctr_a
    cdef Py_ssize_t i
    cdef uint64_t idx
    if n_threads < 1:
        n_threads = 1
    with nogil, parallel(num_threads=n_threads):
        for i in prange(n, schedule="dynamic", chunksize=4):
            idx = <uint64_t>(start_index + i)
            status[i] = <int8_t>run_one(&m, skey(master_seed, idx, 0), skey(master_seed, idx, 1),
                                        0, 0, &fpt[i], &nres[i], &maxx[i], &cb[i],
                                        &nctr[i], &rctr[i], &bad[i, 0])
    return {
        "fpt": fpt_a, "n_resets": nres_a, "status": status_a, "max_x": maxx_a,
        "comeback": cb_a, "bad": bad_a,
    }


def run_single(double alpha, double beta, double eta, double amp, double x0, double v0,
               double dt, double t_max, double absorb_x, double validate_x,
               double reset_x, int kind, double sched, uint64_t noise_key, uint64_t reset_key,
               int64_t noise_counter, int64_t reset_counter, bint validate=False):
    """One trajectory on explicit stream keys; returns the outcome and the advanced counters."""
    cdef Model m = make_model(alpha, beta, eta, amp, x0, v0, dt, t_max, absorb_x,
                              validate_x, reset_x, kind, sched, validate)
    cdef double fpt = float("nan"), mx = 0.0
    cdef double bad[3]
    cdef int64_t nres = 0, nc = 0, rc = 0
    cdef int8_t cb = 0
    cdef int st
    bad[0] = bad[1] = bad[2] = float("nan")
    st = run_one(&m, noise_key, reset_key, noise_counter, reset_counter,
                 &fpt, &nres, &mx, &cb, &nc, &rc, bad)
    return {
        "fpt": fpt, "n_resets": nres, "status": st, "max_x": mx, "comeback": cb,
        "bad": (bad[0], bad[1], bad[2]), "noise_counter": nc, "reset_counter": rc,
    }


def normals(uint64_t key, int64_t start, Py_ssize_t n):
    """Standard normals ``start .. start + n - 1`` of a noise stream."""
    out_a = np.empty(n)
    cdef double[::1] out = out_a
    cdef Py_ssize_t i
    cdef uint64_t c
    cdef double r, th
    for i in range(n):
        c = <uint64_t>(start + i)
        r = sqrt(-2.0 * log(u_open0(key, 2 * (c >> 1))))
        th = 2.0 * M_PI * u_closed0(key, 2 * (c >> 1) + 1)
        out[i] = r * sin(th) if (c & 1) else r * cos(th)
    return out_a

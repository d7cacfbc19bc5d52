"""Pure-Python (numpy) twin of the compiled ensemble kernel.

Trajectories advance in lockstep; all arrays hold only the still-active
ones. Same call signature and return layout as ``_core``.
"""

from __future__ import annotations

import math

import numpy as np

from . import rng as _rng

ESCAPED, CENSORED, BLOWUP = 0, 1, 2


def _next_reset_steps(kind, sched, dt, k, n_res, rkeys, rctr):
    """Vectorized next reset step index; advances ``rctr`` in place for Poisson."""
    n = len(n_res)
    if kind == 0:
        return np.full(n, -1, dtype=np.int64)
    if kind == 1:
        epoch = n_res * sched + sched
    else:
        neglog_u = _rng.exponential_vec(rkeys, rctr, 1.0)
        epoch = k * dt + neglog_u / sched
        rctr += 1
    s = np.ceil(epoch / dt - 1e-9).astype(np.int64)
    return np.maximum(s, k + 1)


def _simulate(alpha, beta, eta, amp, x0, v0, dt, t_max, absorb_x, validate_x, reset_x,
              kind, sched, nkeys, rkeys, nctr0, rctr0, validate):
    n = len(nkeys)
    sqrt_dt = math.sqrt(dt)
    half_dt = 0.5 * dt
    n_max = int(math.floor(t_max / dt + 1e-9))

    fpt_out = np.full(n, np.nan)
    nres_out = np.zeros(n, dtype=np.int64)
    status_out = np.full(n, CENSORED, dtype=np.int8)
    maxx_out = np.zeros(n)
    cb_out = np.zeros(n, dtype=np.int8)
    bad_out = np.full((n, 3), np.nan)
    nctr_out = np.zeros(n, dtype=np.int64)
    rctr_out = np.zeros(n, dtype=np.int64)

    idx = np.arange(n)
    nkeys = np.asarray(nkeys, dtype=np.uint64)
    rkeys = np.asarray(rkeys, dtype=np.uint64)
    nctr0 = np.broadcast_to(np.asarray(nctr0, dtype=np.int64), (n,)).copy()
    rctr = np.broadcast_to(np.asarray(rctr0, dtype=np.int64), (n,)).copy()
    x = np.full(n, float(x0))
    v = np.full(n, float(v0))
    mx = x.copy()
    n_res = np.zeros(n, dtype=np.int64)
    post = np.zeros(n, dtype=bool)
    next_rs = _next_reset_steps(kind, sched, dt, 0, n_res, rkeys, rctr)
    z1 = np.zeros(n)

    def retire(mask):
        # copy bookkeeping of finished trajectories to the outputs
        j = idx[mask]
        nres_out[j] = n_res[mask]
        maxx_out[j] = mx[mask]
        nctr_out[j] = nctr0[mask] + k
        rctr_out[j] = rctr[mask]

    k = 0
    while len(idx) and k < n_max:
        c = nctr0 + k
        odd = (c & 1).astype(bool)
        if k == 0 or not odd.all():
            # the cached second normal equals a fresh one for the same pair
            z0n, z1 = _rng.normal_pair_vec(nkeys, c >> 1)
            z = np.where(odd, z1, z0n)
        else:
            z = z1
        noise = amp * (sqrt_dt * z)
        ax = v
        av = -eta * v - (alpha * x - beta * x * x)
        xp = x + dt * ax
        vp = v + dt * av + noise
        bv = -eta * vp - (alpha * xp - beta * xp * xp)
        xn = x + half_dt * (ax + vp)
        vn = v + half_dt * (av + bv) + noise
        k += 1

        done = np.zeros(len(idx), dtype=bool)
        finite = np.isfinite(xn) & np.isfinite(vn)
        if validate and post.any():
            diverged = post & ~finite
            cb_out[idx[diverged]] = 3
            done |= diverged
        blown = ~post & ~finite
        if blown.any():
            j = idx[blown]
            status_out[j] = BLOWUP
            bad_out[j, 0] = xn[blown]
            bad_out[j, 1] = vn[blown]
            bad_out[j, 2] = k * dt
            done |= blown

        live = ~post & ~blown
        np.maximum(mx, np.where(live, xn, mx), out=mx)
        hit = live & (xn >= absorb_x)
        if hit.any():
            j = idx[hit]
            fpt_out[j] = (k - 1) * dt + dt * (absorb_x - x[hit]) / (xn[hit] - x[hit])
            status_out[j] = ESCAPED
            if validate:
                post |= hit
            else:
                done |= hit

        if validate:
            chk = post & ~hit & finite
            beyond = chk & (xn > validate_x)
            back = chk & (xn < absorb_x)
            cb_out[idx[back]] = 1
            cb_out[idx[beyond]] = 2
            done |= beyond | back

        x = xn
        v = vn
        rs = ~post & ~done & (next_rs >= 0) & (k >= next_rs)
        if rs.any():
            x[rs] = reset_x
            v[rs] = 0.0
            n_res[rs] += 1
            sub_r = rctr[rs]
            next_rs[rs] = _next_reset_steps(kind, sched, dt, k, n_res[rs], rkeys[rs], sub_r)
            rctr[rs] = sub_r

        if done.any():
            retire(done)
            keep = ~done
            idx, x, v, mx, n_res, post = idx[keep], x[keep], v[keep], mx[keep], n_res[keep], post[keep]
            nkeys, rkeys, nctr0, rctr, next_rs, z1 = (
                nkeys[keep], rkeys[keep], nctr0[keep], rctr[keep], next_rs[keep], z1[keep])

    if len(idx):
        retire(np.ones(len(idx), dtype=bool))
    return {
        "fpt": fpt_out, "n_resets": nres_out, "status": status_out, "max_x": maxx_out,
        "comeback": cb_out, "bad": bad_out, "noise_counter": nctr_out, "reset_counter": rctr_out,
    }


def run_ensemble(alpha, beta, eta, amp, x0, v0, dt, t_max, absorb_x, validate_x, reset_x,
                 kind, sched, master_seed, start_index, n, n_threads=1, validate=False):
    indices = range(start_index, start_index + n)
    nkeys = _rng.stream_keys_vec(master_seed, indices, _rng.NOISE_SUBSTREAM)
    rkeys = _rng.stream_keys_vec(master_seed, indices, _rng.RESET_SUBSTREAM)
    out = _simulate(alpha, beta, eta, amp, x0, v0, dt, t_max, absorb_x, validate_x, reset_x,
                    kind, sched, nkeys, rkeys, 0, 0, validate)
    del out["noise_counter"], out["reset_counter"]
    return out


def run_single(alpha, beta, eta, amp, x0, v0, dt, t_max, absorb_x, validate_x, reset_x,
               kind, sched, noise_key, reset_key, noise_counter, reset_counter, validate=False):
    out = _simulate(alpha, beta, eta, amp, x0, v0, dt, t_max, absorb_x, validate_x, reset_x,
                    kind, sched, [noise_key], [reset_key], noise_counter, reset_counter, validate)
    return {
        "fpt": float(out["fpt"][0]), "n_resets": int(out["n_resets"][0]),
        "status": int(out["status"][0]), "max_x": float(out["max_x"][0]),
        "comeback": int(out["comeback"][0]), "bad": tuple(out["bad"][0]),
        "noise_counter": int(out["noise_counter"][0]), "reset_counter": int(out["reset_counter"][0]),
    }

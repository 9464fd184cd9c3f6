"""Numeric inner loops.

Each kernel exists twice: a numba-compiled loop (``*_numba``) and a
vectorised numpy equivalent (``*_numpy``). The public name points at the
numba version unless numba is missing or ``MEMDECAY_DISABLE_NUMBA`` is set.
Both versions perform the same floating-point operations in the same order
per element, so their results agree bit for bit.

Fitting works on per-video integer moments of the centred lags
``d = lag - T`` and binary responses ``x``::

    n, sum(d), sum(d*d), sum(x), sum(d*x)

Because lags and responses are integers these sums are exact, which makes
the fit independent of record order and of duplicating the data.
"""

import numpy as np

from memdecay._accel import NUMBA_AVAILABLE, njit

# moment array columns
N, SD, SDD, SX, SDX = range(5)


# ---------------------------------------------------------------- moments


def group_moments_numpy(codes, lags, responses, ref_lag, n_groups):
    codes = np.asarray(codes, dtype=np.int64)
    d = np.asarray(lags, dtype=np.int64) - ref_lag
    x = np.asarray(responses, dtype=np.int64)
    out = np.zeros((n_groups, 5), dtype=np.int64)
    np.add.at(out[:, N], codes, 1)
    np.add.at(out[:, SD], codes, d)
    np.add.at(out[:, SDD], codes, d * d)
    np.add.at(out[:, SX], codes, x)
    np.add.at(out[:, SDX], codes, d * x)
    return out


def _group_moments_loop(codes, lags, responses, ref_lag, n_groups):
    out = np.zeros((n_groups, 5), dtype=np.int64)
    for i in range(codes.shape[0]):
        g = codes[i]
        d = lags[i] - ref_lag
        x = responses[i]
        out[g, 0] += 1
        out[g, 1] += d
        out[g, 2] += d * d
        out[g, 3] += x
        out[g, 4] += d * x
    return out


# ---------------------------------------------------- coordinate descent


def _is_degenerate(n, sd, sdd):
    # Cauchy-Schwarz: n*sum(d^2) == sum(d)^2 iff every lag is identical.
    return n * sdd - sd * sd == 0


def _residual_ss(n, sd, sdd, sx, sdx, alpha, m):
    # sum((x - m - alpha*d)^2) with sum(x^2) == sum(x) for binary x
    e = sx - 2.0 * m * sx - 2.0 * alpha * sdx + n * m * m + 2.0 * alpha * m * sd + alpha * alpha * sdd
    return e if e > 0.0 else 0.0


def _update(n, sd, sdd, sx, sdx, m):
    # slope given the level, then level given the new slope
    a_new = (sdx - m * sd) / sdd
    m_new = (sx - a_new * sd) / n
    return a_new, m_new


def _stop_factor(n, sd, sdd):
    # Each full pass shrinks the distance to the least-squares optimum by
    # rho = sd^2 / (n*sdd); |delta| * rho / (1 - rho) bounds what is left.
    rho = (sd * sd) / (n * sdd)
    if rho >= 1.0:
        return np.inf
    f = rho / (1.0 - rho)
    return f if f > 1.0 else 1.0


def _descend_loop(moments, alpha0, max_iter, tol):
    n_videos = moments.shape[0]
    alpha = np.empty(n_videos)
    m_out = np.empty(n_videos)
    passes = np.empty(n_videos, dtype=np.int64)
    for v in range(n_videos):
        n = moments[v, 0]
        sd = float(moments[v, 1])
        sdd = float(moments[v, 2])
        sx = float(moments[v, 3])
        sdx = float(moments[v, 4])
        m = sx / n
        if _is_degenerate(n, moments[v, 1], moments[v, 2]):
            alpha[v] = 0.0
            m_out[v] = m
            passes[v] = 1
            continue
        a = alpha0
        factor = _stop_factor(n, sd, sdd)
        k = 0
        while k < max_iter:
            a_new, m_new = _update(n, sd, sdd, sx, sdx, m)
            da = abs(a_new - a)
            dm = abs(m_new - m)
            a = a_new
            m = m_new
            k += 1
            if tol > 0.0 and (max(da, dm) * factor < tol or (da == 0.0 and dm == 0.0)):
                break
        alpha[v] = a
        m_out[v] = m
        passes[v] = k
    return alpha, m_out, passes


_update_numpy = _update


def descend_numpy(moments, alpha0, max_iter, tol):
    moments = np.asarray(moments, dtype=np.int64)
    n_i, sd_i, sdd_i = moments[:, N], moments[:, SD], moments[:, SDD]
    n = n_i.astype(np.float64)
    sd = sd_i.astype(np.float64)
    sdd = sdd_i.astype(np.float64)
    sx = moments[:, SX].astype(np.float64)
    sdx = moments[:, SDX].astype(np.float64)
    m = sx / n
    degenerate = n_i * sdd_i - sd_i * sd_i == 0
    alpha = np.where(degenerate, 0.0, float(alpha0))
    passes = np.ones(len(n), dtype=np.int64)
    active = ~degenerate
    passes[active] = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = (sd * sd) / (n * sdd)
        factor = np.where(rho >= 1.0, np.inf, np.maximum(rho / (1.0 - rho), 1.0))
    k = 0
    while k < max_iter and active.any():
        idx = np.flatnonzero(active)
        a_new, m_new = _update_numpy(n[idx], sd[idx], sdd[idx], sx[idx], sdx[idx], m[idx])
        da = np.abs(a_new - alpha[idx])
        dm = np.abs(m_new - m[idx])
        alpha[idx] = a_new
        m[idx] = m_new
        passes[idx] += 1
        k += 1
        if tol > 0.0:
            done = (np.maximum(da, dm) * factor[idx] < tol) | ((da == 0.0) & (dm == 0.0))
            active[idx[done]] = False
    return alpha, m, passes


def _trace_loop(mom, alpha0, max_iter, tol):
    """Single-video descent recording (alpha, m, E) after every pass.

    Row 0 holds the starting point.
    """
    n = mom[0]
    sd = float(mom[1])
    sdd = float(mom[2])
    sx = float(mom[3])
    sdx = float(mom[4])
    m = sx / n
    if _is_degenerate(n, mom[1], mom[2]):
        out = np.empty((2, 3))
        out[0, 0] = alpha0
        out[0, 1] = m
        out[0, 2] = _residual_ss(n, sd, sdd, sx, sdx, alpha0, m)
        out[1, 0] = 0.0
        out[1, 1] = m
        out[1, 2] = _residual_ss(n, sd, sdd, sx, sdx, 0.0, m)
        return out
    cap = max_iter + 1 if max_iter < 1024 else 1025
    out = np.empty((cap, 3))
    a = alpha0
    out[0, 0] = a
    out[0, 1] = m
    out[0, 2] = _residual_ss(n, sd, sdd, sx, sdx, a, m)
    factor = _stop_factor(n, sd, sdd)
    k = 0
    while k < max_iter:
        a_new, m_new = _update(n, sd, sdd, sx, sdx, m)
        da = abs(a_new - a)
        dm = abs(m_new - m)
        a = a_new
        m = m_new
        k += 1
        if k >= out.shape[0]:
            grown = np.empty((min(2 * out.shape[0], max_iter + 1), 3))
            grown[: out.shape[0]] = out
            out = grown
        out[k, 0] = a
        out[k, 1] = m
        out[k, 2] = _residual_ss(n, sd, sdd, sx, sdx, a, m)
        if tol > 0.0 and (max(da, dm) * factor < tol or (da == 0.0 and dm == 0.0)):
            break
    return out[: k + 1].copy()


# ------------------------------------------------------------------ ranks


def midranks_numpy(values):
    """1-based ranks with ties replaced by their average rank."""
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    starts = np.flatnonzero(np.r_[True, sorted_vals[1:] != sorted_vals[:-1]])
    ends = np.r_[starts[1:], n]
    avg = (starts + ends + 1) / 2.0
    ranks = np.empty(n)
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def _midranks_loop(values):
    n = values.shape[0]
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(n)
    i = 0
    while i < n:
        j = i + 1
        while j < n and values[order[j]] == values[order[i]]:
            j += 1
        avg = (i + j + 1) / 2.0
        for k in range(i, j):
            ranks[order[k]] = avg
        i = j
    return ranks


# ----------------------------------------------------------------- wiring

if NUMBA_AVAILABLE:
    _is_degenerate = njit(cache=True)(_is_degenerate)
    _residual_ss = njit(cache=True)(_residual_ss)
    _stop_factor = njit(cache=True)(_stop_factor)
    _update = njit(cache=True)(_update)
    group_moments_numba = njit(cache=True)(_group_moments_loop)
    descend_numba = njit(cache=True)(_descend_loop)
    trace_numba = njit(cache=True)(_trace_loop)
    midranks_numba = njit(cache=True)(_midranks_loop)
else:
    group_moments_numba = descend_numba = trace_numba = midranks_numba = None

# The trace recurrence is scalar, so its fallback is the plain loop.
trace_numpy = _trace_loop


def _pick(numba_fn, numpy_fn):
    return numba_fn if numba_fn is not None else numpy_fn


def group_moments(codes, lags, responses, ref_lag, n_groups):
    fn = _pick(group_moments_numba, group_moments_numpy)
    return fn(
        np.ascontiguousarray(codes, dtype=np.int64),
        np.ascontiguousarray(lags, dtype=np.int64),
        np.ascontiguousarray(responses, dtype=np.int64),
        int(ref_lag),
        int(n_groups),
    )


def descend(moments, alpha0, max_iter, tol):
    fn = _pick(descend_numba, descend_numpy)
    return fn(np.ascontiguousarray(moments, dtype=np.int64), float(alpha0), int(max_iter), float(tol))


def trace(moments_row, alpha0, max_iter, tol):
    fn = _pick(trace_numba, trace_numpy)
    return fn(np.ascontiguousarray(moments_row, dtype=np.int64), float(alpha0), int(max_iter), float(tol))


def single_pass(moments_row, alpha, m):
    """One slope-then-level update from an arbitrary ``(alpha, m)``."""
    n, sd, sdd, sx, sdx = (int(v) for v in moments_row)
    if n * sdd - sd * sd == 0:
        return 0.0, sx / n
    return _update_numpy(n, float(sd), float(sdd), float(sx), float(sdx), float(m))


def midranks(values):
    fn = _pick(midranks_numba, midranks_numpy)
    return fn(np.ascontiguousarray(values, dtype=np.float64))

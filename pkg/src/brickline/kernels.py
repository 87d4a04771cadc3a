"""Hot numeric kernels, JIT-compiled with numba when available.

Three inner loops dominate preprocessing and model decomposition:

* ``moving_average`` — replicate-padded centered moving average (trend extraction)
* ``bucket_sums``   — irregular-timestamp aggregation onto the 600 s grid
* ``fill_gaps_quadratic`` — per-gap quadratic stencil imputation

Each has a numba ``@njit`` build and a pure-numpy build computing the same
result. The active backend is chosen at import time: numba when it imports
cleanly, unless the environment variable ``BRICKLINE_NUMBA`` is set to
``0``/``false``/``off``. ``ACTIVE_BACKEND`` reports the choice;
``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("BRICKLINE_NUMBA", "1").strip().lower()
_WANT_NUMBA = _flag not in ("0", "false", "no", "off")

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    HAVE_NUMBA = False


# --------------------------------------------------------------------------
# numpy builds


def moving_average_numpy(x: np.ndarray, kernel: int) -> np.ndarray:
    """Centered moving average along axis 1 of a (B, S, C) array.

    The series is replicate-padded by kernel//2 on each side, so output
    length equals input length.
    """
    if kernel == 1:  # identity, kept bit-exact
        return x.astype(np.float64, copy=True)
    half = kernel // 2
    left = np.repeat(x[:, :1, :], half, axis=1)
    right = np.repeat(x[:, -1:, :], half, axis=1)
    padded = np.concatenate([left, x, right], axis=1)
    cs = np.cumsum(padded, axis=1, dtype=np.float64)
    zeros = np.zeros_like(cs[:, :1, :])
    cs = np.concatenate([zeros, cs], axis=1)
    return (cs[:, kernel:, :] - cs[:, :-kernel, :]) / kernel


def bucket_sums_numpy(
    ts: np.ndarray, values: np.ndarray, start: int, step: int, nbins: int
) -> tuple[np.ndarray, np.ndarray]:
    """Sum readings into left-closed buckets [start + i*step, start + (i+1)*step)."""
    idx = (ts - start) // step
    counts = np.bincount(idx, minlength=nbins).astype(np.int64)
    sums = np.bincount(idx, weights=values, minlength=nbins)
    return sums, counts


def _quad_eval(t, t0, t1, t2, y0, y1, y2):
    # Lagrange form through three support points; exact for quadratics.
    l0 = (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2))
    l1 = (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2))
    l2 = (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1))
    return y0 * l0 + y1 * l1 + y2 * l2


def fill_gaps_quadratic_numpy(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Fill missing entries of a grid series.

    Interior gaps get the quadratic through the two nearest observed points
    before the gap and the one nearest after (one-before/two-after at the
    series head). Leading/trailing runs copy the nearest observed value; the
    polynomial is never extrapolated past the data.
    """
    out = values.astype(np.float64, copy=True)
    obs = np.flatnonzero(mask)
    if obs.size == 0:
        return out
    out[: obs[0]] = out[obs[0]]
    out[obs[-1] + 1 :] = out[obs[-1]]
    for j in range(obs.size - 1):
        a = obs[j]
        b = obs[j + 1]
        if b - a == 1:
            continue
        if obs.size == 2:  # not enough support for a quadratic: bridge linearly
            slope = (out[b] - out[a]) / (b - a)
            for i in range(a + 1, b):
                out[i] = out[a] + slope * (i - a)
            continue
        if j >= 1:
            t0, t1, t2 = obs[j - 1], a, b
        else:
            t0, t1, t2 = a, b, obs[j + 2]
        y0, y1, y2 = out[t0], out[t1], out[t2]
        for i in range(a + 1, b):
            out[i] = _quad_eval(float(i), float(t0), float(t1), float(t2), y0, y1, y2)
    return out


# --------------------------------------------------------------------------
# numba builds

if HAVE_NUMBA:

    @njit(cache=True)
    def _moving_average_nb(x, kernel):
        B, S, C = x.shape
        if kernel == 1:
            return x.copy()
        half = kernel // 2
        out = np.empty_like(x)
        for b in range(B):
            for c in range(C):
                acc = 0.0
                # initial window centered at index 0: replicate x[0] half+1 times
                acc += x[b, 0, c] * (half + 1)
                for i in range(1, half + 1):
                    acc += x[b, min(i, S - 1), c]
                out[b, 0, c] = acc / kernel
                for i in range(1, S):
                    lead = min(i + half, S - 1)
                    trail = max(i - half - 1, 0)
                    acc += x[b, lead, c] - x[b, trail, c]
                    out[b, i, c] = acc / kernel

        return out

    @njit(cache=True)
    def _bucket_sums_nb(ts, values, start, step, nbins):
        sums = np.zeros(nbins, dtype=np.float64)
        counts = np.zeros(nbins, dtype=np.int64)
        for i in range(ts.shape[0]):
            k = (ts[i] - start) // step
            sums[k] += values[i]
            counts[k] += 1
        return sums, counts

    @njit(cache=True)
    def _fill_gaps_nb(values, mask):
        n = values.shape[0]
        out = values.copy()
        nobs = 0
        for i in range(n):
            if mask[i]:
                nobs += 1
        if nobs == 0:
            return out
        obs = np.empty(nobs, dtype=np.int64)
        k = 0
        for i in range(n):
            if mask[i]:
                obs[k] = i
                k += 1
        for i in range(obs[0]):
            out[i] = out[obs[0]]
        for i in range(obs[nobs - 1] + 1, n):
            out[i] = out[obs[nobs - 1]]
        for j in range(nobs - 1):
            a = obs[j]
            b = obs[j + 1]
            if b - a == 1:
                continue
            if nobs == 2:
                slope = (out[b] - out[a]) / (b - a)
                for i in range(a + 1, b):
                    out[i] = out[a] + slope * (i - a)
                continue
            if j >= 1:
                t0, t1, t2 = obs[j - 1], a, b
            else:
                t0, t1, t2 = a, b, obs[j + 2]
            y0, y1, y2 = out[t0], out[t1], out[t2]
            ft0, ft1, ft2 = float(t0), float(t1), float(t2)
            d0 = (ft0 - ft1) * (ft0 - ft2)
            d1 = (ft1 - ft0) * (ft1 - ft2)
            d2 = (ft2 - ft0) * (ft2 - ft1)
            for i in range(a + 1, b):
                t = float(i)
                out[i] = (
                    y0 * (t - ft1) * (t - ft2) / d0
                    + y1 * (t - ft0) * (t - ft2) / d1
                    + y2 * (t - ft0) * (t - ft1) / d2
                )
        return out

    def moving_average_numba(x: np.ndarray, kernel: int) -> np.ndarray:
        return _moving_average_nb(np.ascontiguousarray(x, dtype=np.float64), kernel)

    def bucket_sums_numba(ts, values, start, step, nbins):
        return _bucket_sums_nb(
            np.ascontiguousarray(ts, dtype=np.int64),
            np.ascontiguousarray(values, dtype=np.float64),
            np.int64(start),
            np.int64(step),
            np.int64(nbins),
        )

    def fill_gaps_quadratic_numba(values, mask):
        return _fill_gaps_nb(
            np.ascontiguousarray(values, dtype=np.float64),
            np.ascontiguousarray(mask, dtype=np.bool_),
        )

else:  # pragma: no cover
    moving_average_numba = None
    bucket_sums_numba = None
    fill_gaps_quadratic_numba = None


if HAVE_NUMBA and _WANT_NUMBA:
    ACTIVE_BACKEND = "numba"
    moving_average = moving_average_numba
    bucket_sums = bucket_sums_numba
    fill_gaps_quadratic = fill_gaps_quadratic_numba
else:
    ACTIVE_BACKEND = "numpy"
    moving_average = moving_average_numpy
    bucket_sums = bucket_sums_numpy
    fill_gaps_quadratic = fill_gaps_quadratic_numpy


def warm_up() -> None:
    """Trigger JIT compilation so first real calls do not pay compile time."""
    x = np.zeros((1, 8, 1))
    moving_average(x, 3)
    bucket_sums(np.array([0, 600], dtype=np.int64), np.array([1.0, 2.0]), 0, 600, 2)
    fill_gaps_quadratic(
        np.array([0.0, np.nan, 4.0, 9.0]), np.array([True, False, True, True])
    )

"""Hot numeric kernels: polygon containment and Gaussian KDE evaluation.

Each kernel has a numba-compiled loop version and a vectorized numpy version.
The numba path is used when numba imports cleanly and the environment
variable ``RENTSCRAPE_NO_NUMBA`` is unset (or ``0``). Both paths must return
identical containment decisions and KDE values equal to 1e-12 relative
(numpy's vectorized exp may differ from libm in the last ulp).
"""

import math
import os
import warnings

import numpy as np

OUTSIDE = 0
INSIDE = 1
ON_EDGE = 2

# Kernel contributions past this many bandwidths are below 1e-14 of the peak.
KDE_CUTOFF = 8.0


def _numba_requested():
    flag = os.environ.get("RENTSCRAPE_NO_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


try:
    if not _numba_requested():
        raise ImportError("disabled by RENTSCRAPE_NO_NUMBA")
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError as exc:  # pragma: no cover - depends on environment
    NUMBA_AVAILABLE = False
    if _numba_requested():
        warnings.warn(f"numba unavailable ({exc}); using numpy kernels")

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


# --------------------------------------------------------------------------
# point in ring


def _ring_classify_loop(px, py, rx, ry):
    n_pts = px.shape[0]
    n_v = rx.shape[0]
    out = np.zeros(n_pts, dtype=np.int8)
    for k in range(n_pts):
        x = px[k]
        y = py[k]
        inside = False
        edge = False
        for i in range(n_v - 1):
            x1 = rx[i]
            y1 = ry[i]
            x2 = rx[i + 1]
            y2 = ry[i + 1]
            cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
            if (
                cross == 0.0
                and min(x1, x2) <= x <= max(x1, x2)
                and min(y1, y2) <= y <= max(y1, y2)
            ):
                edge = True
                break
            if (y1 > y) != (y2 > y):
                xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                if x < xint:
                    inside = not inside
        if edge:
            out[k] = 2
        elif inside:
            out[k] = 1
    return out


_ring_classify_nb = njit(cache=True)(_ring_classify_loop)


def _ring_classify_np(px, py, rx, ry):
    inside = np.zeros(px.shape[0], dtype=bool)
    edge = np.zeros(px.shape[0], dtype=bool)
    for i in range(rx.shape[0] - 1):
        x1, y1, x2, y2 = rx[i], ry[i], rx[i + 1], ry[i + 1]
        cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
        on_seg = (
            (cross == 0.0)
            & (px >= min(x1, x2))
            & (px <= max(x1, x2))
            & (py >= min(y1, y2))
            & (py <= max(y1, y2))
        )
        straddle = (y1 > py) != (y2 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside ^= straddle & (px < xint)
        edge |= on_seg
    out = np.where(edge, ON_EDGE, np.where(inside, INSIDE, OUTSIDE))
    return out.astype(np.int8)


def ring_classify(px, py, rx, ry, use_numba=None):
    """Classify points against one closed ring: 0 outside, 1 inside, 2 on an edge.

    Even-odd (ray casting) rule; ``rx``/``ry`` must repeat the first vertex at
    the end.
    """
    px = np.ascontiguousarray(px, dtype=np.float64)
    py = np.ascontiguousarray(py, dtype=np.float64)
    rx = np.ascontiguousarray(rx, dtype=np.float64)
    ry = np.ascontiguousarray(ry, dtype=np.float64)
    if use_numba is None:
        use_numba = NUMBA_AVAILABLE
    if use_numba:
        return _ring_classify_nb(px, py, rx, ry)
    return _ring_classify_np(px, py, rx, ry)


# --------------------------------------------------------------------------
# Gaussian KDE


def _kde_loop(data, grid, h, cutoff):
    n = data.shape[0]
    m = grid.shape[0]
    out = np.zeros(m, dtype=np.float64)
    norm = 1.0 / (n * h * math.sqrt(2.0 * math.pi))
    reach = cutoff * h
    lo = 0
    for j in range(m):
        g = grid[j]
        # grid is ascending, so the window start only moves right
        while lo < n and data[lo] < g - reach:
            lo += 1
        acc = 0.0
        i = lo
        while i < n and data[i] <= g + reach:
            u = (g - data[i]) / h
            acc += math.exp(-0.5 * u * u)
            i += 1
        out[j] = acc * norm
    return out


_kde_nb = njit(cache=True)(_kde_loop)


def _kde_np(data, grid, h, cutoff):
    n = data.shape[0]
    norm = 1.0 / (n * h * math.sqrt(2.0 * math.pi))
    reach = cutoff * h
    lo = np.searchsorted(data, grid - reach, side="left")
    hi = np.searchsorted(data, grid + reach, side="right")
    out = np.empty(grid.shape[0], dtype=np.float64)
    for j in range(grid.shape[0]):
        u = (grid[j] - data[lo[j]:hi[j]]) / h
        out[j] = np.exp(-0.5 * u * u).sum() * norm
    return out


def gaussian_kde(sorted_data, grid, bandwidth, use_numba=None):
    """Evaluate a Gaussian KDE of ascending ``sorted_data`` on ascending ``grid``."""
    data = np.ascontiguousarray(sorted_data, dtype=np.float64)
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    if use_numba is None:
        use_numba = NUMBA_AVAILABLE
    if use_numba:
        return _kde_nb(data, grid, float(bandwidth), KDE_CUTOFF)
    return _kde_np(data, grid, float(bandwidth), KDE_CUTOFF)

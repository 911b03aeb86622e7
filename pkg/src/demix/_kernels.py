"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``DEMIX_NUMBA=0`` in the environment (before import) to force the numpy
implementations.  Both paths compute identical quantities; the numba path
works in place on float64 buffers, the numpy path vectorises over butterfly
stages.
"""
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USE_NUMBA = numba is not None and os.environ.get("DEMIX_NUMBA", "1").lower() not in ("0", "false", "no", "off")


# ---------------------------------------------------------------------------
# numpy reference paths
# ---------------------------------------------------------------------------

def fwht_numpy(x):
    """Unnormalised Walsh-Hadamard transform of ``x`` in place (natural order)."""
    n = x.shape[0]
    h = 1
    while h < n:
        v = x.reshape(-1, 2, h)
        a = v[:, 0, :].copy()
        v[:, 0, :] += v[:, 1, :]
        np.subtract(a, v[:, 1, :], out=v[:, 1, :])
        h *= 2
    return x


def fwht_rows_numpy(x):
    """Row-wise in-place WHT of a 2-D C-contiguous array."""
    rows, n = x.shape
    h = 1
    while h < n:
        v = x.reshape(rows, -1, 2, h)
        a = v[:, :, 0, :].copy()
        v[:, :, 0, :] += v[:, :, 1, :]
        np.subtract(a, v[:, :, 1, :], out=v[:, :, 1, :])
        h *= 2
    return x


def pme_numpy(q, r, d, tau):
    """Stable elementwise posterior mean of a 0/1 entry seen as ``d*s + tau*noise``."""
    q = np.asarray(q, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    # exponents a = -(r-d)^2 c and b = -r^2 c enter only through a - b
    delta = d * (2.0 * r - d) / (2.0 * tau * tau)
    num = q * np.exp(np.minimum(delta, 0.0))
    den = num + (1.0 - q) * np.exp(np.minimum(-delta, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(num > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    return out


# ---------------------------------------------------------------------------
# numba paths
# ---------------------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _fwht_nb(x):
        n = x.shape[0]
        h = 1
        while h < n:
            for i in range(0, n, 2 * h):
                for j in range(i, i + h):
                    a = x[j]
                    b = x[j + h]
                    x[j] = a + b
                    x[j + h] = a - b
            h *= 2
        return x

    @numba.njit(cache=True, nogil=True)
    def _fwht_rows_nb(x):
        for k in range(x.shape[0]):
            _fwht_nb(x[k])
        return x

    @numba.njit(cache=True, nogil=True)
    def _pme_nb(q, r, d, tau, out):
        c = d / (2.0 * tau * tau)
        for i in range(r.shape[0]):
            qi = q[i]
            delta = (2.0 * r[i] - d) * c
            if delta >= 0.0:
                num = qi
                den = num + (1.0 - qi) * np.exp(-delta)
            else:
                num = qi * np.exp(delta)
                den = num + (1.0 - qi)
            out[i] = num / den if num > 0.0 else 0.0
        return out


def fwht_inplace(x):
    if USE_NUMBA:
        return _fwht_nb(x)
    return fwht_numpy(x)


def fwht_rows_inplace(x):
    if USE_NUMBA:
        return _fwht_rows_nb(x)
    return fwht_rows_numpy(x)


def pme_array(q, r, d, tau):
    """Vectorised PME over flat arrays; ``q`` may be a scalar."""
    r = np.ascontiguousarray(r, dtype=np.float64)
    if not USE_NUMBA:
        return pme_numpy(q, r, d, tau)
    shape = r.shape
    r1 = r.ravel()
    q1 = np.broadcast_to(np.asarray(q, dtype=np.float64), shape).ravel()
    q1 = np.ascontiguousarray(q1)
    out = np.empty_like(r1)
    _pme_nb(q1, r1, float(d), float(tau), out)
    return out.reshape(shape)

"""Per-pair outcome sampling kernels.

Every kernel turns pre-drawn uniforms into ±1 detector outcomes, so the
numba and numpy paths are bit-identical for the same input arrays.  Set
``HYBRIDQC_DISABLE_NUMBA=1`` to force the numpy path.

Uniform layout for a pair is ``u[i, 0]`` for the Born draw and, when dark
counts are enabled, ``u[i, 1]`` / ``u[i, 2]`` for the two detectors.  A
dark event fires when ``u < d``; its replacement value reuses the same
uniform (``u < d/2`` gives +1), which is a fair coin conditional on firing.
"""

import os

import numpy as np

_DISABLED = os.environ.get("HYBRIDQC_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError("numba disabled by HYBRIDQC_DISABLE_NUMBA")
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "numpy"


def _joint_outcomes_py(probs, u, dark_p):
    n = u.shape[0]
    p = np.broadcast_to(probs, (n, 4)) if probs.shape[0] == 1 else probs
    c1 = p[:, 0]
    c2 = p[:, 0] + p[:, 1]
    c3 = p[:, 0] + p[:, 1] + p[:, 2]
    x = u[:, 0]
    a = np.where(x < c2, 1, -1).astype(np.int8)
    b = np.where(x < c1, 1, np.where(x < c2, -1, np.where(x < c3, 1, -1))).astype(np.int8)
    if u.shape[1] > 1:
        half = 0.5 * dark_p
        da = u[:, 1]
        db = u[:, 2]
        a = np.where(da < dark_p, np.where(da < half, 1, -1), a).astype(np.int8)
        b = np.where(db < dark_p, np.where(db < half, 1, -1), b).astype(np.int8)
    return a, b


def _single_outcomes_py(p_plus, u, dark_p):
    n = u.shape[0]
    p = np.broadcast_to(p_plus, (n,)) if p_plus.shape[0] == 1 else p_plus
    o = np.where(u[:, 0] < p, 1, -1).astype(np.int8)
    if u.shape[1] > 1:
        d = u[:, 1]
        o = np.where(d < dark_p, np.where(d < 0.5 * dark_p, 1, -1), o).astype(np.int8)
    return o


if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def _joint_outcomes_nb(probs, u, dark_p):
        n = u.shape[0]
        a = np.empty(n, dtype=np.int8)
        b = np.empty(n, dtype=np.int8)
        bcast = probs.shape[0] == 1
        dark = u.shape[1] > 1
        half = 0.5 * dark_p
        for i in range(n):
            r = 0 if bcast else i
            c1 = probs[r, 0]
            c2 = probs[r, 0] + probs[r, 1]
            c3 = probs[r, 0] + probs[r, 1] + probs[r, 2]
            x = u[i, 0]
            if x < c1:
                ai, bi = 1, 1
            elif x < c2:
                ai, bi = 1, -1
            elif x < c3:
                ai, bi = -1, 1
            else:
                ai, bi = -1, -1
            if dark:
                if u[i, 1] < dark_p:
                    ai = 1 if u[i, 1] < half else -1
                if u[i, 2] < dark_p:
                    bi = 1 if u[i, 2] < half else -1
            a[i] = ai
            b[i] = bi
        return a, b

    @njit(cache=True, nogil=True)
    def _single_outcomes_nb(p_plus, u, dark_p):
        n = u.shape[0]
        o = np.empty(n, dtype=np.int8)
        bcast = p_plus.shape[0] == 1
        dark = u.shape[1] > 1
        for i in range(n):
            p = p_plus[0] if bcast else p_plus[i]
            oi = 1 if u[i, 0] < p else -1
            if dark and u[i, 1] < dark_p:
                oi = 1 if u[i, 1] < 0.5 * dark_p else -1
            o[i] = oi
        return o

    @njit(cache=True, nogil=True)
    def _product_sum_nb(a, b, keep):
        s = 0
        k = 0
        for i in range(a.shape[0]):
            if keep[i]:
                s += a[i] * b[i]
                k += 1
        return s, k


def joint_outcomes(probs, u, dark_p, backend=None):
    """Sample correlated outcome pairs.

    ``probs`` is ``(1, 4)`` or ``(n, 4)`` over ``(++, +-, -+, --)``.
    Returns two int8 arrays of ±1.
    """
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    if _use_numba(backend):
        return _joint_outcomes_nb(probs, u, float(dark_p))
    return _joint_outcomes_py(probs, u, float(dark_p))


def single_outcomes(p_plus, u, dark_p, backend=None):
    """Sample single-detector outcomes with P(+1) = ``p_plus`` (length 1 or n)."""
    p_plus = np.ascontiguousarray(p_plus, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    if _use_numba(backend):
        return _single_outcomes_nb(p_plus, u, float(dark_p))
    return _single_outcomes_py(p_plus, u, float(dark_p))


def product_sum(a, b, keep, backend=None):
    """Return (Σ a·b over kept pairs, number kept)."""
    if _use_numba(backend):
        s, k = _product_sum_nb(a, b, keep)
        return int(s), int(k)
    prod = a[keep].astype(np.int64) * b[keep]
    return int(prod.sum()), int(np.count_nonzero(keep))


def _use_numba(backend):
    if backend is None:
        return HAS_NUMBA
    if backend == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but unavailable")
        return True
    if backend == "numpy":
        return False
    raise ValueError(f"unknown backend {backend!r}")

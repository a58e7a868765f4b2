"""Per-primitive inner loops of the plant simulator.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy version
with identical floating-point semantics (no fastmath, same operation order).
Random numbers are always drawn by the caller from a numpy Generator, so both
paths produce bit-identical plants for the same seed.

Set ``TPC_NUMBA=0`` in the environment to force the numpy path. The numba path
is also skipped when numba is not importable.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None


def _env_wants_numba() -> bool:
    return os.environ.get("TPC_NUMBA", "1").strip().lower() not in {"0", "false", "no", "off"}


USE_NUMBA = nb is not None and _env_wants_numba()


# ---------------------------------------------------------------------------
# numpy reference path
# ---------------------------------------------------------------------------

def np_opacity_step(alpha, u, drift, p_decay, decay_factor):
    decayed = u < p_decay
    drifted = 1.0 - (1.0 - alpha) * (1.0 - drift)
    alpha[:] = np.where(decayed, alpha * decay_factor, drifted)


def np_candidates(grad, tau):
    return np.flatnonzero(grad >= tau)


def np_compact(alpha, grad, tau):
    keep = alpha >= tau
    return alpha[keep], grad[keep]


def np_count_ge(values, thresholds):
    ordered = np.sort(values)
    return ordered.size - np.searchsorted(ordered, thresholds, side="left")


def np_count_lt(values, thresholds):
    ordered = np.sort(values)
    return np.searchsorted(ordered, thresholds, side="left")


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if nb is not None:
    _jit = nb.njit(cache=True, nogil=True)

    @_jit
    def nb_opacity_step(alpha, u, drift, p_decay, decay_factor):
        for i in range(alpha.shape[0]):
            if u[i] < p_decay:
                alpha[i] = alpha[i] * decay_factor
            else:
                alpha[i] = 1.0 - (1.0 - alpha[i]) * (1.0 - drift)

    @_jit
    def nb_candidates(grad, tau):
        n = 0
        for i in range(grad.shape[0]):
            if grad[i] >= tau:
                n += 1
        out = np.empty(n, dtype=np.int64)
        j = 0
        for i in range(grad.shape[0]):
            if grad[i] >= tau:
                out[j] = i
                j += 1
        return out

    @_jit
    def nb_compact(alpha, grad, tau):
        n = 0
        for i in range(alpha.shape[0]):
            if alpha[i] >= tau:
                n += 1
        a_out = np.empty(n, dtype=alpha.dtype)
        g_out = np.empty(n, dtype=grad.dtype)
        j = 0
        for i in range(alpha.shape[0]):
            if alpha[i] >= tau:
                a_out[j] = alpha[i]
                g_out[j] = grad[i]
                j += 1
        return a_out, g_out

    @_jit
    def nb_count_ge(values, thresholds):
        out = np.zeros(thresholds.shape[0], dtype=np.int64)
        for i in range(values.shape[0]):
            v = values[i]
            for k in range(thresholds.shape[0]):
                if v >= thresholds[k]:
                    out[k] += 1
        return out

    @_jit
    def nb_count_lt(values, thresholds):
        out = np.zeros(thresholds.shape[0], dtype=np.int64)
        for i in range(values.shape[0]):
            v = values[i]
            for k in range(thresholds.shape[0]):
                if v < thresholds[k]:
                    out[k] += 1
        return out


if USE_NUMBA:
    opacity_step = nb_opacity_step
    candidates = nb_candidates
    compact = nb_compact
    count_ge = nb_count_ge
    count_lt = nb_count_lt
else:
    opacity_step = np_opacity_step
    candidates = np_candidates
    compact = np_compact
    count_ge = np_count_ge
    count_lt = np_count_lt


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"

"""Batched polynomial evaluation kernels.

Grid scans, CSV surface export, and the sampling-based verification checks
all reduce to "evaluate a sparse polynomial at many points".  That inner
loop is the only hot numeric path in the package, so it ships in two
interchangeable implementations:

  * a numba ``@njit`` kernel (default when numba imports), and
  * a pure-numpy vectorized fallback.

Selection is by the ``CANONDUAL_KERNEL`` environment variable, read at
import time: ``auto`` (default), ``numba``, or ``numpy``.  ``auto`` picks
numba when available.  ``bench/bench_kernels.py`` times both backends on
the benchmark objectives.

Exact-rational arithmetic (module ``polynomial``) never goes through these
kernels; only float evaluation does.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_VAR = "CANONDUAL_KERNEL"

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False


def _numpy_eval_many(coeffs: np.ndarray, exps: np.ndarray, pts: np.ndarray) -> np.ndarray:
    out = np.zeros(pts.shape[0], dtype=np.float64)
    n_vars = pts.shape[1]
    for t in range(coeffs.shape[0]):
        term = np.full(pts.shape[0], coeffs[t])
        for v in range(n_vars):
            e = exps[t, v]
            if e:
                term *= pts[:, v] ** e
        out += term
    return out


if HAS_NUMBA:

    @njit(cache=True)
    def _numba_eval_many(coeffs, exps, pts):  # pragma: no cover - compiled
        n_pts = pts.shape[0]
        n_terms = coeffs.shape[0]
        n_vars = pts.shape[1]
        out = np.zeros(n_pts, dtype=np.float64)
        for i in range(n_pts):
            acc = 0.0
            for t in range(n_terms):
                term = coeffs[t]
                for v in range(n_vars):
                    x = pts[i, v]
                    for _ in range(exps[t, v]):
                        term *= x
                acc += term
            out[i] = acc
        return out


def _resolve_backend() -> str:
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"{_ENV_VAR} must be auto, numba, or numpy, got {choice!r}")
    if choice == "numba" and not HAS_NUMBA:
        raise RuntimeError(f"{_ENV_VAR}=numba but numba is not importable")
    if choice == "auto":
        return "numba" if HAS_NUMBA else "numpy"
    return choice


_BACKEND = _resolve_backend()


def active_backend() -> str:
    """Name of the backend selected at import time."""
    return _BACKEND


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if HAS_NUMBA else ("numpy",)


def eval_many_with(backend: str, coeffs: np.ndarray, exps: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Evaluate with an explicit backend (used by the benchmark and tests)."""
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != exps.shape[1]:
        raise ValueError(f"points shape {pts.shape} does not match exponent width {exps.shape}")
    if backend == "numpy":
        return _numpy_eval_many(coeffs, exps, pts)
    if backend == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return _numba_eval_many(coeffs, exps, pts)
    raise ValueError(f"unknown backend {backend!r}")


def eval_many(coeffs: np.ndarray, exps: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Evaluate the polynomial given by (coeffs, exps) at all rows of pts."""
    return eval_many_with(_BACKEND, coeffs, exps, pts)


def eval_poly_many(poly, pts: np.ndarray) -> np.ndarray:
    """Evaluate a MultiPoly at all rows of pts via the active backend."""
    coeffs, exps = poly.as_arrays()
    return eval_many(coeffs, exps, pts)


def poly_evaluator(poly):
    """Fast single-point evaluator bound to the active backend.

    Newton refinement calls this hundreds of times per start; going through
    the batch kernel with a 1-row array beats the interpreted term loop by
    an order of magnitude on the numba backend.
    """
    coeffs, exps = poly.as_arrays()
    arity = poly.arity
    point = np.empty((1, arity), dtype=np.float64)
    if _BACKEND == "numba":
        kernel = _numba_eval_many
    else:
        kernel = _numpy_eval_many

    def call(values) -> float:
        point[0] = values
        return float(kernel(coeffs, exps, point)[0])

    return call


def warmup() -> None:
    """Trigger JIT compilation (a no-op on the numpy backend)."""
    coeffs = np.array([1.0, -0.5], dtype=np.float64)
    exps = np.array([[2, 0], [0, 1]], dtype=np.int64)
    pts = np.array([[0.5, 2.0]], dtype=np.float64)
    eval_many(coeffs, exps, pts)

"""Hot numeric kernels: red-black SOR sweeps for the measure solver.

Two interchangeable implementations: a numba @njit version (default when
numba imports) and a vectorized pure-numpy fallback.  Selection:

* env var PSECTOR_NO_NUMBA=1 forces the numpy path;
* a missing numba install falls back silently.

Both paths perform the identical red-black update (same floating-point
expression per node), so results agree bitwise.  benchmarks/bench_kernels.py
compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("PSECTOR_NO_NUMBA", "").strip() not in ("", "0")

try:  # pragma: no cover - import guard
    if _FORCE_NUMPY:
        raise ImportError
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


def backend() -> str:
    """Name of the active sweep implementation: 'numba' or 'numpy'."""
    return "numba" if _HAVE_NUMBA else "numpy"


def _sor_color_py(u, aW, aE, aS, aN, omega, color):
    # one half-sweep over nodes with (i + j) parity == color, vectorized;
    # same-color nodes do not couple, so this equals the sequential update
    n_r, n_phi = u.shape
    nbr = aW[1:-1, 1:-1] * u[:-2, 1:-1] + aE[1:-1, 1:-1] * u[2:, 1:-1]
    nbr += aS[1:-1, 1:-1] * u[1:-1, :-2] + aN[1:-1, 1:-1] * u[1:-1, 2:]
    s = (aW[1:-1, 1:-1] + aE[1:-1, 1:-1]) + (aS[1:-1, 1:-1] + aN[1:-1, 1:-1])
    ii, jj = np.indices((n_r - 2, n_phi - 2))
    mask = ((ii + jj) & 1) == color
    upd = u[1:-1, 1:-1] + omega * (nbr / s - u[1:-1, 1:-1])
    u[1:-1, 1:-1] = np.where(mask, upd, u[1:-1, 1:-1])


if _HAVE_NUMBA:

    @njit(cache=True)
    def _sor_color_nb(u, aW, aE, aS, aN, omega, color):  # pragma: no cover - jit
        n_r, n_phi = u.shape
        for i in range(1, n_r - 1):
            j0 = 1 + ((i + 1 + color) & 1)
            for j in range(j0, n_phi - 1, 2):
                # grouping matches the numpy path so both give bitwise-equal sweeps
                s = (aW[i, j] + aE[i, j]) + (aS[i, j] + aN[i, j])
                nbr = (aW[i, j] * u[i - 1, j] + aE[i, j] * u[i + 1, j]) + (
                    aS[i, j] * u[i, j - 1] + aN[i, j] * u[i, j + 1]
                )
                u[i, j] = u[i, j] + omega * (nbr / s - u[i, j])

    _sor_color = _sor_color_nb
else:
    _sor_color = _sor_color_py


def sor_sweep(u, aW, aE, aS, aN, omega) -> None:
    """One full red-black SOR sweep, in place.

    Interior nodes only; rows/columns 0 and -1 hold Dirichlet data.  The
    a-arrays are nonnegative edge coefficients toward the four neighbors.
    """
    _sor_color(u, aW, aE, aS, aN, omega, 0)
    _sor_color(u, aW, aE, aS, aN, omega, 1)

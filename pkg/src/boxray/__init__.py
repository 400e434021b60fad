"""Exact x-ray projection of images expanded on shifted box-spline bases."""

import importlib.util
import os

import numba

# the TBB layer warns on older TBB builds; prefer OpenMP when numba ships it
if "NUMBA_THREADING_LAYER" not in os.environ:
    if importlib.util.find_spec("numba.np.ufunc.omppool") is not None:
        numba.config.THREADING_LAYER = "omp"
    else:
        numba.config.THREADING_LAYER = "workqueue"

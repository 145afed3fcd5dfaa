"""Shared test configuration.

BLAS threading is pinned to one thread before numpy loads: the CI boxes this
suite targets expose fractional CPU quotas, where multi-threaded BLAS
spin-waits pathologically, and single-threaded execution is the reference
mode for the bit-reproducibility contracts anyway.
"""

import os

os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

"""
Process-wide settings for photonloom.

Everything here is read from the environment once, at import time.  Nothing in
the package mutates these values afterwards.
"""
import os

from services.logging import logging_config_dict

DEBUG = bool(os.environ.get("DEBUG"))

# PHOTONLOOM_LOG_LEVEL is read by services.logging
LOGGING = logging_config_dict

# Truncation of the photonic Fock space.  The protocols need three photons; the
# fourth slot is headroom for the primed arm and for dark counts.
MAX_PHOTONS = int(os.environ.get("PHOTONLOOM_MAX_PHOTONS", 4))

# Amplitudes below this are pruned from sparse states.
AMPLITUDE_EPSILON = float(os.environ.get("PHOTONLOOM_AMPLITUDE_EPSILON", 1e-14))

# States whose norm is at or below this cannot be normalized.
NORM_EPSILON = float(os.environ.get("PHOTONLOOM_NORM_EPSILON", 1e-14))

ISOMETRY_TOLERANCE = 1e-12

# Upper bound on the number of basis vectors the dense oracle will enumerate.
DENSE_BASIS_CAP = int(os.environ.get("PHOTONLOOM_DENSE_CAP", 2_000_000))

# 0 means one worker per CPU.  Workers are threads, and the simulation holds
# the GIL, so they bound concurrency without adding CPU parallelism.
THREADS = int(os.environ.get("PHOTONLOOM_THREADS", 0))


def worker_count(requested=None):
    """Return the number of workers to use for sweeps and Monte Carlo batches."""

    n = THREADS if requested is None else requested
    if n <= 0:
        n = os.cpu_count() or 1
    return n

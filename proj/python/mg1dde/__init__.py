"""Exact waiting-time densities and queue lengths for M/G/1 queues with
uniform, deterministic or exponential service."""

from ._core import (
    Density,
    Mg1Error,
    Model,
    __version__,
    invert_laplace,
    ks_distance,
    queue_length,
    queue_length_moments,
    simulate,
    solve,
    verify,
    wait_moments,
)

__all__ = [
    "Density",
    "Mg1Error",
    "Model",
    "__version__",
    "invert_laplace",
    "ks_distance",
    "queue_length",
    "queue_length_moments",
    "simulate",
    "solve",
    "verify",
    "wait_moments",
]

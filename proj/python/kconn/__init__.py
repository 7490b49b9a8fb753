"""Connections induced by operator-valued reproducing kernels."""

import json

import numpy as np

from . import _core
from ._core import DomainError, SingularError, hermitian_eigh, pinv_threshold

__all__ = [
    "DomainError",
    "SingularError",
    "connection_form",
    "covariant_derivative",
    "gram_matrix",
    "grassmann_agreement",
    "hermitian_eigh",
    "kernel_eval",
    "parallel_transport",
    "pinv_threshold",
    "random_unital_cp_choi",
    "stinespring_dilate",
    "universality_residual",
    "verify",
]


def _vec(x):
    return np.atleast_1d(np.asarray(x, dtype=complex))


def kernel_eval(spec, s, t=None):
    s = _vec(s)
    return _core.kernel_eval(spec, s, s if t is None else _vec(t))


def gram_matrix(spec, points):
    return _core.gram_matrix(spec, [_vec(p) for p in points])


def universality_residual(spec, points):
    return _core.universality_residual(spec, [_vec(p) for p in points])


def connection_form(spec, point, direction):
    return _core.connection_form(spec, _vec(point), _vec(direction))


def covariant_derivative(spec, section, point, direction):
    """Closed-form, direct and sampled covariant derivatives of section: z -> fiber vector."""
    return _core.covariant_derivative(spec, lambda z: _vec(section(z)), _vec(point), _vec(direction))


def parallel_transport(spec, start, end, v0, steps=64):
    return _core.parallel_transport(spec, _vec(start), _vec(end), _vec(v0), steps)


def random_unital_cp_choi(input_dim, output_dim, kraus_count, seed):
    return _core.random_unital_cp_choi(input_dim, output_dim, kraus_count, seed)


def stinespring_dilate(choi, input_dim):
    return _core.stinespring_dilate(np.asarray(choi, dtype=complex), input_dim)


def verify(module="all", seed=42):
    """Runs the verification suite and returns the parsed report."""
    return json.loads(_core.verify(module, seed))


def grassmann_agreement(n=4, k=2, probes=20, seed=42):
    return json.loads(_core.grassmann_agreement(n, k, probes, seed))

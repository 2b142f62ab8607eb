"""Relative entropy algebra for the quadratic entropy eta(u) = u^2 / 2.

For a flux A with entropy flux G (G' = u A'):

    eta(u|v) = (u - v)^2 / 2
    A(u|v)   = A(u) - A(v) - A'(v)(u - v)
    F(u, v)  = G(u) - G(v) - v (A(u) - A(v))
    f(u, v)  = F(u, v) / eta(u|v)

Substituting s = v + theta (u - v) in F(u, v) = int_v^u (s - v) A'(s) ds gives

    f(u, v) = 2 int_0^1 theta A'(v + theta (u - v)) dtheta,

which has no cancellation near u = v; :func:`normalized_flux` evaluates it
with Gauss-Legendre quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, PropertyViolation
from .solver import FluxSpec

__all__ = [
    "EntropyPair",
    "LambdaBounds",
    "entropy_pair",
    "relative_entropy",
    "relative_flux",
    "relative_entropy_flux",
    "normalized_flux",
    "estimate_lambda",
    "TAU",
]

TAU = 1e-8
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_THETA = 0.5 * (_GL_NODES + 1.0)
_WEIGHTS = 0.5 * _GL_WEIGHTS


def _segment_average(fn, a, b, kernel):
    """int_0^1 kernel(theta) fn(a + theta (b - a)) dtheta, broadcast over a, b."""
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    return np.sum(_WEIGHTS * kernel(_THETA) * fn(a + _THETA * (b - a)), axis=-1)


@dataclass(frozen=True)
class EntropyPair:
    """Quadratic entropy with its flux G, normalized by G(0) = 0."""

    G: Callable

    @staticmethod
    def eta(u):
        return 0.5 * np.square(u)

    @staticmethod
    def eta_prime(u):
        return np.asarray(u, dtype=float) * 1.0


def entropy_pair(flux: FluxSpec) -> EntropyPair:
    """Closed-form G if the flux provides one, else G(u) = u int_0^1 (theta u) A'(theta u) dtheta."""
    if flux.G is not None:
        return EntropyPair(G=flux.G)

    def G(u):
        u = np.asarray(u, dtype=float)
        return u * _segment_average(lambda s: s * flux.A_prime(s), 0.0 * u, u, lambda t: 1.0)

    return EntropyPair(G=G)


def relative_entropy(u, v):
    return 0.5 * np.square(np.asarray(u, dtype=float) - v)


def relative_flux(flux: FluxSpec, u, v):
    u = np.asarray(u, dtype=float)
    return flux.A(u) - flux.A(v) - flux.A_prime(v) * (u - v)


def relative_entropy_flux(flux: FluxSpec, pair: EntropyPair, u, v):
    u = np.asarray(u, dtype=float)
    return pair.G(u) - pair.G(v) - pair.eta_prime(v) * (flux.A(u) - flux.A(v))


def normalized_flux(flux: FluxSpec, pair: EntropyPair, u, v, tau: float = TAU):
    """f(u, v) = F(u, v) / eta(u|v), with the limit A'(v) when |u - v| <= tau."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    out = 2.0 * _segment_average(flux.A_prime, v, u, lambda t: t)
    out = np.where(np.abs(u - v) <= tau, flux.A_prime(v), out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LambdaBounds:
    """Sampled bounds  0 <= d_u f <= Lambda  and  d_v f >= inv_Lambda  on [-M, M]^2."""

    Lambda: float
    inv_Lambda: float
    range: tuple
    min_du: float

    @property
    def Lambda_star(self) -> float:
        """Smallest single constant satisfying both sampled bounds."""
        return max(self.Lambda, 1.0 / self.inv_Lambda)


def estimate_lambda(flux: FluxSpec, M: float, n: int = 64, pair: EntropyPair | None = None) -> LambdaBounds:
    """Central finite differences of f on an n x n grid over [-M, M]^2."""
    if not M > 0:
        raise DomainError("box radius M must be positive")
    if n < 64:
        raise DomainError("need at least 64 samples per axis")
    pair = entropy_pair(flux) if pair is None else pair
    g = np.linspace(-M, M, n)
    U, V = np.meshgrid(g, g, indexing="ij")
    d = 1e-5 * M
    du = (normalized_flux(flux, pair, U + d, V) - normalized_flux(flux, pair, U - d, V)) / (2 * d)
    dv = (normalized_flux(flux, pair, U, V + d) - normalized_flux(flux, pair, U, V - d)) / (2 * d)
    if np.min(du) < -1e-8:
        raise PropertyViolation(f"d_u f = {np.min(du):.3e} < 0 on the sampled box")
    if np.min(dv) < 1e-8:
        raise PropertyViolation(f"d_v f = {np.min(dv):.3e} is not bounded away from 0 on the sampled box")
    return LambdaBounds(Lambda=float(np.max(du)), inv_Lambda=float(np.min(dv)), range=(-M, M),
                        min_du=float(np.min(du)))

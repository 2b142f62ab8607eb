"""Independent reference values used by the tests."""

import numpy as np
from scipy import integrate, special

from fractal_burgers.fractional_operator import normalization_constant


def bump(x):
    """C-infinity bump exp(-1/(1-x^2)) supported on (-1, 1)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x) < 1
    out[m] = np.exp(-1.0 / (1.0 - x[m] ** 2))
    return out


def fraclap_quadrature(f, x, alpha, support=(-1.0, 1.0)):
    """c int_0^inf (f(x+s) + f(x-s) - 2 f(x)) s^(-1-alpha) ds by adaptive quadrature.

    Beyond the radius where both x +/- s leave the support only -2 f(x) remains,
    which integrates in closed form.
    """
    c = normalization_constant(alpha)
    fx = float(f(np.array([x]))[0])
    a, b = support
    R = max(abs(x - a), abs(x - b)) + 1e-9

    def g(s):
        return (f(np.array([x + s]))[0] + f(np.array([x - s]))[0] - 2.0 * fx) / s ** (1.0 + alpha)

    # near s = 0 the second difference cancels badly; use its Taylor limit there
    s0 = 1e-3
    f2 = (f(np.array([x + s0]))[0] + f(np.array([x - s0]))[0] - 2.0 * fx) / s0**2
    near = f2 * s0 ** (2.0 - alpha) / (2.0 - alpha)
    pts = sorted({p for p in (abs(x - a), abs(x - b)) if s0 < p < R})
    total, _ = integrate.quad(g, s0, R, points=pts or None, limit=400, epsabs=1e-12, epsrel=1e-10)
    total += near
    return c * (total - 2.0 * fx * R ** -alpha / alpha)


def fraclap_gaussian(x, alpha):
    """Exact fractional Laplacian (symbol -|xi|^alpha) of exp(-x^2/2)."""
    x = np.asarray(x, dtype=float)
    return (-(2.0 ** (alpha / 2)) * special.gamma((1 + alpha) / 2) / np.sqrt(np.pi)
            * special.hyp1f1((1 + alpha) / 2, 0.5, -x * x / 2))

"""Elliptic parametrization of Z-invariant Ising couplings.

Rapidities are measured in the same units as the quarter period K(k'). In the
geometric convention used throughout the package a rapidity line carries
u = angle * K(k') / pi, where angle is the direction of the tiling edges dual
to that line; a rhombus whose spin-spin diagonal sits at interior angle theta
then has sinh(2 beta J) = sc(theta K(k') / pi, k') below criticality and
k sc(...) above.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..elliptic import HIGH, LOW, EllipticParams

KIND_K, KIND_KBAR = "K", "K_bar"
KINDS = (KIND_K, KIND_KBAR)


@dataclass(frozen=True)
class Coupling:
    value: float
    kind: str
    rapidity_pair: tuple


def sinh_2k(params, kind, u, v):
    """Right-hand side for sinh(2 beta J) of a coupling of the given kind."""
    x = u - v
    if kind == KIND_K:
        if x == 0.0:
            return 0.0
        rhs = params.sc(x)
        return rhs if params.regime == LOW else params.k * rhs
    if kind == KIND_KBAR:
        rhs = params.cs(x)
        return rhs / params.k if params.regime == LOW else rhs
    raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def coupling(params, kind, u, v):
    """beta J for two rapidity lines crossing an edge. Raises PoleAt on the divergent branch."""
    return Coupling(0.5 * math.asinh(sinh_2k(params, kind, u, v)), kind, (float(u), float(v)))


def reversal_partner(params, u, v):
    """K(u, v) recomputed as K_bar(v + K(k'), u), i.e. after reversing one line's arrow."""
    return coupling(params, KIND_KBAR, v + params.quarter_period, u)


def angle_coupling(params, theta):
    """beta J of a rhombus whose spin vertices have interior angle theta (radians, 0 < theta < pi)."""
    if not (0.0 < theta < math.pi):
        raise ValueError("theta must lie strictly between 0 and pi")
    return coupling(params, KIND_K, theta * params.quarter_period / math.pi, 0.0).value


def angle_couplings(params, theta):
    """Vectorized angle_coupling."""
    theta = np.asarray(theta, dtype=float)
    x = params.sc(theta * params.quarter_period / math.pi)
    if params.regime == HIGH:
        x = params.k * x
    return 0.5 * np.arcsinh(x)


def diagonal_class_coupling(params, l, n=5):
    """beta J for the diagonal class l = 1..n-1 of an n-fold tiling (spin angle l pi / n)."""
    if not (1 <= l < n):
        raise ValueError(f"l must lie in 1..{n - 1}")
    return angle_coupling(params, l * math.pi / n)


def order_parameter(params):
    """Spontaneous magnetization k'^(1/4) below criticality, 0 above."""
    return params.k_prime ** 0.25 if params.regime == LOW else 0.0


@dataclass(frozen=True)
class StarTriangleResult:
    residual: float
    relative_residual: float
    R: float
    R_spread: float


def star_triangle_check(params, u, v, w, perturb=None):
    """Evaluate both sides of the star-triangle relation for all 8 outer spin states.

    Star: K_bar(u,v) s1 s4 + K(u,w) s2 s4 + K_bar(v,w) s3 s4, summed over s4.
    Triangle: K(v,w) s1 s2 + K_bar(u,w) s1 s3 + K(u,v) s2 s3.
    ``perturb`` optionally adds a number to the first star coupling.
    """
    c = lambda kind, a, b: coupling(params, kind, a, b).value
    s14, s24, s34 = c(KIND_KBAR, u, v), c(KIND_K, u, w), c(KIND_KBAR, v, w)
    t12, t13, t23 = c(KIND_K, v, w), c(KIND_KBAR, u, w), c(KIND_K, u, v)
    if perturb:
        s14 += perturb
    lhs, rhs = [], []
    for s1, s2, s3 in itertools.product((1, -1), repeat=3):
        lhs.append(sum(math.exp((s14 * s1 + s24 * s2 + s34 * s3) * s4) for s4 in (1, -1)))
        rhs.append(math.exp(t12 * s1 * s2 + t13 * s1 * s3 + t23 * s2 * s3))
    lhs, rhs = np.array(lhs), np.array(rhs)
    ratios = lhs / rhs
    R = ratios[0]
    resid = np.abs(lhs - R * rhs)
    return StarTriangleResult(float(resid.max()), float((resid / lhs).max()), float(R),
                              float((ratios.max() - ratios.min()) / abs(R)))


def grid_rapidity(params, j, n=5, flipped=False):
    """Rapidity of grid j's lines: its direction angle times K(k') / pi, plus K(k') if reversed."""
    step = 2.0 * math.pi / n if n % 2 else math.pi / n
    u = j * step * params.quarter_period / math.pi
    return u + params.quarter_period if flipped else u

"""Complete elliptic integral K and Jacobi elliptic functions of real argument.

Everything here takes the *modulus* (not the parameter m = k**2). The AGM
sequence gives K, and the same sequence drives the descending Landen
recursion for sn, cn, dn.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ModulusOutOfRange, PoleAt

_AGM_TOL = 1e-17
_AGM_MAXITER = 64

LOW = "low"
HIGH = "high"
REGIMES = (LOW, HIGH)


def _check_modulus(m, complement):
    # m may round to 1 when it is itself a complement; the explicit complement keeps it finite
    top_ok = m == 1.0 and complement is not None and complement > 0.0
    if not (0.0 <= m < 1.0 or top_ok):
        raise ModulusOutOfRange(f"modulus must lie in [0, 1), got {m!r}")
    if complement is None:
        complement = math.sqrt((1.0 - m) * (1.0 + m))
    elif not (0.0 < complement <= 1.0):
        raise ModulusOutOfRange(f"complementary modulus must lie in (0, 1], got {complement!r}")
    return complement


def _agm_sequence(m, complement):
    a, b, c = [1.0], [complement], [m]
    while abs(c[-1]) > _AGM_TOL * a[-1] and len(a) < _AGM_MAXITER:
        an, bn = a[-1], b[-1]
        a.append(0.5 * (an + bn))
        b.append(math.sqrt(an * bn))
        c.append(0.5 * (an - bn))
    return a, b, c


def complete_K(m, complement=None):
    """Complete elliptic integral of the first kind, K(m), for modulus m.

    Pass ``complement`` (= sqrt(1 - m**2)) when it is known more accurately
    than it can be recomputed, e.g. when m itself is a complementary modulus.
    """
    complement = _check_modulus(m, complement)
    a, _, _ = _agm_sequence(m, complement)
    return math.pi / (2.0 * a[-1])


def jacobi(u, m, complement=None):
    """Return (sn, cn, dn) at real argument(s) ``u`` for modulus ``m``.

    Works elementwise on arrays. Uses the descending Landen (AGM) recursion.
    """
    complement = _check_modulus(m, complement)
    u_arr = np.asarray(u, dtype=float)
    a, _, c = _agm_sequence(m, complement)
    n = len(a) - 1
    if n == 0:
        sn, cn, dn = np.sin(u_arr), np.cos(u_arr), np.ones_like(u_arr)
    else:
        phi = (2.0 ** n) * a[n] * u_arr
        for j in range(n, 0, -1):
            phi = 0.5 * (phi + np.arcsin(c[j] / a[j] * np.sin(phi)))
        sn = np.sin(phi)
        cn = np.cos(phi)
        # dn > 0 for real u; the cos-ratio form loses digits where cn ~ 0
        dn = np.sqrt((1.0 - m * sn) * (1.0 + m * sn))
    if np.ndim(u) == 0:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


def sc(u, m, complement=None, pole_tol=1e-14):
    """sn/cn. Raises PoleAt where cn vanishes."""
    sn, cn, _ = jacobi(u, m, complement)
    if np.any(np.abs(cn) <= pole_tol):
        raise PoleAt(f"sc has a pole at u={u!r} (modulus {m})")
    return sn / cn


def cs(u, m, complement=None, pole_tol=1e-14):
    """cn/sn. Raises PoleAt where sn vanishes (u = 0 included)."""
    sn, cn, _ = jacobi(u, m, complement)
    if np.any(np.abs(sn) <= pole_tol):
        raise PoleAt(f"cs has a pole at u={u!r} (modulus {m})")
    return cn / sn


@dataclass(frozen=True)
class EllipticParams:
    """Elliptic modulus k of the Ising parametrization and its regime.

    ``quarter_period`` is K(k'), the complete integral at the complementary
    modulus; rapidities are measured in units where it is the natural scale.
    """

    k: float
    regime: str = LOW
    k_prime: float = field(init=False)
    quarter_period: float = field(init=False)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if not (0.0 < self.k < 1.0):
            raise ModulusOutOfRange(f"k must lie in (0, 1), got {self.k!r}")
        k_prime = math.sqrt((1.0 - self.k) * (1.0 + self.k))
        object.__setattr__(self, "k_prime", k_prime)
        object.__setattr__(self, "quarter_period", complete_K(k_prime, complement=self.k))

    def dual(self):
        """Same modulus, opposite regime."""
        return EllipticParams(self.k, HIGH if self.regime == LOW else LOW)

    def sc(self, u):
        """sc(u, k') with the exact complement k."""
        return sc(u, self.k_prime, complement=self.k)

    def cs(self, u):
        return cs(u, self.k_prime, complement=self.k)

    def jacobi(self, u):
        return jacobi(u, self.k_prime, complement=self.k)

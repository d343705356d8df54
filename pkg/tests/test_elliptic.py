import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from quasilattice.elliptic import HIGH, LOW, EllipticParams, complete_K, cs, jacobi, sc
from quasilattice.errors import ModulusOutOfRange, PoleAt

pytestmark = pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")


def quad_K(m):
    return integrate.quad(lambda t: 1.0 / math.sqrt(1.0 - (m * math.sin(t)) ** 2), 0, math.pi / 2,
                          epsabs=1e-14, epsrel=1e-14)[0]


def test_K_at_zero():
    assert complete_K(0.0) == pytest.approx(math.pi / 2, abs=1e-15)


@pytest.mark.parametrize("m", [0.1, 0.5, math.sqrt(0.51), 0.9, 0.99])
def test_K_against_quadrature(m):
    assert complete_K(m) == pytest.approx(quad_K(m), abs=1e-10)


def test_K_monotone():
    vals = [complete_K(m) for m in np.linspace(0, 0.999, 100)]
    assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize("m", [-0.1, 1.0, 1.5, float("nan")])
def test_modulus_range(m):
    with pytest.raises(ModulusOutOfRange):
        complete_K(m)


def test_circular_limit():
    u = np.linspace(-5, 5, 41)
    sn, cn, dn = jacobi(u, 0.0)
    assert np.allclose(sn, np.sin(u), atol=1e-15)
    assert np.allclose(cn, np.cos(u), atol=1e-15)
    assert np.all(dn == 1.0)


@pytest.mark.parametrize("m", [0.0, 0.3, 0.9])
def test_origin(m):
    assert jacobi(0.0, m) == (0.0, 1.0, 1.0)


@pytest.mark.parametrize("m", [0.3, 0.7])
def test_sn_at_quarter_period(m):
    sn, cn, _ = jacobi(quad_K(m), m)
    assert sn == pytest.approx(1.0, abs=1e-12)
    assert cn == pytest.approx(0.0, abs=1e-7)


@pytest.mark.parametrize("m", [0.3, 0.7])
def test_inverts_incomplete_integral(m):
    for phi in (0.2, 0.7, 1.3):
        u = integrate.quad(lambda t: 1.0 / math.sqrt(1.0 - (m * math.sin(t)) ** 2), 0, phi,
                           epsabs=1e-14, epsrel=1e-14)[0]
        assert jacobi(u, m)[0] == pytest.approx(math.sin(phi), abs=1e-12)


@given(st.floats(-20, 20), st.floats(0.0, 0.999))
@settings(max_examples=200, deadline=None)
def test_against_scipy(u, m):
    ref = special.ellipj(u, m * m)[:3]
    assert np.allclose(jacobi(u, m), ref, atol=1e-11)


def test_sc_cs_values():
    assert sc(0.0, 0.4) == 0.0
    with pytest.raises(PoleAt):
        cs(0.0, 0.4)
    with pytest.raises(PoleAt):
        sc(complete_K(0.4), 0.4)
    sn, cn, _ = jacobi(0.8, 0.4)
    assert sc(0.8, 0.4) == pytest.approx(sn / cn)
    assert cs(0.8, 0.4) == pytest.approx(cn / sn)


def test_cs_grows_near_origin():
    vals = [abs(cs(u, 0.5)) for u in (1e-2, 1e-4, 1e-6)]
    assert vals[0] < vals[1] < vals[2]


def test_params_fields():
    p = EllipticParams(0.7)
    assert p.k ** 2 + p.k_prime ** 2 == pytest.approx(1.0, abs=1e-14)
    assert p.quarter_period == pytest.approx(quad_K(p.k_prime), abs=1e-12)
    assert p.dual().regime == HIGH and p.dual().dual().regime == LOW


@pytest.mark.parametrize("k", [0.0, 1.0, -0.2])
def test_params_reject_modulus(k):
    with pytest.raises(ModulusOutOfRange):
        EllipticParams(k)


def test_params_reject_regime():
    with pytest.raises(ValueError):
        EllipticParams(0.5, "medium")


def test_complement_used_exactly():
    # tiny k: the complement 1 - k^2/2 would lose k entirely if recomputed from k'
    p = EllipticParams(1e-9)
    assert p.quarter_period == pytest.approx(math.log(4e9), abs=1e-8)

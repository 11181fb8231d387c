import math

import numpy as np
import pytest
from scipy import integrate

from wgpair.expsum import (
    ExpSum,
    NonIntegrableError,
    decay_integral,
    l2_inner,
    truncated_l2_inner,
    wedge_integral,
)


def quad_complex(f, a, b):
    re = integrate.quad(lambda t: f(t).real, a, b, epsabs=1e-14, epsrel=1e-12, limit=400)[0]
    im = integrate.quad(lambda t: f(t).imag, a, b, epsabs=1e-14, epsrel=1e-12, limit=400)[0]
    return re + 1j * im


A = ExpSum.from_terms([(1.0 + 0.5j, 0.7 + 0.3j), (-0.4j, 1.9 - 1.1j)])
B = ExpSum.from_terms([(0.8, 0.25), (0.3 - 0.2j, 1.0 + 2.0j)])


def test_merge_within_tolerance():
    s = ExpSum.from_terms([(1.0, 0.5 + 1j), (2.0, 0.5 + 1j + 1e-13), (1.0, 0.6)])
    assert len(s) == 2
    assert s.coefficients[0] == 3.0


def test_rejects_growing_term():
    with pytest.raises(ValueError):
        ExpSum((1.0,), (-0.1,))


def test_evaluation_and_arithmetic():
    t = np.linspace(0, 3, 7)
    np.testing.assert_allclose((A + B)(t), A(t) + B(t), atol=1e-14)
    np.testing.assert_allclose((A - B)(t), A(t) - B(t), atol=1e-14)
    np.testing.assert_allclose(A.scale(2j)(t), 2j * A(t), atol=1e-14)
    np.testing.assert_allclose(A.rescaled(3.0, 2.0)(t), 2.0 * A(3.0 * t), atol=1e-14)


def test_l2_inner_matches_quadrature():
    ref = quad_complex(lambda t: A(t) * np.conj(B(t)), 0, np.inf)
    assert abs(l2_inner(A, B) - ref) < 1e-10
    assert abs(A.norm2() - quad_complex(lambda t: abs(A(t)) ** 2, 0, np.inf).real) < 1e-10


def test_truncated_inner_matches_quadrature():
    ref = quad_complex(lambda t: A(t) * np.conj(B(t)), 0, 2.5)
    assert abs(truncated_l2_inner(A, B, 2.5) - ref) < 1e-10


def test_marginal_terms_are_not_integrable():
    m = ExpSum.from_terms([(1.0, 2j)])
    with pytest.raises(NonIntegrableError):
        l2_inner(m, m)
    assert truncated_l2_inner(m, m, 4.0) == pytest.approx(4.0, abs=1e-12)


def test_decay_integral_small_rate_limit():
    assert decay_integral(1e-12 + 0j, 3.0) == pytest.approx(3.0, rel=1e-11)
    assert decay_integral(0.5 + 0j, math.inf) == pytest.approx(2.0)
    with pytest.raises(NonIntegrableError):
        decay_integral(0j, math.inf)


@pytest.mark.parametrize("a,b,T", [
    (0.7 + 0.4j, 0.5 - 0.2j, math.inf),
    (1.3, 0.2 + 1j, 4.0),
    (0.0, 0.8 + 0.1j, math.inf),
    (1e-12, 0.9, 3.0),
])
def test_wedge_integral_matches_dblquad(a, b, T):
    hi = 60.0 if math.isinf(T) else T
    f = lambda t1, t2: np.exp(-a * t1 - b * t2)
    re = integrate.dblquad(lambda t1, t2: f(t1, t2).real, 0, hi, 0, lambda t2: t2, epsabs=1e-13)[0]
    im = integrate.dblquad(lambda t1, t2: f(t1, t2).imag, 0, hi, 0, lambda t2: t2, epsabs=1e-13)[0]
    assert abs(wedge_integral(complex(a), complex(b), T) - (re + 1j * im)) < 1e-9


def test_split_stable():
    s = ExpSum.from_terms([(1.0, 1.0), (0.5, 0.3j)])
    dec, mar = s.split_stable()
    assert dec.rates == (1.0,) and mar.rates == (0.3j,)

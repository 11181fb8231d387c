import math

import numpy as np
import pytest
from scipy import integrate

from wgpair.core import (
    EE,
    EG,
    GE,
    GG,
    PHI_PLUS,
    PSI_MINUS,
    PSI_PLUS,
    SystemParams,
    basis_state,
    classify_condition,
    derive_rates,
    directional_states,
    effective_hamiltonian,
    jump_operator,
    kraus,
    nonhermitian_hamiltonian,
)
from wgpair.expsum import ExpSum, l2_inner

rng = np.random.default_rng(20261015)


def random_params(n):
    for _ in range(n):
        yield SystemParams(
            theta=float(rng.uniform(0, 4 * math.pi)),
            g_c=float(rng.uniform(-2, 2)),
            gamma=float(rng.uniform(0.2, 3.0)),
        )


@pytest.mark.parametrize("theta,g_c,expected", [
    (math.pi / 2, 1.0, (1.0, 1.0, 0.0)),
    (math.pi, 0.0, (0.0, 2.0, 0.0)),
    (0.0, 0.0, (2.0, 0.0, 0.0)),
])
def test_rates_examples(theta, g_c, expected):
    r = derive_rates(SystemParams(theta, g_c))
    assert (r.gamma_plus, r.gamma_minus, r.delta) == pytest.approx(expected, abs=1e-15)


def test_rates_sum_rule():
    for p in random_params(200):
        r = derive_rates(p)
        assert r.gamma_plus + r.gamma_minus == pytest.approx(2 * p.gamma, rel=1e-15)


@pytest.mark.parametrize("bad", [dict(theta=0.1, gamma=0.0), dict(theta=-1.0), dict(theta=math.nan), dict(theta=1.0, g_c=math.inf)])
def test_params_validation(bad):
    with pytest.raises(ValueError):
        SystemParams(**bad)


def test_hamiltonian_examples():
    assert np.all(effective_hamiltonian(SystemParams(math.pi / 2, 1.0)) == 0)
    h = effective_hamiltonian(SystemParams(math.pi / 2, 0.0))
    assert h[EG, GE] == pytest.approx(0.5) and h[GE, EG] == pytest.approx(0.5)
    for p in random_params(20):
        assert effective_hamiltonian(p)[EE, EE] == 0


def test_jump_examples():
    p = SystemParams(math.pi / 2, 0.0)
    np.testing.assert_allclose(jump_operator("L", p) @ PHI_PLUS, 0, atol=1e-15)
    np.testing.assert_allclose(jump_operator("R", p) @ basis_state("ee"), -PHI_PLUS, atol=1e-15)


def test_annihilation_all_theta():
    for theta in np.linspace(0, 2 * math.pi, 37):
        p = SystemParams(float(theta), 0.3)
        psi_l, psi_r = directional_states(p)
        assert np.linalg.norm(jump_operator("R", p) @ psi_l) < 1e-15
        assert np.linalg.norm(jump_operator("L", p) @ psi_r) < 1e-15
        assert np.vdot(psi_l, psi_l).real == pytest.approx(1.0, abs=1e-15)


def test_directional_state_examples():
    psi_l, psi_r = directional_states(SystemParams(math.pi / 2))
    np.testing.assert_allclose(psi_r, PHI_PLUS, atol=1e-15)
    psi_l, psi_r = directional_states(SystemParams(0.0))
    for v in (psi_l, psi_r):
        assert abs(abs(np.vdot(PSI_MINUS, v)) - 1) < 1e-15


def test_kraus_examples():
    p = SystemParams(0.9, 0.4, 1.7)
    np.testing.assert_allclose(kraus(p, 0.0), np.eye(4), atol=1e-15)
    for t in (0.3, 2.0, 7.5):
        assert kraus(p, t)[EE, EE] == pytest.approx(math.exp(-p.gamma * t), rel=1e-12)
        k = kraus(SystemParams(math.pi / 2, 1.0), t)
        assert abs(k[EG, GE]) < 1e-15 and abs(k[GE, EG]) < 1e-15
    with pytest.raises(ValueError):
        kraus(p, -1.0)


def test_kraus_generator():
    p = SystemParams(1.1, -0.4, 0.8)
    h = 1e-6
    deriv = (kraus(p, 0.5 + h) - kraus(p, 0.5 - h)) / (2 * h)
    np.testing.assert_allclose(deriv, -1j * nonhermitian_hamiltonian(p) @ kraus(p, 0.5), atol=1e-8)


def test_contraction_and_semigroup_random():
    worst_sv, worst_semi = 0.0, 0.0
    for p in random_params(1000):
        t, s = rng.uniform(0, 10 / p.gamma, size=2)
        kt, ks, kts = kraus(p, t), kraus(p, s), kraus(p, t + s)
        worst_sv = max(worst_sv, np.linalg.svd(kt, compute_uv=False).max())
        worst_semi = max(worst_semi, np.max(np.abs(kts - kt @ ks)))
    assert worst_sv <= 1 + 1e-12
    assert worst_semi <= 1e-12


def test_bell_eigenstructure():
    for p in random_params(50):
        r = derive_rates(p)
        for t in (0.1, 1.0, 5.0):
            k = kraus(p, t)
            assert np.linalg.norm(k @ PSI_PLUS - np.exp(-r.mu_plus * t / 2) * PSI_PLUS) <= 1e-12
            assert np.linalg.norm(k @ PSI_MINUS - np.exp(-r.mu_minus * t / 2) * PSI_MINUS) <= 1e-12


@pytest.mark.parametrize("theta,g_c,kind,n", [
    (math.pi / 2, 1.0, "controlled_antiresonance", 0),
    (3 * math.pi / 2, -1.0, "controlled_antiresonance", 1),
    (math.pi / 2, 0.0, "antiresonance", 0),
    (math.pi, 0.0, "resonance", 1),
    (0.7, 0.3, "generic", None),
])
def test_classification(theta, g_c, kind, n):
    c = classify_condition(SystemParams(theta, g_c), 1e-9)
    assert (c.kind, c.n, c.tol) == (kind, n, 1e-9)


def test_classification_tolerance_is_explicit():
    p = SystemParams(math.pi / 2 + 1e-6, 1.0)
    assert classify_condition(p, 1e-9).kind == "generic"
    assert classify_condition(p, 1e-5).kind == "controlled_antiresonance"
    with pytest.raises(ValueError):
        classify_condition(p, 0.0)


def test_l2_inner_examples():
    a = ExpSum.from_terms([(1.0, 0.5)])
    assert l2_inner(a, a) == pytest.approx(1.0)
    a = ExpSum.from_terms([(1.0, 1 + 1j)])
    b = ExpSum.from_terms([(1.0, 1 - 1j)])
    # pair rate (1+i) + conj(1-i) = 2+2i
    assert l2_inner(a, b) == pytest.approx((1 - 1j) / 4, abs=1e-15)
    ref = integrate.quad(lambda t: np.exp(-2 * t) * math.cos(2 * t), 0, np.inf)[0]
    ref -= 1j * integrate.quad(lambda t: np.exp(-2 * t) * math.sin(2 * t), 0, np.inf)[0]
    assert l2_inner(a, b) == pytest.approx(ref, abs=1e-12)

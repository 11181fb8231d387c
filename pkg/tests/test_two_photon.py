import math

import numpy as np
import pytest

import oracles
from wgpair.core import SystemParams, derive_rates
from wgpair.expsum import ExpSum, NonIntegrableError
from wgpair.two_photon import (
    PAIRS,
    OutputMode,
    bunching_report,
    kernel_by_composition,
    noon_fidelity,
    noon_overlap,
    pair_probability,
    r2_printed,
    two_photon_kernel,
)

rng = np.random.default_rng(11)
CA = SystemParams(math.pi / 2, 1.0)


def random_params(n, gamma=True):
    for _ in range(n):
        yield SystemParams(float(rng.uniform(0, 2 * math.pi)), float(rng.uniform(-2, 2)),
                           float(rng.uniform(0.3, 3)) if gamma else 1.0)


def wedge_points(n, scale):
    t1 = rng.uniform(0, 4 / scale, n)
    return t1, t1 + rng.uniform(0, 4 / scale, n)


def test_closed_form_matches_composition():
    worst = 0.0
    for p in random_params(40):
        t1, t2 = wedge_points(12, p.gamma)
        for pair in PAIRS:
            a = two_photon_kernel(p, pair)(t1, t2)
            b = kernel_by_composition(p, pair, t1, t2)
            worst = max(worst, np.max(np.abs(a - b)))
    assert worst <= 1e-12


def test_kernel_vanishes_off_wedge():
    k = two_photon_kernel(SystemParams(0.8, 0.1), "RR")
    assert k(2.0, 1.0) == 0


def test_parallel_phase_relation():
    # composing the jump operators gives lambda_LL = exp(2i theta) lambda_RR
    for p in random_params(20):
        t1, t2 = wedge_points(8, p.gamma)
        rr = kernel_by_composition(p, "RR", t1, t2)
        ll = kernel_by_composition(p, "LL", t1, t2)
        np.testing.assert_allclose(ll, np.exp(2j * p.theta) * rr, atol=1e-13)
        printed_rr = two_photon_kernel(p, "RR", printed_phases=True)(t1, t2)
        printed_ll = two_photon_kernel(p, "LL", printed_phases=True)(t1, t2)
        np.testing.assert_allclose(printed_ll, np.exp(-2j * p.theta) * printed_rr, atol=1e-13)
        np.testing.assert_allclose(np.abs(printed_rr), np.abs(rr), atol=1e-13)


def test_controlled_antiresonance_kernels():
    t1, t2 = wedge_points(30, 1.0)
    # sin^2(pi/4) - cos^2(pi/4) is zero up to one rounding
    assert np.max(np.abs(two_photon_kernel(CA, "RL")(t1, t2))) < 1e-15
    assert np.max(np.abs(two_photon_kernel(CA, "LR")(t1, t2))) < 1e-15
    rr = two_photon_kernel(CA, "RR")(t1, t2)
    np.testing.assert_allclose(np.abs(rr) ** 2, np.exp(-2 * t1) * np.exp(-(t2 - t1)), rtol=1e-12)
    ll = two_photon_kernel(CA, "LL")(t1, t2)
    np.testing.assert_allclose(ll, -rr, atol=1e-15)


def test_pair_probability_examples():
    assert pair_probability(two_photon_kernel(CA, "RR")) == pytest.approx(0.5, abs=1e-12)
    assert pair_probability(two_photon_kernel(CA, "LL")) == pytest.approx(0.5, abs=1e-12)
    assert pair_probability(two_photon_kernel(CA, "RL")) < 1e-30
    rep = bunching_report(SystemParams(math.pi / 2, 0.0))
    assert rep.p_antiparallel == pytest.approx(0.25, abs=1e-12)
    assert rep.p_parallel == pytest.approx(0.75, abs=1e-12)


@pytest.mark.parametrize("theta,g_c", [(math.pi / 4, 0.0), (1.1, 0.7), (2.5, -1.3)])
def test_pair_probability_matches_quadrature(theta, g_c):
    for pair in PAIRS:
        ref = oracles.pair_probability(theta, g_c, pair)
        assert pair_probability(two_photon_kernel(SystemParams(theta, g_c), pair)) == pytest.approx(ref, rel=1e-7)


def test_central_symmetry_is_exact():
    for p in random_params(100):
        rep = bunching_report(p)
        assert rep.pair_probabilities["RR"] == rep.pair_probabilities["LL"]
        assert rep.pair_probabilities["RL"] == rep.pair_probabilities["LR"]


def test_normalization():
    for p in random_params(200):
        r = derive_rates(p)
        if min(r.gamma_plus, r.gamma_minus) < 1e-6:
            continue
        rep = bunching_report(p)
        assert sum(rep.pair_probabilities.values()) == pytest.approx(1.0, abs=1e-9)
        assert rep.full_decay
        assert rep.r2_oracle == pytest.approx(rep.p_antiparallel / rep.p_parallel, rel=1e-15)


def test_resonance_ratio():
    # |ee> only feeds the bright Bell state, so decay is complete at resonance
    for theta in (0.0, math.pi, 2 * math.pi):
        rep = bunching_report(SystemParams(theta, 0.0))
        assert rep.full_decay
        assert rep.r2_oracle == pytest.approx(1.0, abs=1e-12)


def test_non_integrable_kernel_flagged():
    # build a kernel with a genuinely marginal delay component
    from wgpair.two_photon import TwoPhotonKernel
    k = TwoPhotonKernel("RR", 1.0, 1.0, ExpSum.from_terms([(1.0, 0.5j), (1.0, 1.0)]))
    with pytest.raises(NonIntegrableError):
        pair_probability(k)


@pytest.mark.parametrize("theta,g_c,expected", [
    (math.pi / 2, 1.0, 0.0),
    (math.pi / 2, 0.0, 1 / 3),
])
def test_r2_examples(theta, g_c, expected):
    assert bunching_report(SystemParams(theta, g_c)).r2_oracle == pytest.approx(expected, abs=1e-12)


def test_r2_bound_at_zero_coupling():
    thetas = np.linspace(0.01, 2 * math.pi - 0.01, 200)
    thetas = thetas[np.min(np.abs(thetas[:, None] - np.pi * np.arange(3)), axis=1) > 1e-3]
    vals = np.array([bunching_report(SystemParams(float(t), 0.0)).r2_oracle for t in thetas])
    assert np.all(vals >= 1 / 3 - 1e-12) and np.all(vals <= 1 + 1e-12)


def test_r2_row_monotone_between_resonance_and_antiresonance():
    thetas = np.linspace(0, math.pi / 2, 51)
    vals = [bunching_report(SystemParams(float(t), 0.0)).r2_oracle for t in thetas]
    assert vals[0] == pytest.approx(1.0, abs=1e-12)
    assert vals[-1] == pytest.approx(1 / 3, abs=1e-12)
    assert np.all(np.diff(vals) < 0)


def test_printed_formula_disagrees():
    p = SystemParams(math.pi / 4, 0.0)
    assert r2_printed(p) >= 1.0
    assert abs(1 / r2_printed(p) - bunching_report(p).r2_oracle) > 0.1
    for q in random_params(50, gamma=False):
        assert r2_printed(q) >= 1.0


def test_output_mode_validation():
    with pytest.raises(ValueError):
        OutputMode("R", ExpSum.from_terms([(2.0, 0.5)]))
    with pytest.raises(ValueError):
        OutputMode("X", ExpSum.from_terms([(1.0, 0.5)]))
    assert OutputMode.exponential("L", 2.5).envelope.norm2() == pytest.approx(1.0)


def test_noon_fidelity_curve():
    for gt in (0.5, 1.0, 2.0, 5.0):
        for gamma in (1.0, 2.0):
            p = SystemParams(math.pi / 2, 1.0, gamma)
            assert noon_fidelity(p, gt / gamma) == pytest.approx((1 - math.exp(-gt)) ** 4, abs=1e-9)
    assert noon_fidelity(CA, 0.0) == 0.0
    assert noon_fidelity(CA, 60.0) == pytest.approx(1.0, abs=1e-12)
    assert noon_fidelity(CA, 1.0) == pytest.approx(0.159661, abs=1e-6)


def test_noon_branches():
    ov = noon_overlap(CA, 60.0)
    assert abs(ov.branch_r) ** 2 == pytest.approx(0.5, abs=1e-12)
    assert ov.branch_l == pytest.approx(-ov.branch_r, abs=1e-14)
    ov = noon_overlap(SystemParams.controlled_antiresonance(1), 60.0)
    assert abs((ov.branch_r - ov.branch_l) / math.sqrt(2)) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_noon_requires_controlled_antiresonance():
    with pytest.raises(ValueError):
        noon_fidelity(SystemParams(math.pi / 2, 0.0), 1.0)
    assert noon_fidelity(SystemParams(math.pi / 2, 0.0), 30.0, force=True) < 1.0

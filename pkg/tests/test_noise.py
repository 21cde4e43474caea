import numpy as np
import pytest
from scipy.integrate import quad

from oracles import e1_mpmath, rate_average_quad, telegraph_average
from rtnbosonic.errors import DomainError
from rtnbosonic.fock import Channel, random_density_matrix, rotation_operator
from rtnbosonic.noise import (EULER_GAMMA, GaussianDephasing, GaussianDephasingParams, LossParams,
                              NoiseModel, OneOverFDephasing, OneOverFParams, RTNDephasing, RTNParams,
                              apply_rtn_dephasing, exp_integral_e1, gaussian_dephasing_channel,
                              gaussian_dephasing_factor, loss_kraus, one_over_f_factor,
                              oneoverf_channel, rtn_channel, rtn_dephasing_factor, rtn_rate_average)
from rtnbosonic.nonmarkov import trace_distance
from rtnbosonic.states import coherent_state, coherent_vector
from rtnbosonic.fock import mode_operators


# exponential integral ---------------------------------------------------------

def test_e1_at_one_against_quadrature():
    ref = quad(lambda t: np.exp(-t) / t, 1, np.inf, epsabs=1e-14, epsrel=1e-12)[0]
    assert abs(exp_integral_e1(1.0) - ref) < 1e-9
    assert abs(exp_integral_e1(1.0) - 0.2193839344) < 1e-9


def test_e1_small_argument_series_identity():
    x = 1e-3
    lhs = exp_integral_e1(x).real + np.log(x) + EULER_GAMMA
    assert lhs == pytest.approx(x - x * x / 4, abs=1e-10)


def test_e1_conjugation_symmetry():
    z = 1 + 2j
    assert exp_integral_e1(np.conj(z)) == pytest.approx(np.conj(exp_integral_e1(z)), abs=1e-15)


def test_e1_domain_error():
    with pytest.raises(DomainError):
        exp_integral_e1(0.0)


def test_e1_relative_accuracy_against_mpmath():
    rng = np.random.default_rng(0)
    zs = np.concatenate([
        rng.uniform(0, 60, 300) + 1j * rng.uniform(-80, 80, 300),
        rng.uniform(-6, 0, 200) + 1j * rng.uniform(-10, 10, 200),
        10.0 ** rng.uniform(-6, 3, 200) * np.exp(1j * rng.uniform(-np.pi / 2, np.pi / 2, 200)),
        np.array([2.0, 2.0001, 1.9999j, -1.5 + 0.1j, 8.0, 8 + 1e-9j]),
    ])
    normal = zs.real < 690  # beyond this |E1| < 1e-300 is subnormal in double precision
    got = exp_integral_e1(zs[normal])
    ref = np.array([e1_mpmath(z) for z in zs[normal]])
    rel = np.abs(got - ref) / np.abs(ref)
    assert rel.max() < 1e-10


def test_e1_far_right_underflows_to_zero():
    got = exp_integral_e1(np.array([726.5 + 303.6j, 1e4, 5e3 - 2e3j]))
    assert np.all(np.isfinite(got)) and np.all(np.abs(got) < 1e-300)


# telegraph dephasing function ---------------------------------------------------

def test_rtn_factor_examples():
    assert rtn_dephasing_factor(3, 2.0, 0.0) == 1.0
    for r in (0.01, 1.0, 50.0):
        assert rtn_dephasing_factor(0, r, 3.7) == 1.0
    assert abs(rtn_dephasing_factor(1, 1e-9, np.pi / 2)) < 1e-8


def test_rtn_factor_against_generator_oracle():
    for a in (1, 2, 3, 7):
        for r in (0.01, 0.1, 0.5, 1.0, 2.0, 3.0, 10.0, 100.0, float(a)):
            for tau in (0.1, 0.5, 1.0, 2.0, 5.0, 13.0):
                assert rtn_dephasing_factor(a, r, tau) == pytest.approx(
                    telegraph_average(a, r, tau), abs=1e-12)


def test_rtn_factor_continuous_at_critical_ratio():
    for a in (1, 3):
        for tau in (0.5, 2.0, 10.0):
            vals = [rtn_dephasing_factor(a, a + s, tau) for s in (-1e-6, 0.0, 1e-6)]
            assert max(vals) - min(vals) < 1e-4
            assert vals[1] == pytest.approx(np.exp(-a * tau) * (1 + a * tau), rel=1e-12)


def test_rtn_factor_bounded_and_unit_at_origin():
    a = np.arange(-10, 11)
    taus = np.linspace(0, 20, 81)
    for r in (0.01, 0.1, 1.0, 10.0, 100.0):
        g = rtn_dephasing_factor(a[None, :], r, taus[:, None])
        assert np.all(np.abs(g) <= 1 + 1e-15)
        np.testing.assert_array_equal(g[0], 1.0)
        np.testing.assert_array_equal(g[:, 10], 1.0)


def test_rtn_factor_large_r_no_overflow():
    assert rtn_dephasing_factor(2, 1e6, 1e3) == pytest.approx(np.exp(-4 * 1e3 / 2e6), rel=1e-9)


def test_apply_rtn_dephasing_properties():
    rng = np.random.default_rng(5)
    rho = random_density_matrix(8, rng)
    diag = np.diag(np.diag(rho))
    np.testing.assert_array_equal(apply_rtn_dephasing(diag, RTNParams(0.3, 2.0)), diag)
    out = apply_rtn_dephasing(rho, RTNParams(0.3, 2.0))
    np.testing.assert_allclose(out, out.conj().T, atol=0)
    assert np.trace(out) == pytest.approx(np.trace(rho), abs=1e-15)


def test_large_r_matches_gaussian_dephasing():
    d, r, tau = 30, 100.0, 1.0
    rho = coherent_state(2.0, d)
    rtn = apply_rtn_dephasing(rho, RTNParams(r, tau))
    gau = gaussian_dephasing_channel(GaussianDephasingParams(tau / r), d).apply(rho)
    assert np.max(np.abs(rtn - gau)) <= 1e-2


def test_small_r_two_blob_mixture():
    d, a0, theta, r, tau = 40, 2.0, 0.4, 0.01, 0.3
    rho = coherent_state(a0 * np.exp(1j * theta), d)
    out = apply_rtn_dephasing(rho, RTNParams(r, tau))
    blobs = [coherent_vector(a0 * np.exp(1j * (theta + s * tau)), d) for s in (1, -1)]
    mix = 0.5 * sum(np.outer(v, v.conj()) for v in blobs)
    assert trace_distance(out, mix) <= 5e-2


def test_gaussian_factor_examples():
    assert gaussian_dephasing_factor(2, 1.0) == pytest.approx(0.1353352832366127, abs=1e-15)
    assert gaussian_dephasing_factor(5, 0.0) == 1.0
    assert gaussian_dephasing_factor(0, 3.0) == 1.0


# 1/f ----------------------------------------------------------------------------

def test_oneoverf_trivial_cases():
    assert one_over_f_factor(0, OneOverFParams(4, tau=2.0)) == 1.0
    assert one_over_f_factor(3, OneOverFParams(4, tau=0.0)) == 1.0


def test_oneoverf_power_structure():
    one = one_over_f_factor(1, OneOverFParams(1, tau=1.3))
    three = one_over_f_factor(1, OneOverFParams(3, tau=1.3))
    assert three == pytest.approx(one ** 3, abs=1e-12)


def test_oneoverf_normalized_coupling():
    p = OneOverFParams(4, tau=1.3, coupling_normalized=True)
    base = rtn_rate_average(0.5, 1.3, p.r_min, p.r_max)
    assert one_over_f_factor(1, p) == pytest.approx(base ** 4, abs=1e-14)


@pytest.mark.parametrize("a,tau,r_min,r_max", [
    (1, 1.0, 1e-4, 1e4), (2, 0.5, 1e-4, 1e4), (3, 7.0, 1e-2, 1e2), (1, 2.0, 2.0, 50.0),
    (5, 0.3, 1e-3, 1.0), (1, 1.0, 1.0, 10.0), (2, 1.0, 0.1, 2.0), (4, 40.0, 1e-4, 1e4),
])
def test_rate_average_against_quadrature(a, tau, r_min, r_max):
    # covers |a| inside, below and above the rate window plus both ties
    assert rtn_rate_average(a, tau, r_min, r_max) == pytest.approx(
        rate_average_quad(a, tau, r_min, r_max), abs=1e-10)


def test_rate_average_continuous_at_ties():
    for edge in ("min", "max"):
        vals = []
        for s in (-1e-9, 0.0, 1e-9):
            r_min, r_max = (2.0 + s, 40.0) if edge == "min" else (0.1, 2.0 + s)
            vals.append(rtn_rate_average(2, 1.5, r_min, r_max))
        assert max(vals) - min(vals) < 1e-8


def test_oneoverf_rejects_bad_window():
    with pytest.raises(ValueError):
        OneOverFParams(2, r_min=1.0, r_max=1.0)


# loss -------------------------------------------------------------------------

def test_loss_zero_is_identity():
    ch = loss_kraus(LossParams(0.0), 6)
    assert len(ch.kraus) == 1
    np.testing.assert_array_equal(ch.kraus[0], np.eye(6))


def test_loss_completeness_with_cutoff():
    ch = loss_kraus(LossParams(0.01, k_max=12), 30)
    np.testing.assert_allclose(ch.completeness(), np.eye(30), atol=1e-8)
    assert loss_kraus(LossParams(0.7), 20).is_trace_preserving(1e-8)


def test_loss_coherent_mean_photon():
    d, alpha, kt = 40, 2.0, 0.3
    out = loss_kraus(LossParams(kt), d).apply(coherent_state(alpha, d))
    _, _, num = mode_operators(d)
    assert np.trace(num @ out).real == pytest.approx(alpha ** 2 * np.exp(-kt), abs=1e-6)


def test_loss_rejects_large_cutoff():
    with pytest.raises(ValueError):
        loss_kraus(LossParams(0.1, k_max=6), 6)


# channels ---------------------------------------------------------------------

def test_rtn_channel_identity_at_zero_time():
    np.testing.assert_array_equal(rtn_channel(RTNParams(0.7, 0.0), 5).superop, np.eye(25))


def test_rtn_vs_gaussian_superop_large_r():
    d = 20
    s1 = rtn_channel(RTNParams(100.0, 1.0), d).superop
    s2 = gaussian_dephasing_channel(GaussianDephasingParams(0.01), d).superop
    assert np.max(np.abs(s1 - s2)) <= 1e-2


@pytest.mark.parametrize("r", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("tau", [0.5, 2.0])
def test_rtn_choi_psd(r, tau):
    ch = rtn_channel(RTNParams(r, tau), 10)
    assert np.linalg.eigvalsh(Channel.from_superop(ch.superop, 10).choi)[0] >= -1e-8
    assert ch.is_completely_positive()


def test_oneoverf_channel_cp():
    assert oneoverf_channel(OneOverFParams(3, tau=1.0), 12).is_completely_positive()


def test_dephasing_channels_commute():
    d = 9
    rng = np.random.default_rng(7)
    rho = random_density_matrix(d, rng)
    c1 = rtn_channel(RTNParams(0.2, 1.1), d)
    c2 = gaussian_dephasing_channel(GaussianDephasingParams(0.3), d)
    np.testing.assert_allclose(c1.apply(c2.apply(rho)), c2.apply(c1.apply(rho)), atol=1e-10)
    u = rotation_operator(0.37, d)
    lhs = c1.apply(u @ rho @ u.conj().T)
    rhs = u @ c1.apply(rho) @ u.conj().T
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_families_and_noise_model():
    d = 8
    fam = RTNDephasing(0.4)
    taus = np.array([0.0, 0.5, 2.0])
    tables = fam.tables(taus, d)
    assert tables.shape == (3, d, d)
    assert tables[1, 2, 5] == pytest.approx(rtn_dephasing_factor(3, 0.4, 0.5))
    g = GaussianDephasing(0.1).factors(np.array([2.0]), np.array([3.0]))
    assert g[0, 0] == pytest.approx(np.exp(-0.5 * 4 * 0.3))
    f = OneOverFDephasing(2, 1e-2, 1e2).factors(np.array([1.0]), np.array([0.7]))
    assert f[0, 0] == pytest.approx(one_over_f_factor(1, OneOverFParams(2, 1e-2, 1e2, 0.7)))
    model = NoiseModel(fam, kappa=0.2)
    rng = np.random.default_rng(8)
    rho = random_density_matrix(d, rng)
    # loss and dephasing commute
    loss = model.loss(1.5, d)
    deph = fam.channel(1.5, d)
    np.testing.assert_allclose(model.channel(1.5, d).apply(rho), deph.then(loss).apply(rho), atol=1e-12)

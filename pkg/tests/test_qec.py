import numpy as np
import pytest

from rtnbosonic.fock import Channel
from rtnbosonic.noise import LossParams, NoiseModel, RTNDephasing, loss_kraus, rtn_dephasing_factor
from rtnbosonic.qec import (BYPRODUCTS, PAULI_X, PAULI_Z, CijTensor, KnillConfig, average_gate_fidelity,
                            break_even_fidelity, cij_tensor, crot, decode, decode_and_recover,
                            distinguishability_integral, fidelity_bound, knill_fidelity,
                            local_maxima, noise_strength, peak_spacing, phase_densities,
                            phase_povm_bin, projected_channel, semi_analytic_fidelity_dephasing,
                            variational_noise_strength)
from rtnbosonic.states import RSBCode

from oracles import brute_cij


def test_crot_examples():
    d = 4
    u = crot(1, 1, d)
    diag = np.diag(u).reshape(d, d)
    np.testing.assert_allclose(diag[0], 1)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(d * d), atol=1e-12)
    code = RSBCode.binomial(1, 1, 2)
    one = np.kron(code.one, code.one)
    np.testing.assert_allclose(crot(1, 1, 2) @ one, -one, atol=1e-12)
    with pytest.raises(ValueError):
        crot(0, 1, 3)


@pytest.mark.parametrize("n,m", [(2, 2), (2, 3), (3, 1)])
def test_crot_is_logical_cz(n, m):
    cn, cm = RSBCode.binomial(n, 2, 2 * n + 1), RSBCode.binomial(m, 2, 2 * m + 1)
    u = crot(n, m, cn.d, cm.d)
    for i, vi in enumerate((cn.zero, cn.one)):
        for j, vj in enumerate((cm.zero, cm.one)):
            v = np.kron(vi, vj)
            np.testing.assert_allclose(u @ v, (-1) ** (i * j) * v, atol=1e-9)


def test_povm_completeness_and_positivity():
    d = 12
    for n_bins in (2 * (d - 1) + 1, 256):
        total = sum(phase_povm_bin(k, n_bins, None, d) for k in range(n_bins))
        np.testing.assert_allclose(total, np.eye(d), atol=1e-10)
    for k in range(0, 256, 7):
        assert np.linalg.eigvalsh(phase_povm_bin(k, 256, None, d))[0] >= -1e-10
    np.testing.assert_allclose(phase_povm_bin(3, 64, np.eye(d), d), np.eye(d) / 64)
    with pytest.raises(ValueError):
        phase_povm_bin(64, 64, None, d)


def test_povm_rejects_bad_weights():
    bad = np.ones((3, 3))
    bad[0, 2] = bad[2, 0] = -1  # Hermitian with unit diagonal but not PSD
    with pytest.raises(ValueError):
        phase_povm_bin(0, 64, bad, 3)


def _small_cfg(n_bins=64):
    return KnillConfig(RSBCode.binomial(1, 2, 3), RSBCode.binomial(2, 1, 3), RSBCode.binomial(1, 2, 3), n_bins)


def test_cij_matches_brute_force():
    cfg = _small_cfg()
    table = RTNDephasing(0.3).tables([0.9], 3)[0]
    loss = loss_kraus(LossParams(0.2), 3)
    cases = [(None, None, [np.eye(3)], None), (loss, None, loss.kraus, None), (loss, table, loss.kraus, table)]
    for noise, deph, kraus, tab in cases:
        c = cij_tensor(cfg, noise, deph)
        for x1, x2 in ((0, 0), (5, 17), (40, 63), (31, 2)):
            ref = brute_cij(cfg.code_N, cfg.code_M, kraus, 64, x1, x2, tab)
            np.testing.assert_allclose(c.values[x1, x2], ref, atol=1e-12)


def test_dephasing_channel_equals_table():
    cfg = _small_cfg()
    ch = RTNDephasing(0.3).channel(0.9, 3)
    a = cij_tensor(cfg, ch).values
    b = cij_tensor(cfg, dephasing=ch.data).values
    c = cij_tensor(cfg, Channel.from_kraus(ch.kraus)).values
    np.testing.assert_allclose(a, b, atol=1e-14)
    np.testing.assert_allclose(a, c, atol=1e-10)


def test_factorization_under_dephasing():
    code = RSBCode.binomial(2, 2, 5)
    cfg = KnillConfig.symmetric(code, 64)
    table = RTNDephasing(0.1).tables([0.7], 5)[0]
    p = cij_tensor(cfg, dephasing=table).probabilities()
    ca = phase_densities(code, table, n_nodes=64)
    cb = phase_densities(code, n_nodes=64)
    dphi = 2 * np.pi / 64
    for i in range(4):
        a, b = divmod(i, 2)
        np.testing.assert_allclose(p[:, :, i], np.outer(ca[a], cb[b]) * dphi ** 2, atol=1e-15)


def test_decoder_tie_break_and_shape():
    vals = np.zeros((64, 64, 4, 4), dtype=complex)
    c = CijTensor(vals, 64)
    assert np.all(decode(c) == 0)
    vals[3, 4, 2, 2] = 1
    assert decode(CijTensor(vals, 64))[3, 4] == 2


@pytest.mark.parametrize("code", [RSBCode.binomial(2, 2, 5), RSBCode.cat(2, 1.5, 24)])
def test_logical_channel_cptp(code):
    cfg = KnillConfig.symmetric(code, 128)
    for model in (NoiseModel(RTNDephasing(0.1)), NoiseModel(RTNDephasing(0.1), 0.05)):
        for tau in (0.3, 1.7):
            ch = decode_and_recover(cij_tensor(cfg, model.loss(tau, code.d) if model.kappa else None,
                                               model.dephasing_table(tau, code.d)))
            assert ch.is_trace_preserving(1e-6)
            assert ch.is_completely_positive(1e-6)


def test_average_gate_fidelity_examples():
    assert average_gate_fidelity(Channel.identity(2)) == pytest.approx(1)
    assert average_gate_fidelity(Channel.dephasing(np.eye(2))) == pytest.approx(2 / 3)
    # a unitary Pauli error keeps only Tr[I E(I)] and Tr[X E(X)]
    assert average_gate_fidelity(Channel.from_kraus([PAULI_X])) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        average_gate_fidelity(Channel.identity(3))


def test_byproduct_ordering():
    np.testing.assert_allclose(BYPRODUCTS[3], PAULI_X @ PAULI_Z)


def test_semi_analytic_examples():
    code = RSBCode.binomial(2, 2, 5)
    cfg = KnillConfig.symmetric(code)
    i0 = distinguishability_integral(code)
    assert semi_analytic_fidelity_dephasing(cfg) == pytest.approx(0.5 + i0 / 6 + i0 * i0 / 24)
    dead = np.eye(5)
    assert semi_analytic_fidelity_dephasing(cfg, dead) == pytest.approx(0.5 + i0 / 12)
    with pytest.raises(ValueError):
        distinguishability_integral(code, n_nodes=256)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_binomial_k2_integral_closed_form(N):
    code = RSBCode.binomial(N, 2, 2 * N + 1)
    for tau in (0.0, 0.7, 2.0, 5.3):
        table = RTNDephasing(0.1).tables([tau], code.d)[0]
        ref = 4 * np.sqrt(2) / np.pi * abs(rtn_dephasing_factor(N, 0.1, tau))
        assert distinguishability_integral(code, table, n_nodes=4096) == pytest.approx(ref, rel=1e-6, abs=1e-8)


def test_semi_analytic_agrees_with_circuit():
    code = RSBCode.binomial(2, 2, 5)
    cfg = KnillConfig.symmetric(code, 256)
    model = NoiseModel(RTNDephasing(0.1))
    for tau in (0.2, 0.9, 2.5):
        circ = knill_fidelity(cfg, model, tau)
        semi = semi_analytic_fidelity_dephasing(cfg, model.dephasing_table(tau, 5))
        assert abs(circ - semi) < 1e-2


def test_fidelity_bound_examples():
    code = RSBCode.binomial(2, 2, 5)
    cfg = KnillConfig.symmetric(code)
    assert fidelity_bound(cfg) == pytest.approx(1)
    dead = Channel.dephasing(np.eye(5))
    # dual states of a binomial code share diagonals, so full dephasing leaves D = 0
    assert fidelity_bound(cfg, dead) == pytest.approx((2 + 2) / 6)
    for tau in (0.4, 1.3):
        ch = RTNDephasing(0.001).channel(tau, 5)
        assert fidelity_bound(cfg, ch) >= knill_fidelity(cfg, NoiseModel(RTNDephasing(0.001)), tau) - 1e-9


def test_noise_strength_identity_and_oracle():
    code = RSBCode.binomial(2, 2, 5)
    assert noise_strength(Channel.identity(5), code) == 0
    for ch in (RTNDephasing(0.1).channel(0.8, 5), loss_kraus(LossParams(0.3), 5),
               loss_kraus(LossParams(0.1), 5).then(RTNDephasing(0.5).channel(1.2, 5))):
        assert noise_strength(ch, code) == pytest.approx(variational_noise_strength(ch, code), abs=1e-4)


def test_noise_strength_regimes():
    code = RSBCode.binomial(3, 8, 25)
    taus = np.linspace(0.05, 2 * np.pi, 120)
    slow = np.array([noise_strength(NoiseModel(RTNDephasing(0.1)).channel(t, 25), code) for t in taus])
    fast = np.array([noise_strength(NoiseModel(RTNDephasing(100.0)).channel(t, 25), code) for t in taus])
    assert local_maxima(taus, slow).size >= 2
    assert np.all(np.diff(fast) >= -1e-12)


def test_projected_channel_trace_non_increasing():
    code = RSBCode.binomial(2, 2, 5)
    noise = RTNDephasing(0.2).channel(0.5, 5)
    ch = projected_channel(noise, code)
    lam = np.linalg.eigvalsh(ch.completeness())
    # dephasing leaks codeword weight out of the code space
    assert lam[-1] <= 1 + 1e-12 and lam[0] < 1
    assert lam[-1] == pytest.approx(1 - noise_strength(noise, code), abs=1e-12)


def test_break_even_examples():
    assert break_even_fidelity(Channel.identity(4)) == pytest.approx(1)
    g = 0.37
    table = np.array([[1, g], [g, 1]])
    # Pauli form: (2 + 2g + 2g + 2 + 4) / 12
    assert break_even_fidelity(Channel.dephasing(table)) == pytest.approx((2 + g) / 3)
    assert break_even_fidelity(Channel.dephasing(np.eye(2))) == pytest.approx(2 / 3)


def test_markovian_fidelity_monotone():
    code = RSBCode.binomial(2, 2, 5)
    cfg = KnillConfig.symmetric(code, 128)
    model = NoiseModel(RTNDephasing(100.0))
    f = np.array([knill_fidelity(cfg, model, t) for t in np.linspace(0, 20, 21)])
    assert np.all(np.diff(f) <= 1e-9)


def test_peak_spacing_on_cosine():
    taus = np.linspace(0, 20, 401)
    assert peak_spacing(lambda t: np.cos(3 * t), taus) == pytest.approx(2 * np.pi / 3, abs=1e-3)
    with pytest.raises(ValueError):
        peak_spacing(lambda t: t, taus)

"""Knill (teleportation-based) error correction for rotation-symmetric codes.

Two-mode bookkeeping: the data code has order ``N`` and the first auxiliary
code order ``M``.  The dual-basis products are ordered
``|i> = |s_a>_N |s_b>_M`` with ``i = 2a + b`` and ``s_0 = +``, ``s_1 = -``;
the matching logical Pauli byproducts are ``P_i = X^b Z^a``.

Logical channels are returned as 2-level ``Channel`` objects (row-major
superoperators on the output code's logical qubit).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize

from .fock import Channel, trace_norm
from .nonmarkov import trace_distance
from .noise import NoiseModel
from .states import RSBCode

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
# byproducts P_i = X^b Z^a for i = 2a + b
BYPRODUCTS = (PAULI_I, PAULI_X, PAULI_Z, PAULI_X @ PAULI_Z)

DEFAULT_BINS = 256
MIN_BINS = 64
QUADRATURE_NODES = 8192  # |c0 - c1| has kinks, so the midpoint error is O(h^2)


def crot(N: int, M: int, d: int, d2: Optional[int] = None) -> np.ndarray:
    """Diagonal ``exp(i pi m n / (N M))`` on ``|m> (x) |n>`` (``d * d2`` square)."""
    if N < 1 or M < 1:
        raise ValueError("rotation orders must be >= 1")
    d2 = d if d2 is None else d2
    return np.diag(_crot_phases(N, M, d, d2).reshape(-1))


def _crot_phases(N: int, M: int, d1: int, d2: int) -> np.ndarray:
    m = np.arange(d1)[:, None]
    n = np.arange(d2)[None, :]
    # reduce m n mod 2NM before scaling so large products stay exact
    return np.exp(1j * np.pi * ((m * n) % (2 * N * M)) / (N * M))


def _check_b(b: np.ndarray, d: int) -> np.ndarray:
    b = np.asarray(b, dtype=np.complex128)
    if b.shape != (d, d):
        raise ValueError(f"POVM weight matrix must be {d}x{d}")
    if not np.allclose(b, b.conj().T, atol=1e-12):
        raise ValueError("POVM weight matrix must be Hermitian")
    if np.linalg.eigvalsh(b)[0] < -1e-10:
        raise ValueError("POVM weight matrix must be positive semidefinite")
    if np.max(np.abs(np.diag(b) - 1)) > 1e-12 or np.max(np.abs(b)) > 1 + 1e-12:
        raise ValueError("POVM weights need B_nn = 1 and |B_mn| <= 1")
    return b


def bin_centers(n_bins: int) -> np.ndarray:
    return 2 * np.pi * (np.arange(n_bins) + 0.5) / n_bins


def phase_povm_bin(bin_index: int, n_bins: int, B: Optional[np.ndarray], d: int) -> np.ndarray:
    """``(dphi / 2 pi) sum_mn exp(i phi (m - n)) B_mn |m><n|`` at the bin midpoint."""
    if not 0 <= bin_index < n_bins:
        raise ValueError("bin index out of range")
    b = np.ones((d, d), dtype=np.complex128) if B is None else _check_b(B, d)
    phi = bin_centers(n_bins)[bin_index]
    n = np.arange(d)
    return (1.0 / n_bins) * np.exp(1j * phi * (n[:, None] - n[None, :])) * b


@dataclass(frozen=True, eq=False)
class KnillConfig:
    """Codes for the data (``code_N``) and the two auxiliary modes.

    ``b_matrix`` holds POVM weights for the data and first auxiliary modes
    (``None`` means the canonical phase measurement, all ones).
    """

    code_N: RSBCode
    code_M: RSBCode
    code_L: RSBCode
    n_phase_bins: int = DEFAULT_BINS
    b_matrix: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.n_phase_bins < MIN_BINS:
            raise ValueError(f"need at least {MIN_BINS} phase bins")
        if self.b_matrix is not None:
            _check_b(self.b_matrix[0], self.code_N.d)
            _check_b(self.b_matrix[1], self.code_M.d)

    @classmethod
    def symmetric(cls, code: RSBCode, n_phase_bins: int = DEFAULT_BINS) -> "KnillConfig":
        """All three modes carry the same code."""
        return cls(code, code, code, n_phase_bins)

    def weights(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.b_matrix is not None:
            return tuple(np.asarray(b, dtype=np.complex128) for b in self.b_matrix)
        return (np.ones((self.code_N.d,) * 2, dtype=np.complex128),
                np.ones((self.code_M.d,) * 2, dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class CijTensor:
    """``values[x1, x2, i, j]``: outcome-resolved recovery coefficients."""

    values: np.ndarray
    n_bins: int

    def probabilities(self) -> np.ndarray:
        return np.einsum("abii->abi", self.values).real


def _dual_states(code: RSBCode) -> Tuple[np.ndarray, np.ndarray]:
    return code.plus, code.minus


def _diag_sum_index(d1: int, d2: int) -> np.ndarray:
    """Flat ``(m - m', n - n')`` bin for entries ``[m', n', m, n]`` of a two-mode matrix."""
    mp = np.arange(d1)[:, None, None, None]
    np_ = np.arange(d2)[None, :, None, None]
    m = np.arange(d1)[None, None, :, None]
    n = np.arange(d2)[None, None, None, :]
    return ((m - mp + d1 - 1) * (2 * d2 - 1) + (n - np_ + d2 - 1)).reshape(-1)


def cij_tensor(cfg: KnillConfig, noise: Optional[Channel] = None,
               dephasing: Optional[np.ndarray] = None) -> CijTensor:
    """``c_ij = Tr[(M_x1 (x) M_x2) U_c N U_c^dag (|i><j|)]`` on all bin pairs.

    ``noise`` acts on the data mode before the CROT gate; a dephasing-kind
    channel (or the extra element-wise table ``dephasing``) commutes with the
    CROT gate and with loss, so it is moved onto the data-mode POVM weights
    instead of being expanded into Kraus operators.
    """
    d1, d2 = cfg.code_N.d, cfg.code_M.d
    b1, b2 = cfg.weights()
    kraus: Sequence[np.ndarray] = (np.eye(d1),)
    if noise is not None:
        if noise.d_in != d1 or noise.d_out != d1:
            raise ValueError("noise channel does not act on the data mode dimension")
        if noise.kind == "dephasing":
            b1 = b1 * np.conj(noise.data)
        else:
            kraus = noise.kraus
    if dephasing is not None:
        b1 = b1 * np.conj(dephasing)
    phases = _crot_phases(cfg.code_N.N, cfg.code_M.N, d1, d2)
    duals_n, duals_m = _dual_states(cfg.code_N), _dual_states(cfg.code_M)
    chis = []
    for i in range(4):
        a, b = divmod(i, 2)
        state = np.outer(duals_n[a], duals_m[b]) * np.conj(phases)
        chis.append(np.stack([phases * (k @ state) for k in kraus]))
    # weights B1[m, m'] B2[n, n'] laid out on [m', n', m, n]
    weight = b1.T[:, None, :, None] * b2.T[None, :, None, :]
    index = _diag_sum_index(d1, d2)
    size = (2 * d1 - 1) * (2 * d2 - 1)
    phi = bin_centers(cfg.n_phase_bins)
    e1 = np.exp(1j * np.outer(phi, np.arange(-(d1 - 1), d1)))
    e2 = np.exp(1j * np.outer(phi, np.arange(-(d2 - 1), d2)))
    values = np.empty((cfg.n_phase_bins, cfg.n_phase_bins, 4, 4), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            q = np.einsum("kab,kcd->abcd", chis[i], chis[j].conj()) * weight
            flat = q.reshape(-1)
            s = (np.bincount(index, flat.real, size) + 1j * np.bincount(index, flat.imag, size))
            s = s.reshape(2 * d1 - 1, 2 * d2 - 1)
            values[:, :, i, j] = e1 @ s @ e2.T
    values /= cfg.n_phase_bins ** 2
    return CijTensor(values, cfg.n_phase_bins)


def decode(c: CijTensor) -> np.ndarray:
    """Most likely byproduct index per bin pair (ties go to the lowest index)."""
    return np.argmax(c.probabilities(), axis=-1)


def decode_and_recover(c: CijTensor) -> Channel:
    """Logical channel ``rho -> 1/4 sum_x P*^dag [sum_ij c_ij P_i rho P_j^dag] P*``."""
    best = decode(c)
    superop = np.zeros((4, 4), dtype=np.complex128)
    for p in range(4):
        coeff = c.values[best == p].sum(axis=0)
        if not coeff.any():
            continue
        left = [BYPRODUCTS[p].conj().T @ q for q in BYPRODUCTS]
        for i in range(4):
            for j in range(4):
                superop += coeff[i, j] * np.kron(left[i], left[j].conj())
    return Channel.from_superop(0.25 * superop, 2)


def average_gate_fidelity(ch: Channel) -> float:
    """Qubit average gate fidelity ``(sum_P Tr[P E(P)] + 4) / 12`` over I, X, Y, Z."""
    if ch.d_in != 2 or ch.d_out != 2:
        raise ValueError("average gate fidelity is implemented for qubit channels")
    total = sum(np.trace(p.conj().T @ ch.apply(p)).real for p in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z))
    return float((total + 4) / 12)


def knill_channel(cfg: KnillConfig, model: Optional[NoiseModel] = None, tau: float = 0.0) -> Channel:
    """Logical channel of one Knill round with ``model`` acting for time ``tau`` on the data mode."""
    if model is None:
        return decode_and_recover(cij_tensor(cfg))
    d = cfg.code_N.d
    loss = model.loss(tau, d) if model.kappa else None
    return decode_and_recover(cij_tensor(cfg, loss, model.dephasing_table(tau, d)))


def knill_fidelity(cfg: KnillConfig, model: Optional[NoiseModel] = None, tau: float = 0.0) -> float:
    return average_gate_fidelity(knill_channel(cfg, model, tau))


def phase_densities(code: RSBCode, table: Optional[np.ndarray] = None, B: Optional[np.ndarray] = None,
                    n_nodes: int = QUADRATURE_NODES) -> Tuple[np.ndarray, np.ndarray]:
    """Outcome densities ``c_0(phi), c_1(phi)`` of the dual states at midpoint nodes."""
    d = code.d
    weights = np.ones((d, d)) if B is None else _check_b(B, d)
    if table is not None:
        weights = weights * np.conj(table)
    phi = bin_centers(n_nodes)
    n = np.arange(d)
    kern = np.exp(1j * np.outer(phi, n))  # <phi|n> up to normalization
    out = []
    for v in _dual_states(code):
        rho = np.outer(v, v.conj())
        # Tr[M(phi) rho] = (1/2pi) sum_mn e^{i phi (m - n)} B_mn rho_nm
        mat = weights * rho.T
        out.append(np.einsum("pm,mn,pn->p", kern, mat, kern.conj()).real / (2 * np.pi))
    return out[0], out[1]


def distinguishability_integral(code: RSBCode, table: Optional[np.ndarray] = None,
                                B: Optional[np.ndarray] = None, n_nodes: int = QUADRATURE_NODES) -> float:
    """``int_0^{2 pi} |c_0(phi) - c_1(phi)| dphi`` by the midpoint rule."""
    if n_nodes < 512:
        raise ValueError("use at least 512 quadrature nodes")
    c0, c1 = phase_densities(code, table, B, n_nodes)
    return float(np.abs(c0 - c1).sum() * 2 * np.pi / n_nodes)


def semi_analytic_fidelity_dephasing(cfg: KnillConfig, table: Optional[np.ndarray] = None,
                                     n_nodes: int = QUADRATURE_NODES) -> float:
    """``1/2 + (I_N + I_M)/12 + I_N I_M / 24`` for pure dephasing on the data mode.

    ``I_N`` uses the dephased data code and ``I_M`` the noiseless auxiliary.
    ``table`` is the element-wise dephasing factor table (``None``: noiseless).
    """
    b1, b2 = (None, None) if cfg.b_matrix is None else cfg.b_matrix
    i_n = distinguishability_integral(cfg.code_N, table, b1, n_nodes)
    i_m = distinguishability_integral(cfg.code_M, None, b2, n_nodes)
    return 0.5 + (i_n + i_m) / 12 + i_n * i_m / 24


def fidelity_bound(cfg: KnillConfig, noise: Optional[Channel] = None) -> float:
    """``(2 + [1 + D_N][1 + D_M]) / 6`` from dual-state trace distances.

    ``D_N`` uses the data code's dual states after ``noise``; the auxiliary
    mode is noiseless.
    """
    def dist(code, ch):
        rp, rm = (np.outer(v, v.conj()) for v in _dual_states(code))
        if ch is not None:
            rp, rm = ch.apply(rp), ch.apply(rm)
        return trace_distance(rp, rm)

    return (2 + (1 + dist(cfg.code_N, noise)) * (1 + dist(cfg.code_M, None))) / 6


def _adjoint_apply(ch: Channel, x: np.ndarray) -> np.ndarray:
    if ch.kind == "dephasing":
        return np.conj(ch.data) * x
    if ch.kind == "kraus":
        return sum(k.conj().T @ x @ k for k in ch.data)
    return (ch.superop.conj().T @ x.reshape(-1)).reshape(ch.d_in, ch.d_in)


def _code_isometry(code: RSBCode, d: int) -> np.ndarray:
    if code.d > d:
        if np.linalg.norm(code.encoder[d:]) > 1e-12:
            raise ValueError("code does not fit in the channel dimension")
        return code.encoder[:d]
    return code.resized(d).encoder


def projected_channel(noise: Channel, code: RSBCode) -> Channel:
    """``rho_L -> V^dag E(V rho_L V^dag) V`` with ``V`` the code isometry."""
    v = _code_isometry(code, noise.d_in)
    cols = []
    for a in range(2):
        for b in range(2):
            e = np.zeros((2, 2), dtype=np.complex128)
            e[a, b] = 1
            cols.append((v.conj().T @ noise.apply(v @ e @ v.conj().T) @ v).reshape(-1))
    return Channel.from_superop(np.column_stack(cols), 2)


def noise_strength(noise: Channel, code: RSBCode) -> float:
    """``1 - ||E'||_diamond`` for the code-projected channel ``E'``.

    For a CP map the diamond norm is the largest eigenvalue of
    ``sum K'^dag K' = V^dag E^dag(V V^dag) V``.
    """
    v = _code_isometry(code, noise.d_in)
    dual = v.conj().T @ _adjoint_apply(noise, v @ v.conj().T) @ v
    lam = np.linalg.eigvalsh(0.5 * (dual + dual.conj().T))[-1]
    value = 1.0 - lam
    # round-off in V^dag V alone is ~1e-16
    return float(0.0 if abs(value) < 1e-13 else min(max(value, 0.0), 1.0))


def variational_noise_strength(noise: Channel, code: RSBCode, starts: int = 32,
                               seed: int = 0) -> float:
    """Direct maximization of ``||(E' (x) I)(|psi><psi|)||_1`` with Nelder-Mead."""
    s = projected_channel(noise, code).superop.reshape(2, 2, 2, 2)
    rng = np.random.default_rng(seed)

    def negnorm(x):
        psi = (x[:4] + 1j * x[4:]).reshape(2, 2)
        psi = psi / np.linalg.norm(psi)
        rho = np.einsum("sa,tb->satb", psi, psi.conj())
        out = np.einsum("uvst,satb->uavb", s, rho).reshape(4, 4)
        return -trace_norm(out)

    best = 0.0
    for _ in range(starts):
        res = minimize(negnorm, rng.normal(size=8), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 8000, "maxfev": 8000})
        best = max(best, -res.fun)
    return 1.0 - best


def break_even_fidelity(noise: Channel) -> float:
    """Average gate fidelity of the unencoded Fock qubit ``{|0>, |1>}`` under ``noise``."""
    return average_gate_fidelity(projected_channel(noise, RSBCode.fock_qubit(max(noise.d_in, 2))))


def local_maxima(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Positions of interior local maxima, refined by a parabola through three samples."""
    y = np.asarray(y)
    idx = np.nonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1
    h = x[1] - x[0]
    den = y[idx - 1] - 2 * y[idx] + y[idx + 1]
    shift = np.where(den != 0, 0.5 * (y[idx - 1] - y[idx + 1]) / np.where(den != 0, den, 1), 0.0)
    return x[idx] + shift * h


def peak_spacing(fn: Callable[[float], float], taus: np.ndarray) -> float:
    """Mean spacing between successive local maxima of ``fn`` sampled on ``taus``."""
    vals = np.array([fn(t) for t in taus])
    peaks = local_maxima(np.asarray(taus), vals)
    if peaks.size < 2:
        raise ValueError("fewer than two maxima in the sampled window")
    return float(np.mean(np.diff(peaks)))

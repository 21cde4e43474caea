"""Gaussian states and rotation-symmetric bosonic (RSB) codewords."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import DegeneratePrimitive
from .fock import check_truncation, embed, mode_operators, projector, rotation_operator

# extra Fock levels used when exponentiating generators, cropped afterwards
EXPM_PAD = 24


@dataclass(frozen=True)
class GaussianParams:
    """``rho = D(alpha) S(beta) nu_th(nbar) S^dag(beta) D^dag(alpha)``.

    ``alpha = alpha0 exp(i theta)`` and ``beta = beta0 exp(i gamma)``.
    """

    alpha0: float = 0.0
    theta: float = 0.0
    beta0: float = 0.0
    gamma: float = 0.0
    nbar: float = 0.0

    def __post_init__(self):
        vals = (self.alpha0, self.theta, self.beta0, self.gamma, self.nbar)
        if not all(np.isfinite(vals)):
            raise ValueError("Gaussian parameters must be finite")
        if self.alpha0 < 0 or self.beta0 < 0 or self.nbar < 0:
            raise ValueError("alpha0, beta0 and nbar must be non-negative")

    @property
    def alpha(self) -> complex:
        return self.alpha0 * np.exp(1j * self.theta)

    @property
    def beta(self) -> complex:
        return self.beta0 * np.exp(1j * self.gamma)


def thermal_populations(nbar: float, d: int) -> np.ndarray:
    """``p_n = nbar^n / (nbar + 1)^(n + 1)`` for ``n < d`` (not renormalized)."""
    n = np.arange(d)
    if nbar == 0:
        return (n == 0).astype(float)
    return np.exp(n * np.log(nbar) - (n + 1) * np.log1p(nbar))


def displacement(alpha: complex, d: int) -> np.ndarray:
    a, adag, _ = mode_operators(d)
    return expm(alpha * adag - np.conj(alpha) * a)


def squeezing(beta: complex, d: int) -> np.ndarray:
    a, adag, _ = mode_operators(d)
    return expm(0.5 * (beta * adag @ adag - np.conj(beta) * a @ a))


def gaussian_state(p: GaussianParams, d: int, pad: int = EXPM_PAD) -> np.ndarray:
    """Gaussian density matrix in ``d`` Fock levels.

    The displacement and squeeze unitaries are matrix exponentials of their
    generators built in ``d + pad`` levels; the result is cropped to ``d`` and
    renormalized.  ``TruncationWarning`` is raised when the population above
    level ``d - 3`` is at least 1e-6.
    """
    big = d + pad
    nu = np.diag(thermal_populations(p.nbar, big)).astype(np.complex128)
    u = displacement(p.alpha, big) @ squeezing(p.beta, big)
    rho = (u @ nu @ u.conj().T)[:d, :d]
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    check_truncation(rho)
    return rho


def coherent_vector(alpha: complex, d: int) -> np.ndarray:
    """Fock amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)`` of ``|alpha>`` (cropped)."""
    n = np.arange(d)
    if alpha == 0:
        return embed(np.array([1.0]), d)
    amp = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1))
    return amp * np.exp(1j * np.angle(alpha) * n)


def coherent_state(alpha: complex, d: int) -> np.ndarray:
    vec = coherent_vector(alpha, d)
    check_truncation(vec)
    vec = vec / np.linalg.norm(vec)
    return projector(vec)


def fock_state(n: int, d: int) -> np.ndarray:
    rho = np.zeros((d, d), dtype=np.complex128)
    rho[n, n] = 1.0
    return rho


def binomial_codewords(N: int, K: int, d: int) -> Tuple[np.ndarray, np.ndarray]:
    """Binomial codewords of rotation order ``N``.

    ``|0> = sum_k sqrt(C(K, 2k) / 2^(K-1)) |2kN>`` and
    ``|1> = sum_k sqrt(C(K, 2k+1) / 2^(K-1)) |(2k+1)N>``.
    """
    if N < 1 or K < 1:
        raise ValueError("binomial code needs N >= 1 and K >= 1")
    if K * N > d - 1:
        raise ValueError(f"binomial code N={N}, K={K} reaches Fock level {K * N}, beyond d={d}")
    zero = np.zeros(d, dtype=np.complex128)
    one = np.zeros(d, dtype=np.complex128)
    for k in range(K + 1):
        amp = np.sqrt(comb(K, k) / 2 ** (K - 1))
        (zero if k % 2 == 0 else one)[k * N] = amp
    return zero, one


def primitive_to_codewords(c_n: Sequence[complex], N: int, d: int) -> Tuple[np.ndarray, np.ndarray]:
    """Codewords from rotated superpositions of a primitive state.

    ``|0> ~ sum_m R(m pi / N)|prim>`` and ``|1> ~ sum_m (-1)^m R(m pi / N)|prim>``
    for ``m = 0 .. 2N-1``; both are normalized numerically.
    """
    if N < 1:
        raise ValueError("rotation order must be >= 1")
    prim = embed(np.asarray(c_n, dtype=np.complex128), d)
    scale = np.linalg.norm(prim)
    if scale == 0:
        raise DegeneratePrimitive("primitive state is zero")
    zero = np.zeros(d, dtype=np.complex128)
    one = np.zeros(d, dtype=np.complex128)
    for m in range(2 * N):
        rotated = np.diag(rotation_operator(m * np.pi / N, d)) * prim
        zero += rotated
        one += (-1) ** m * rotated
    words = []
    for vec, label in ((zero, "zero"), (one, "one")):
        norm = np.linalg.norm(vec)
        if norm <= 1e-10 * 2 * N * scale:
            raise DegeneratePrimitive(f"primitive has no support on the {label} codeword sector")
        words.append(vec / norm)
    return words[0], words[1]


def cat_codewords(N: int, alpha: complex, d: int) -> Tuple[np.ndarray, np.ndarray]:
    """Cat codewords ``sum_m (+-1)^m |alpha exp(i m pi / N)>``, normalized."""
    prim = coherent_vector(alpha, d)
    check_truncation(prim)
    return primitive_to_codewords(prim, N, d)


@dataclass(frozen=True, eq=False)
class RSBCode:
    """A pair of rotation-symmetric codewords of order ``N`` in ``d`` levels."""

    kind: str
    N: int
    d: int
    zero: np.ndarray = field(repr=False)
    one: np.ndarray = field(repr=False)
    K: Optional[int] = None
    alpha: Optional[complex] = None

    @classmethod
    def binomial(cls, N: int, K: int, d: int) -> "RSBCode":
        zero, one = binomial_codewords(N, K, d)
        return cls("binomial", N, d, zero, one, K=K)

    @classmethod
    def cat(cls, N: int, alpha: complex, d: int) -> "RSBCode":
        zero, one = cat_codewords(N, alpha, d)
        return cls("cat", N, d, zero, one, alpha=alpha)

    @classmethod
    def from_primitive(cls, c_n: Sequence[complex], N: int, d: int) -> "RSBCode":
        zero, one = primitive_to_codewords(c_n, N, d)
        return cls("generic", N, d, zero, one)

    @classmethod
    def fock_qubit(cls, d: int) -> "RSBCode":
        """The unencoded ``{|0>, |1>}`` qubit (binomial ``N = K = 1``)."""
        return cls.binomial(1, 1, d)

    @property
    def plus(self) -> np.ndarray:
        return (self.zero + self.one) / np.sqrt(2)

    @property
    def minus(self) -> np.ndarray:
        return (self.zero - self.one) / np.sqrt(2)

    @property
    def encoder(self) -> np.ndarray:
        """``d x 2`` isometry ``|0>_L<0| + |1>_L<1|``."""
        return np.column_stack([self.zero, self.one])

    @property
    def n_code(self) -> float:
        """Mean photon number averaged over the two codewords."""
        n = np.arange(self.d)
        return float(0.5 * (n @ np.abs(self.zero) ** 2 + n @ np.abs(self.one) ** 2))

    def resized(self, d: int) -> "RSBCode":
        return RSBCode(self.kind, self.N, d, embed(self.zero, d), embed(self.one, d), self.K, self.alpha)

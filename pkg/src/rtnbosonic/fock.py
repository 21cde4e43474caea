"""Truncated Fock-space linear algebra and quantum channel representations.

States are dense ``d x d`` complex arrays in the Fock basis ``|0>, ..., |d-1>``.
Superoperators act on row-major vectorized matrices, ``vec(rho) = rho.reshape(-1)``,
so that a Kraus operator ``K`` contributes ``K (x) conj(K)``.  The Choi matrix is
``J = sum_ij |i><j| (x) E(|i><j|)`` with the input index first.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import NotCompletelyPositive, TruncationWarning

KRAUS_CUTOFF = 1e-12
CP_TOL = 1e-8
TAIL_THRESHOLD = 1e-6


def mode_operators(d: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Annihilation, creation and number operators truncated to ``d`` levels.

    The commutator ``[a, a^dag]`` equals the identity except for its last
    diagonal entry, which is ``1 - d`` because of the truncation.
    """
    if int(d) != d or d < 2:
        raise ValueError(f"Fock dimension must be an integer >= 2, got {d}")
    d = int(d)
    a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(np.complex128)
    number = np.diag(np.arange(d, dtype=float)).astype(np.complex128)
    return a, a.conj().T.copy(), number


def rotation_operator(theta: float, d: int) -> np.ndarray:
    """Phase-space rotation ``exp(i theta n)``."""
    if not np.isfinite(theta):
        raise ValueError("rotation angle must be finite")
    return np.diag(np.exp(1j * theta * np.arange(d)))


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol * scale)


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values of a square matrix.

    Hermitian input goes through the symmetric eigensolver (LAPACK ``heevd``,
    Householder tridiagonalization) and returns the sum of absolute eigenvalues.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"trace norm needs a square matrix, got shape {m.shape}")
    if is_hermitian(m):
        h = 0.5 * (m + m.conj().T)
        return float(np.sum(np.abs(np.linalg.eigvalsh(h))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def validate_density_matrix(rho: np.ndarray, herm_tol: float = 1e-10,
                            trace_tol: float = 1e-9, eig_tol: float = 1e-9) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace is {tr}, expected 1")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if lam[0] < -eig_tol:
        raise ValueError(f"density matrix has eigenvalue {lam[0]}")


def tail_population(state: np.ndarray, levels: int = 2) -> float:
    """Population on the top ``levels`` Fock levels of a vector or density matrix."""
    state = np.asarray(state)
    if state.ndim == 1:
        return float(np.sum(np.abs(state[-levels:]) ** 2))
    return float(np.sum(np.diag(state)[-levels:].real))


def check_truncation(state: np.ndarray, threshold: float = TAIL_THRESHOLD) -> float:
    """Warn with ``TruncationWarning`` when population above level ``d-3`` is too large."""
    tail = tail_population(state)
    if tail >= threshold:
        d = state.shape[0]
        warnings.warn(f"population {tail:.3e} above Fock level {d - 3} exceeds {threshold:g}; "
                      f"increase d", TruncationWarning, stacklevel=2)
    return tail


def superop_to_choi(s: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    return s.reshape(d_out, d_out, d_in, d_in).transpose(2, 0, 3, 1).reshape(d_in * d_out, d_in * d_out)


def choi_to_superop(j: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    return j.reshape(d_in, d_out, d_in, d_out).transpose(1, 3, 0, 2).reshape(d_out * d_out, d_in * d_in)


def kraus_to_superop(kraus: Sequence[np.ndarray]) -> np.ndarray:
    return sum(np.kron(k, k.conj()) for k in kraus)


@dataclass(frozen=True, eq=False)
class Channel:
    """Linear map from ``d_in x d_in`` to ``d_out x d_out`` matrices.

    Exactly one representation is stored; the others are derived lazily.
    ``kind`` is one of ``"kraus"``, ``"superop"``, ``"choi"`` or ``"dephasing"``.
    A dephasing channel stores a ``d x d`` factor table ``T`` and acts as
    ``rho -> T * rho`` (element-wise), i.e. a diagonal superoperator.
    """

    d_in: int
    d_out: int
    kind: str
    data: object

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray]) -> "Channel":
        ops = tuple(np.asarray(k, dtype=np.complex128) for k in kraus)
        if not ops:
            raise ValueError("empty Kraus set")
        d_out, d_in = ops[0].shape
        if any(k.shape != (d_out, d_in) for k in ops):
            raise ValueError("Kraus operators must share one shape")
        return cls(d_in, d_out, "kraus", ops)

    @classmethod
    def from_superop(cls, s: np.ndarray, d_in: int, d_out: Optional[int] = None) -> "Channel":
        d_out = d_in if d_out is None else d_out
        s = np.asarray(s, dtype=np.complex128)
        if s.shape != (d_out * d_out, d_in * d_in):
            raise ValueError("superoperator shape does not match dimensions")
        return cls(d_in, d_out, "superop", s)

    @classmethod
    def from_choi(cls, j: np.ndarray, d_in: int, d_out: Optional[int] = None) -> "Channel":
        d_out = d_in if d_out is None else d_out
        j = np.asarray(j, dtype=np.complex128)
        if j.shape != (d_in * d_out, d_in * d_out):
            raise ValueError("Choi matrix shape does not match dimensions")
        return cls(d_in, d_out, "choi", j)

    @classmethod
    def dephasing(cls, table: np.ndarray) -> "Channel":
        table = np.asarray(table)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise ValueError("dephasing table must be square")
        return cls(table.shape[0], table.shape[0], "dephasing", table)

    @classmethod
    def identity(cls, d: int) -> "Channel":
        return cls.dephasing(np.ones((d, d)))

    @cached_property
    def superop(self) -> np.ndarray:
        if self.kind == "superop":
            return self.data
        if self.kind == "kraus":
            return kraus_to_superop(self.data)
        if self.kind == "choi":
            return choi_to_superop(self.data, self.d_in, self.d_out)
        return np.diag(np.asarray(self.data, dtype=np.complex128).reshape(-1))

    @cached_property
    def choi(self) -> np.ndarray:
        if self.kind == "choi":
            return self.data
        return superop_to_choi(self.superop, self.d_in, self.d_out)

    @cached_property
    def kraus(self) -> Tuple[np.ndarray, ...]:
        if self.kind == "kraus":
            return self.data
        if self.kind == "dephasing":
            # the Choi matrix lives on span{|n>|n>}, where it equals the table
            lam, vec = _psd_eigh(np.asarray(self.data, dtype=np.complex128))
            return tuple(np.sqrt(l) * np.diag(v) for l, v in zip(lam, vec.T))
        lam, vec = _psd_eigh(self.choi)
        return tuple(np.sqrt(l) * v.reshape(self.d_in, self.d_out).T for l, v in zip(lam, vec.T))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho)
        if rho.shape != (self.d_in, self.d_in):
            raise ValueError(f"state of shape {rho.shape} does not match channel input {self.d_in}")
        if self.kind == "dephasing":
            return self.data * rho
        if self.kind == "kraus":
            return sum(k @ rho @ k.conj().T for k in self.data)
        return (self.superop @ rho.reshape(-1)).reshape(self.d_out, self.d_out)

    def then(self, other: "Channel") -> "Channel":
        """Channel that applies ``self`` first and ``other`` second."""
        if other.d_in != self.d_out:
            raise ValueError("channel dimensions do not chain")
        if self.kind == "dephasing" and other.kind == "dephasing":
            return Channel.dephasing(self.data * other.data)
        if self.kind != "superop" and other.kind != "superop":
            return Channel.from_kraus([b @ a for b in other.kraus for a in self.kraus])
        return Channel.from_superop(other.superop @ self.superop, self.d_in, other.d_out)

    def completeness(self) -> np.ndarray:
        """``sum K^dag K``; the identity for trace-preserving channels."""
        if self.kind == "dephasing":
            return np.diag(np.diag(self.data)).astype(np.complex128)
        if self.kind == "kraus":
            return sum(k.conj().T @ k for k in self.data)
        j = self.choi.reshape(self.d_in, self.d_out, self.d_in, self.d_out)
        return np.einsum("iaja->ji", j)

    def is_trace_preserving(self, tol: float = 1e-8) -> bool:
        return bool(np.max(np.abs(self.completeness() - np.eye(self.d_in))) <= tol)

    def is_completely_positive(self, tol: float = CP_TOL) -> bool:
        if self.kind == "kraus":
            return True
        m = self.data if self.kind == "dephasing" else self.choi
        return bool(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] >= -tol)


def _psd_eigh(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    lam, vec = np.linalg.eigh(0.5 * (m + m.conj().T))
    if lam[0] < -CP_TOL:
        raise NotCompletelyPositive(f"Choi eigenvalue {lam[0]:.3e} below -{CP_TOL:g}")
    keep = lam > KRAUS_CUTOFF
    return lam[keep], vec[:, keep]


def kraus_from_superop(s: Channel) -> Channel:
    """Kraus form from the eigendecomposition of the Choi matrix."""
    return Channel.from_kraus(s.kraus)


def apply_channel(c: Channel, rho: np.ndarray) -> np.ndarray:
    return c.apply(rho)


def ket(n: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=np.complex128)
    v[n] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.complex128)
    return np.outer(vec, vec.conj())


def random_density_matrix(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Random mixed state from a Ginibre matrix (used by tests and validation)."""
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def embed(vec: np.ndarray, d: int) -> np.ndarray:
    """Zero-pad (or check-and-crop) a Fock vector to length ``d``."""
    vec = np.asarray(vec, dtype=np.complex128)
    if vec.size > d:
        if np.any(np.abs(vec[d:]) > 0):
            raise ValueError("vector has support above the target dimension")
        return vec[:d].copy()
    out = np.zeros(d, dtype=np.complex128)
    out[: vec.size] = vec
    return out


__all__: List[str] = [
    "Channel", "mode_operators", "rotation_operator", "trace_norm", "kraus_from_superop",
    "apply_channel", "validate_density_matrix", "check_truncation", "tail_population",
    "superop_to_choi", "choi_to_superop", "kraus_to_superop", "ket", "projector",
    "random_density_matrix", "embed", "is_hermitian",
]

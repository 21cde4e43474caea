"""Wigner functions on phase-space grids and negativity measures.

Quadratures are ``q = (a + a^dag)/sqrt(2)`` and ``p = (a - a^dag)/(i sqrt(2))``,
so the vacuum is ``exp(-q^2 - p^2)/pi`` and a coherent state ``|alpha>`` peaks
at ``(sqrt(2) Re alpha, sqrt(2) Im alpha)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.integrate import trapezoid

from .errors import GridTooSmall

GridSpec = Tuple[float, float, int]
DEFAULT_RANGE: GridSpec = (-6.0, 6.0, 241)
BOUNDARY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """``values[i, j] = W(q[i], p[j])``."""

    q_range: GridSpec
    p_range: GridSpec
    values: np.ndarray

    @property
    def q(self) -> np.ndarray:
        return np.linspace(*self.q_range)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(*self.p_range)

    def integral(self, absolute: bool = False) -> float:
        w = np.abs(self.values) if absolute else self.values
        return float(trapezoid(trapezoid(w, self.p, axis=1), self.q))


def wigner_points(rho: np.ndarray, q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """``W`` at arbitrary (broadcastable) points via the Laguerre-kernel recursion.

    The kernels ``W_mn`` of ``|m><n|`` are built column by column from
    ``W_00 = exp(-|z|^2)/pi`` with ``z = q + i p``; only ``n >= m`` is stored.
    """
    rho = np.asarray(rho)
    q, p = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
    d = rho.shape[0]
    a = np.sqrt(2.0) * (q + 1j * p)  # 2A with A = (q + i p)/sqrt(2)
    row = [np.exp(-(q * q + p * p)) / np.pi + 0j]
    w = np.real(rho[0, 0]) * row[0].real
    for n in range(1, d):
        row.append(a * row[n - 1] / np.sqrt(n))
        w = w + 2 * np.real(rho[0, n] * row[n])
    for m in range(1, d):
        prev = row[m]
        row[m] = (np.conj(a) * prev - np.sqrt(m) * row[m - 1]) / np.sqrt(m)
        w = w + np.real(rho[m, m] * row[m])
        for n in range(m + 1, d):
            nxt = (a * row[n - 1] - np.sqrt(m) * prev) / np.sqrt(n)
            prev = row[n]
            row[n] = nxt
            w = w + 2 * np.real(rho[m, n] * row[n])
    return w


def wigner(rho: np.ndarray, q_range: GridSpec = DEFAULT_RANGE, p_range: GridSpec = DEFAULT_RANGE,
           check_boundary: bool = True) -> WignerGrid:
    """Wigner function on a rectangular grid.

    Raises ``GridTooSmall`` when ``|W|`` reaches 1e-6 anywhere on the grid edge.
    """
    q = np.linspace(*q_range)
    p = np.linspace(*p_range)
    values = wigner_points(rho, q[:, None], p[None, :])
    if check_boundary:
        edge = max(np.abs(values[[0, -1], :]).max(), np.abs(values[:, [0, -1]]).max())
        if edge >= BOUNDARY_TOL:
            raise GridTooSmall(f"|W| = {edge:.2e} on the grid boundary; enlarge the grid")
    return WignerGrid(tuple(q_range), tuple(p_range), values)


def negativity_volume(w: WignerGrid) -> float:
    """``(int |W| - 1)/2`` by 2-D trapezoid quadrature, clipped at zero."""
    return max(0.0, 0.5 * (w.integral(absolute=True) - 1.0))


def ring_negativity(rho: np.ndarray, R: float, n_theta: int = 2048) -> float:
    """``(int_0^{2 pi} |W(R cos t, R sin t)| dt - 1)/2``.

    Taken literally, so positive Wigner functions can give negative values.
    """
    if R < 0:
        raise ValueError("ring radius must be non-negative")
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    w = wigner_points(rho, R * np.cos(theta), R * np.sin(theta))
    return float(0.5 * (2 * np.pi * np.abs(w).mean() - 1.0))

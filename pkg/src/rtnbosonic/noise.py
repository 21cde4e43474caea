"""Dephasing and loss channels on a truncated Fock space.

Time is dimensionless, ``tau = nu t``, and a telegraph fluctuator is described by
the ratio ``r = xi / nu`` of its switching rate to its coupling.  Every dephasing
model here multiplies the Fock coherence ``|m><n|`` by a real factor that
depends only on ``a = m - n``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
from scipy.special import gammaln

from .errors import DomainError
from .fock import Channel, mode_operators

ArrayLike = Union[float, np.ndarray]

EULER_GAMMA = 0.57721566490153286061
# |z| below which the power series is used; Lentz continued fraction elsewhere
E1_SERIES_RADIUS = 2.0
_E1_MAXITER = 5000


def _e1_series(z: np.ndarray) -> np.ndarray:
    total = np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(1, 200):
        term = term * (-z) / k
        piece = term / k
        total += piece
        if np.all(np.abs(piece) <= 1e-17 * np.abs(total)):
            break
    return -EULER_GAMMA - np.log(z) - total


def _e1_continued_fraction(z: np.ndarray) -> np.ndarray:
    # E1(z) = exp(-z) / (z + 1 - 1/(z + 3 - 4/(z + 5 - ...))), modified Lentz;
    # converged entries are dropped from the working set each iteration
    tiny = 1e-300
    h = 1.0 / (z + 1.0)
    idx = np.arange(z.size)
    b = z + 1.0
    c = np.full_like(z, 1.0 / tiny)
    d = h.copy()
    for i in range(1, _E1_MAXITER):
        an = -float(i * i)
        b = b + 2.0
        d = an * d + b
        d[np.abs(d) < tiny] = tiny
        d = 1.0 / d
        c = b + an / c
        c[np.abs(c) < tiny] = tiny
        delta = c * d
        h[idx] *= delta
        keep = np.abs(delta - 1.0) > 1e-16
        if not keep.all():
            idx, b, c, d = idx[keep], b[keep], c[keep], d[keep]
            if idx.size == 0:
                break
    return h * np.exp(-z)


def exp_integral_e1(z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
    """Principal-branch exponential integral ``E1(z) = int_z^inf exp(-t)/t dt``.

    Power series for ``|z| <= 2`` and a continued fraction (modified Lentz)
    beyond; relative accuracy is about 1e-13 while ``|E1|`` is a normal double
    (``Re z`` below about 700).  Past that the result underflows gracefully
    toward zero.  On the negative real axis the value is the limit from above
    (``Im -> 0+``).
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if np.any(z == 0):
        raise DomainError("E1 is singular at z = 0")
    out = np.empty_like(z)
    series = np.abs(z) <= E1_SERIES_RADIUS
    # the continued fraction converges slowly next to the negative real axis
    series |= (z.real < 0) & (np.abs(z.imag) < 0.5 * np.abs(z.real)) & (np.abs(z) <= 40)
    if series.any():
        out[series] = _e1_series(z[series])
    if (~series).any():
        out[~series] = _e1_continued_fraction(z[~series])
    return complex(out[0]) if scalar else out


def rtn_dephasing_factor(a: ArrayLike, r: ArrayLike, tau: ArrayLike) -> ArrayLike:
    """Telegraph dephasing function ``G = exp(-r tau)(cosh W tau + (r/W) sinh W tau)``.

    ``W = sqrt(r^2 - a^2)``.  For ``r < |a|`` the trigonometric form is used and
    at ``r = |a|`` the limit ``exp(-r tau)(1 + r tau)``.  The overdamped branch is
    evaluated without forming ``cosh``/``sinh`` so that large ``r tau`` does not
    overflow.
    """
    scalar = all(np.ndim(x) == 0 for x in (a, r, tau))
    a, r, tau = np.broadcast_arrays(np.abs(np.asarray(a, dtype=float)),
                                    np.asarray(r, dtype=float), np.asarray(tau, dtype=float))
    if np.any(r <= 0) or np.any(tau < 0):
        raise ValueError("rtn dephasing needs r > 0 and tau >= 0")
    out = np.ones(a.shape)
    x = r * r - a * a
    near = np.abs(x) * tau * tau < 1e-8
    over = (x > 0) & ~near
    under = (x < 0) & ~near
    if near.any():
        rn, tn, xn = r[near], tau[near], x[near]
        out[near] = np.exp(-rn * tn) * (1 + rn * tn + xn * tn ** 2 / 2 + rn * xn * tn ** 3 / 6)
    if over.any():
        ro, to, ao = r[over], tau[over], a[over]
        om = np.sqrt(x[over])
        slow = np.exp(-ao * ao / (ro + om) * to)
        fast = np.exp(-(ro + om) * to)
        out[over] = 0.5 * (slow * (1 + ro / om) + fast * (1 - ro / om))
    if under.any():
        ru, tu = r[under], tau[under]
        w = np.sqrt(-x[under])
        out[under] = np.exp(-ru * tu) * (np.cos(w * tu) + ru / w * np.sin(w * tu))
    out[(a == 0) | (tau == 0)] = 1.0
    return float(out) if scalar else out


def gaussian_dephasing_factor(a: ArrayLike, sigma2: ArrayLike) -> ArrayLike:
    """Gaussian-phase dephasing ``exp(-a^2 sigma^2 / 2)``."""
    if np.any(np.asarray(sigma2) < 0):
        raise ValueError("sigma2 must be non-negative")
    return np.exp(-0.5 * np.square(a) * np.asarray(sigma2, dtype=float))


def _f_kernel(x: np.ndarray, x_up: np.ndarray, x_dn: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``F(x) = E1(x) - e^{ib}/2 E1(x + ib) - e^{-ib}/2 E1(x - ib)``.

    The shifted arguments are passed in so that callers can form them without
    cancellation.
    """
    e = exp_integral_e1(np.concatenate([x, x_up, x_dn])).reshape(3, -1)
    return e[0] - 0.5 * np.exp(1j * b) * e[1] - 0.5 * np.exp(-1j * b) * e[2]


def _rtn_log_antiderivative(u: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Antiderivative in ``u`` of ``G(b, u, 1) / u``.

    With ``W = sqrt(u^2 - b^2)`` it is ``F(u - W) + F(u + W)``: both arguments are
    real above the crossover ``u = b`` and complex conjugates below it.
    """
    out = np.empty(u.shape)
    hi = u >= b
    if hi.any():
        uh, bh = u[hi], b[hi]
        om = np.sqrt((uh - bh) * (uh + bh))
        zp = uh + om
        zm = bh * bh / (uh + om)
        args = np.concatenate([zp, zm]).astype(np.complex128)
        bb = np.concatenate([bh, bh])
        f = _f_kernel(args, args + 1j * bb, args - 1j * bb, bb).real
        out[hi] = f[: zp.size] + f[zp.size:]
    lo = ~hi
    if lo.any():
        ul, bl = u[lo], b[lo]
        s = np.sqrt((bl - ul) * (bl + ul))
        z = ul - 1j * s
        z_up = ul + 1j * (ul * ul / (bl + s))
        z_dn = ul - 1j * (bl + s)
        out[lo] = 2.0 * _f_kernel(z, z_up, z_dn, bl).real
    return out


def rtn_rate_average(a: ArrayLike, tau: ArrayLike, r_min: float, r_max: float) -> ArrayLike:
    """Average of ``G(a, r, tau)`` over ``P(r) = 1 / (r ln(r_max/r_min))`` on ``[r_min, r_max]``.

    Closed form through the exponential integral; ``G`` depends on ``a tau`` and
    ``r tau`` only, so the integral is done in the scaled variable ``u = r tau``.
    Each rate bound enters through whichever branch of the antiderivative it
    lies on, which covers the ``a < r_min``, ``r_min < a < r_max`` and
    ``a > r_max`` cases in one expression.
    """
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    scalar = np.ndim(a) == 0 and np.ndim(tau) == 0
    a, tau = np.broadcast_arrays(np.abs(np.asarray(a, dtype=float)), np.asarray(tau, dtype=float))
    if np.any(tau < 0):
        raise ValueError("tau must be non-negative")
    out = np.ones(a.shape)
    live = (a > 0) & (tau > 0)
    if live.any():
        b = (a * tau)[live]
        t = tau[live]
        total = _rtn_log_antiderivative(r_max * t, b) - _rtn_log_antiderivative(r_min * t, b)
        out[live] = total / np.log(r_max / r_min)
    return float(out) if scalar else out


@dataclass(frozen=True)
class RTNParams:
    r: float
    tau: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.r) and self.r > 0):
            raise ValueError("r must be positive and finite")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")


@dataclass(frozen=True)
class OneOverFParams:
    """Ensemble of ``n_f`` fluctuators with log-uniform ratios on ``[r_min, r_max]``.

    ``coupling_normalized=False`` gives every fluctuator the full coupling, which
    makes the ensemble factor the single-fluctuator average raised to ``n_f``.
    ``True`` scales each coupling by ``1/sqrt(n_f)`` (fixed total noise power).
    """

    n_f: int
    r_min: float = 1e-4
    r_max: float = 1e4
    tau: float = 0.0
    coupling_normalized: bool = False

    def __post_init__(self):
        if int(self.n_f) != self.n_f or self.n_f < 1:
            raise ValueError("n_f must be a positive integer")
        if not 0 < self.r_min < self.r_max:
            raise ValueError("need 0 < r_min < r_max")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")

    @property
    def coupling(self) -> float:
        return 1.0 / np.sqrt(self.n_f) if self.coupling_normalized else 1.0


@dataclass(frozen=True)
class LossParams:
    kappa_tau: float
    k_max: Optional[int] = None

    def __post_init__(self):
        if self.kappa_tau < 0:
            raise ValueError("kappa_tau must be non-negative")


@dataclass(frozen=True)
class GaussianDephasingParams:
    sigma2: float

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")


def one_over_f_factor(a: ArrayLike, p: OneOverFParams) -> ArrayLike:
    """Multi-fluctuator dephasing factor ``<G>^n_f`` for 1/f noise."""
    base = rtn_rate_average(np.asarray(a, dtype=float) * p.coupling, p.tau, p.r_min, p.r_max)
    return base ** p.n_f


def factor_table(factors: np.ndarray) -> np.ndarray:
    """``T[m, n] = factors[|m - n|]`` for a factor list indexed by ``a = 0..d-1``."""
    d = len(factors)
    idx = np.abs(np.subtract.outer(np.arange(d), np.arange(d)))
    return np.asarray(factors)[idx]


def apply_rtn_dephasing(rho: np.ndarray, p: RTNParams) -> np.ndarray:
    return rtn_channel(p, rho.shape[0]).apply(rho)


def rtn_channel(p: RTNParams, d: int) -> Channel:
    return RTNDephasing(p.r).channel(p.tau, d)


def gaussian_dephasing_channel(p: GaussianDephasingParams, d: int) -> Channel:
    return Channel.dephasing(factor_table(gaussian_dephasing_factor(np.arange(d), p.sigma2)))


def oneoverf_channel(p: OneOverFParams, d: int) -> Channel:
    return Channel.dephasing(factor_table(one_over_f_factor(np.arange(d), p)))


def loss_kraus(p: LossParams, d: int) -> Channel:
    """Photon-loss Kraus set ``A_k = (1 - e^{-kt})^{k/2} / sqrt(k!) e^{-kt n / 2} a^k``.

    ``k_max`` defaults to ``d - 1``, which makes the set exactly complete on the
    truncated space.
    """
    k_max = d - 1 if p.k_max is None else int(p.k_max)
    if k_max >= d or k_max < 0:
        raise ValueError(f"k_max must lie in [0, d-1], got {k_max} for d={d}")
    if p.kappa_tau == 0:
        return Channel.from_kraus([np.eye(d, dtype=np.complex128)])
    a, _, _ = mode_operators(d)
    n = np.arange(d)
    damp = np.diag(np.exp(-0.5 * p.kappa_tau * n))
    gamma = -np.expm1(-p.kappa_tau)
    ops = []
    ak = np.eye(d, dtype=np.complex128)
    for k in range(k_max + 1):
        coef = np.exp(0.5 * k * np.log(gamma) - 0.5 * gammaln(k + 1)) if k else 1.0
        ops.append(coef * damp @ ak)
        ak = ak @ a
    return Channel.from_kraus(ops)


class DephasingFamily:
    """Time-parametrized dephasing model; subclasses define ``factors``."""

    def factors(self, a: np.ndarray, taus: np.ndarray) -> np.ndarray:
        """Factor for every ``(tau, a)`` pair, shape ``(len(taus), len(a))``."""
        raise NotImplementedError

    def tables(self, taus: np.ndarray, d: int) -> np.ndarray:
        f = self.factors(np.arange(d), np.atleast_1d(np.asarray(taus, dtype=float)))
        idx = np.abs(np.subtract.outer(np.arange(d), np.arange(d)))
        return f[:, idx]

    def channel(self, tau: float, d: int) -> Channel:
        return Channel.dephasing(self.tables(np.array([tau]), d)[0])


@dataclass(frozen=True)
class RTNDephasing(DephasingFamily):
    r: float

    def factors(self, a, taus):
        return rtn_dephasing_factor(np.asarray(a)[None, :], self.r, np.asarray(taus)[:, None])


@dataclass(frozen=True)
class GaussianDephasing(DephasingFamily):
    """Gaussian dephasing with ``sigma^2 = k_phi tau``; ``k_phi = 1/r`` is the fast-switching limit."""

    k_phi: float

    def factors(self, a, taus):
        return gaussian_dephasing_factor(np.asarray(a)[None, :], self.k_phi * np.asarray(taus)[:, None])


@dataclass(frozen=True)
class OneOverFDephasing(DephasingFamily):
    n_f: int
    r_min: float = 1e-4
    r_max: float = 1e4
    coupling_normalized: bool = False

    def params(self, tau: float = 0.0) -> OneOverFParams:
        return OneOverFParams(self.n_f, self.r_min, self.r_max, tau, self.coupling_normalized)

    def factors(self, a, taus):
        p = self.params()
        base = rtn_rate_average(np.asarray(a, dtype=float)[None, :] * p.coupling,
                                np.asarray(taus, dtype=float)[:, None], self.r_min, self.r_max)
        return base ** self.n_f


@dataclass(frozen=True)
class NoiseModel:
    """Photon loss at rate ``kappa`` (in units of the coupling) followed by dephasing.

    Loss and any ``a``-dependent dephasing commute, so the order is immaterial.
    """

    dephasing: Optional[DephasingFamily] = None
    kappa: float = 0.0

    def loss(self, tau: float, d: int) -> Channel:
        return loss_kraus(LossParams(self.kappa * tau), d)

    def dephasing_table(self, tau: float, d: int) -> np.ndarray:
        if self.dephasing is None:
            return np.ones((d, d))
        return self.dephasing.tables(np.array([tau]), d)[0]

    def channel(self, tau: float, d: int) -> Channel:
        deph = Channel.dephasing(self.dephasing_table(tau, d))
        if self.kappa == 0:
            return deph
        return self.loss(tau, d).then(deph)

    def with_kappa(self, kappa: float) -> "NoiseModel":
        return replace(self, kappa=kappa)

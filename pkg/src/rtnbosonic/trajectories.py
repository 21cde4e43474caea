"""Monte-Carlo telegraph trajectories, independent of the analytic dephasing formulas.

A telegraph process ``c(t) = +-1`` starts from a fair coin and flips after
exponential waiting times of rate ``r``; its autocorrelation is
``exp(-2 r |t1 - t2|)``.  The accumulated phase is ``phi(tau) = int_0^tau c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .noise import OneOverFParams

Seed = Union[int, np.random.SeedSequence, np.random.Generator, None]


def make_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class TelegraphPath:
    initial_sign: int
    flip_times: np.ndarray
    tau_max: float

    def __post_init__(self):
        ft = np.asarray(self.flip_times, dtype=float)
        if self.initial_sign not in (-1, 1):
            raise ValueError("initial sign must be +1 or -1")
        if ft.size and (np.any(np.diff(ft) <= 0) or ft[0] < 0 or ft[-1] > self.tau_max):
            raise ValueError("flip times must be strictly increasing inside [0, tau_max]")

    def sign_at(self, t: Union[float, np.ndarray]) -> np.ndarray:
        flips = np.searchsorted(self.flip_times, t, side="right")
        return self.initial_sign * (1 - 2 * (flips % 2))


@dataclass(frozen=True)
class McEstimate:
    mean: complex
    std_error: float
    n_samples: int

    def within(self, value: complex, n_sigma: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_sigma * self.std_error


def _estimate(samples: np.ndarray) -> McEstimate:
    n = samples.size
    mean = complex(np.mean(samples))
    std = float(np.sqrt(np.sum(np.abs(samples - mean) ** 2) / (n - 1))) if n > 1 else 0.0
    return McEstimate(mean, std / np.sqrt(n), n)


def sample_telegraph(r: float, tau_max: float, seed: Seed = None) -> TelegraphPath:
    if r <= 0 or tau_max <= 0:
        raise ValueError("need r > 0 and tau_max > 0")
    rng = make_rng(seed)
    sign = int(rng.choice((-1, 1)))
    times = []
    t = rng.exponential(1.0 / r)
    while t <= tau_max:
        times.append(t)
        t += rng.exponential(1.0 / r)
    return TelegraphPath(sign, np.array(times), float(tau_max))


def integrate_phase(path: TelegraphPath, tau: float) -> float:
    """Exact integral of the piecewise-constant path over ``[0, tau]``."""
    if tau < 0 or tau > path.tau_max:
        raise ValueError(f"tau={tau} outside [0, {path.tau_max}]")
    edges = np.concatenate([[0.0], path.flip_times[path.flip_times < tau], [tau]])
    signs = path.initial_sign * (-1.0) ** np.arange(edges.size - 1)
    return float(np.dot(signs, np.diff(edges)))


def sample_telegraph_batch(r: float, tau_max: float, n: int,
                           rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """``n`` paths as initial signs and a flip-time matrix padded with ``inf``."""
    signs = rng.choice((-1.0, 1.0), size=n)
    mean = r * tau_max
    width = int(np.ceil(mean + 8 * np.sqrt(mean) + 8))
    gaps = rng.exponential(1.0 / r, size=(n, width))
    times = np.cumsum(gaps, axis=1)
    while np.any(times[:, -1] <= tau_max):
        extra = np.cumsum(rng.exponential(1.0 / r, size=(n, width)), axis=1) + times[:, -1:]
        times = np.concatenate([times, extra], axis=1)
    times[times > tau_max] = np.inf
    keep = np.isfinite(times).any(axis=0)
    return signs, times[:, : max(int(keep.sum()), 1)]


def batch_phases(signs: np.ndarray, flip_times: np.ndarray, tau: float) -> np.ndarray:
    """Phases of a path batch at time ``tau``.

    With ``u_j = min(t_j, tau)`` over the ``K`` padded flip slots,
    ``phi = s0 [(-1)^K tau + 2 sum_j (-1)^(j-1) u_j]``.
    """
    k = flip_times.shape[1]
    alt = (-1.0) ** np.arange(k)
    u = np.minimum(flip_times, tau)
    return signs * ((-1.0) ** k * tau + 2.0 * (u @ alt))


def telegraph_phase_exact(rates: np.ndarray, tau: float, rng: np.random.Generator) -> np.ndarray:
    """Sample ``phi(tau)`` for independent fluctuators without simulating every flip.

    Given ``N ~ Poisson(r tau)`` flips, the ``N + 1`` segment lengths are
    ``tau * Dirichlet(1, ..., 1)``; the segments carrying the initial sign hold a
    ``Beta(ceil((N+1)/2), floor((N+1)/2))`` fraction of the time.
    """
    rates = np.asarray(rates, dtype=float)
    signs = rng.choice((-1.0, 1.0), size=rates.shape)
    flips = rng.poisson(rates * tau)
    k_same = (flips + 2) // 2
    k_other = (flips + 1) // 2
    frac = np.ones(rates.shape)
    mixed = k_other > 0
    frac[mixed] = rng.beta(k_same[mixed], k_other[mixed])
    return signs * tau * (2.0 * frac - 1.0)


def mc_dephasing_factor(a: float, r: float, tau: float, n: int = 100_000,
                        seed: Seed = None) -> McEstimate:
    """Mean of ``exp(i a phi(tau))`` over ``n`` simulated telegraph paths."""
    if n < 1000:
        raise ValueError("use at least 1000 samples")
    if a == 0 or tau == 0:
        return McEstimate(1.0 + 0j, 0.0, n)
    rng = make_rng(seed)
    signs, times = sample_telegraph_batch(r, tau, n, rng)
    return _estimate(np.exp(1j * a * batch_phases(signs, times, tau)))


def sample_rates(n: Union[int, Tuple[int, ...]], r_min: float, r_max: float,
                 rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws from ``P(r) ~ 1/r`` on ``[r_min, r_max]``."""
    return r_min * (r_max / r_min) ** rng.uniform(size=n)


def mc_fluctuator_ensemble(a: float, n_f: int, r_min: float, r_max: float, tau: float,
                           n: int = 100_000, seed: Seed = None,
                           coupling: float = 1.0) -> McEstimate:
    """Mean of ``exp(i a coupling sum_i phi_i)`` over ensembles of ``n_f`` fluctuators."""
    if n < 1000:
        raise ValueError("use at least 1000 samples")
    if a == 0 or tau == 0:
        return McEstimate(1.0 + 0j, 0.0, n)
    rng = make_rng(seed)
    chunk = max(1, 2_000_000 // n_f)
    samples = []
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        rates = sample_rates((m, n_f), r_min, r_max, rng)
        total = telegraph_phase_exact(rates, tau, rng).sum(axis=1)
        samples.append(np.exp(1j * a * coupling * total))
    return _estimate(np.concatenate(samples))


def mc_one_over_f_factor(a: float, p: OneOverFParams, n: int = 100_000,
                         seed: Seed = None) -> McEstimate:
    """Monte-Carlo counterpart of ``noise.one_over_f_factor`` with the same coupling convention."""
    return mc_fluctuator_ensemble(a, p.n_f, p.r_min, p.r_max, p.tau, n, seed, p.coupling)


def spawn_seeds(seed: Optional[int], count: int) -> Sequence[np.random.SeedSequence]:
    """Independent child streams, one per grid cell or worker."""
    return np.random.SeedSequence(seed).spawn(count)

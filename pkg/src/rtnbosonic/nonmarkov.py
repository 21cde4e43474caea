"""Trace-distance non-Markovianity: revivals, the BLP sum and Gaussian-pair sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import NotConverged
from .fock import Channel, trace_norm
from .noise import DephasingFamily, RTNDephasing
from .states import GaussianParams, gaussian_state

Pair = Tuple[np.ndarray, np.ndarray]
ENVELOPE_FLOOR = 1e-4

Family = Union[DephasingFamily, Callable[[float], Channel]]


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    if np.shape(rho1) != np.shape(rho2):
        raise ValueError("states have different dimensions")
    return 0.5 * trace_norm(np.asarray(rho1) - np.asarray(rho2))


@dataclass(frozen=True, eq=False)
class TraceDistanceSeries:
    times: np.ndarray
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class RevivalReport:
    """Sum of trace-distance revivals up to a finite horizon.

    ``tail_bound`` estimates the revivals beyond the horizon from a geometric
    fit to the last revival heights (``inf`` when they do not decay).
    """

    n_blp_star: float
    rising_intervals: List[Tuple[float, float]]
    converged: bool
    tail_bound: float
    rises: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))
    series: Optional[TraceDistanceSeries] = field(repr=False, default=None)


def distance_function(pair: Pair, family: Family) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized ``tau -> D(E_tau(rho1), E_tau(rho2))``."""
    rho1, rho2 = (np.asarray(x) for x in pair)
    delta = rho1 - rho2
    d = delta.shape[0]
    if isinstance(family, DephasingFamily):
        def evaluate(taus: np.ndarray) -> np.ndarray:
            taus = np.atleast_1d(np.asarray(taus, dtype=float))
            out = np.empty(taus.size)
            for start in range(0, taus.size, 512):
                block = family.tables(taus[start:start + 512], d) * delta
                out[start:start + 512] = 0.5 * np.abs(np.linalg.eigvalsh(block)).sum(axis=1)
            return out
        return evaluate

    def evaluate(taus: np.ndarray) -> np.ndarray:
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        out = np.empty(taus.size)
        for i, t in enumerate(taus):
            ch = family(t)
            out[i] = trace_distance(ch.apply(rho1), ch.apply(rho2))
        return out
    return evaluate


def trace_distance_series(pair: Pair, family: Family, times: Sequence[float]) -> TraceDistanceSeries:
    times = np.asarray(times, dtype=float)
    return TraceDistanceSeries(times, distance_function(pair, family)(times))


def _refine(fn, lo: np.ndarray, hi: np.ndarray, maximum: bool, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    """Bisect on the sign of the slope inside each bracket; returns (time, value)."""
    lo, hi = lo.copy(), hi.copy()
    h = 0.25 * tol
    while np.any(hi - lo > tol):
        mid = 0.5 * (lo + hi)
        vals = fn(np.concatenate([mid - h, mid + h]))
        rising = vals[mid.size:] > vals[: mid.size]
        go_right = rising if maximum else ~rising
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    cand = np.stack([lo, 0.5 * (lo + hi), hi])
    vals = fn(cand.ravel()).reshape(cand.shape)
    pick = np.argmax(vals, axis=0) if maximum else np.argmin(vals, axis=0)
    cols = np.arange(lo.size)
    return cand[pick, cols], vals[pick, cols]


def _tail_bound(rises: np.ndarray, window: int = 6) -> float:
    if rises.size == 0:
        return 0.0
    if rises.size < 3:
        return float("inf")
    # suffix-max envelope: interleaved revival families otherwise fake a rising trend
    tail = np.maximum.accumulate(rises[::-1])[::-1][-window:]
    slope = np.polyfit(np.arange(tail.size), np.log(tail), 1)[0]
    q = np.exp(slope)
    if q >= 1:
        return float("inf")
    return float(tail[-1] * q / (1 - q))


def blp_star(pair: Pair, channel_family: Family, horizon: float, step: float, *,
             tol: float = 1e-6, min_rise: float = 1e-10, strict: bool = True,
             keep_series: bool = False) -> RevivalReport:
    """Sum of the trace-distance increases on ``[0, horizon]`` for one state pair.

    ``D`` is sampled every ``step``; each local extremum of the samples is
    refined by bisection on the slope sign to a bracket of width ``tol``, and
    the measure adds up ``D(max) - D(preceding min)`` over all revivals.  Rises
    below ``min_rise`` are treated as round-off.  With ``strict`` a
    ``NotConverged`` error is raised when the estimated tail beyond the horizon
    exceeds 1% of the accumulated value, unless the revival envelope has
    already dropped below ``ENVELOPE_FLOOR``.
    """
    if horizon <= 0 or step <= 0:
        raise ValueError("horizon and step must be positive")
    fn = distance_function(pair, channel_family)
    times = np.arange(0.0, horizon + 0.5 * step, step)
    vals = fn(times)
    up = np.diff(vals) > 0
    turn = np.nonzero(up[:-1] != up[1:])[0] + 1
    is_max = up[turn - 1]
    events = []  # (time, value, kind) with kind +1 max, -1 min
    if turn.size:
        for maximum in (True, False):
            sel = turn[is_max == maximum]
            if sel.size:
                t, v = _refine(fn, times[sel - 1], times[sel + 1], maximum, tol)
                events += [(ti, vi, 1 if maximum else -1) for ti, vi in zip(t, v)]
    events.sort()
    start_kind = 1 if (up.size and up[0]) else -1
    events.insert(0, (0.0, vals[0], -start_kind))
    if up.size and up[-1]:
        events.append((times[-1], vals[-1], 1))
    intervals, rises = [], []
    for (t0, v0, k0), (t1, v1, k1) in zip(events[:-1], events[1:]):
        if k0 == -1 and k1 == 1 and v1 - v0 > min_rise:
            intervals.append((float(t0), float(t1)))
            rises.append(v1 - v0)
    rises = np.array(rises)
    total = float(rises.sum())
    tail = _tail_bound(rises)
    peaks = [v for _, v, k in events if k == 1]
    converged = bool(rises.size == 0 or tail <= 0.01 * total
                     or (peaks and peaks[-1] < ENVELOPE_FLOOR and tail < ENVELOPE_FLOOR))
    series = TraceDistanceSeries(times, vals) if keep_series else None
    report = RevivalReport(total, intervals, converged, tail, rises, series)
    if strict and not converged:
        err = NotConverged(f"revival tail bound {tail:.3g} exceeds 1% of N* = {total:.6g} "
                           f"at horizon {horizon}")
        err.report = report
        raise err
    return report


def analytic_fock_pair_blp(l: int, r: float) -> float:
    """Closed-form measure of ``(|0> +- |l>)/sqrt(2)`` under telegraph dephasing.

    The distance is ``|G(l, r, tau)|``, whose revival peaks are ``exp(-r k pi / W)``
    with ``W = sqrt(l^2 - r^2)``, so the sum is ``1 / (exp(pi r / W) - 1)``.
    """
    if not 0 < r < l:
        raise ValueError("closed form needs 0 < r < l")
    return float(1.0 / np.expm1(np.pi * r / np.sqrt(l * l - r * r)))


def fock_pair(l: int, d: int) -> Pair:
    plus = np.zeros(d, dtype=np.complex128)
    plus[0] = plus[l] = 1 / np.sqrt(2)
    minus = plus.copy()
    minus[l] *= -1
    return np.outer(plus, plus.conj()), np.outer(minus, minus.conj())


def gaussian_pair(p1: GaussianParams, p2: GaussianParams, d: int) -> Pair:
    return gaussian_state(p1, d), gaussian_state(p2, d)


def gaussian_blp_sweep(r: float, alpha0_grid: Sequence[float], d: int = 40, horizon: float = 100.0,
                       step: float = 0.01, beta0: float = 0.0, nbar: float = 0.0,
                       theta: float = 0.0, strict: bool = False) -> Tuple[List[Tuple[float, float]], float]:
    """Measure for the ``(alpha0 e^{i theta}, -alpha0 e^{i theta})`` pair over a grid of ``alpha0``.

    Returns the ``(alpha0, N*)`` list and the maximizing ``alpha0``.
    """
    family = RTNDephasing(r)
    rows = []
    for a0 in alpha0_grid:
        pair = gaussian_pair(GaussianParams(a0, theta, beta0, 0.0, nbar),
                             GaussianParams(a0, theta + np.pi, beta0, 0.0, nbar), d)
        rows.append((float(a0), blp_star(pair, family, horizon, step, strict=strict).n_blp_star))
    best = max(rows, key=lambda row: row[1])[0]
    return rows, best


_GAUSS_FIELDS = ("alpha0", "theta", "beta0", "gamma", "nbar")
_GAUSS_BOUNDS = {"alpha0": (0.0, 5.0), "theta": (-np.pi, 3 * np.pi), "beta0": (0.0, 1.0),
                 "gamma": (-np.pi, 3 * np.pi), "nbar": (0.0, 3.0)}


def gaussian_pair_search(r: float, start: Tuple[GaussianParams, GaussianParams], d: int = 40,
                         horizon: float = 60.0, step: float = 0.02, sweeps: int = 3,
                         delta: float = 0.4) -> Tuple[Tuple[GaussianParams, GaussianParams], float]:
    """Coordinate ascent of the measure over all ten parameters of a Gaussian pair.

    Slow; meant for spot-checking the reduced one-parameter sweep.
    """
    family = RTNDephasing(r)

    def score(pp):
        return blp_star(gaussian_pair(pp[0], pp[1], d), family, horizon, step, strict=False).n_blp_star

    best = list(start)
    best_val = score(best)
    for _ in range(sweeps):
        improved = False
        for which in (0, 1):
            for name in _GAUSS_FIELDS:
                lo, hi = _GAUSS_BOUNDS[name]
                for sign in (1, -1):
                    val = getattr(best[which], name) + sign * delta
                    if not lo <= val <= hi:
                        continue
                    trial = list(best)
                    trial[which] = replace(best[which], **{name: val})
                    s = score(trial)
                    if s > best_val + 1e-9:
                        best, best_val, improved = trial, s, True
        if not improved:
            delta *= 0.5
    return (best[0], best[1]), best_val


def n_wn(series: Sequence[float]) -> float:
    """``1 - |sum dN| / sum |dN|`` over a sampled negativity series (0 if flat)."""
    series = np.asarray(series, dtype=float)
    if series.size < 3:
        raise ValueError("need at least three samples")
    inc = np.diff(series)
    total = np.abs(inc).sum()
    if total == 0:
        return 0.0
    return float(1.0 - abs(inc.sum()) / total)

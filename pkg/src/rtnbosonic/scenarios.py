"""Scenario runners: one ``ResultTable`` (CSV series plus metadata) per config."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence

import numpy as np

from .config import ScenarioConfig
from .fock import Channel
from .noise import (NoiseModel, OneOverFDephasing, OneOverFParams, RTNDephasing,
                    one_over_f_factor, rtn_dephasing_factor)
from .nonmarkov import analytic_fock_pair_blp, blp_star, fock_pair, gaussian_blp_sweep, n_wn
from .qec import (KnillConfig, break_even_fidelity, fidelity_bound, knill_fidelity, noise_strength,
                  phase_povm_bin, semi_analytic_fidelity_dephasing, variational_noise_strength)
from .states import RSBCode, coherent_state, fock_state
from .trajectories import mc_dephasing_factor, mc_one_over_f_factor, spawn_seeds
from .wigner import negativity_volume, ring_negativity, wigner

try:
    __version__ = metadata.version("artifact")
except metadata.PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"


def _fmt(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return format(float(value), ".17g")
    return str(value)


@dataclass
class ResultTable:
    columns: List[str]
    rows: List[List[Any]]
    metadata: Dict[str, Any] = field(default_factory=dict)
    passed: bool = True

    def column(self, name: str) -> List[Any]:
        k = self.columns.index(name)
        return [row[k] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}: {_fmt(value)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def write(self, path: Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def _pool_map(fn: Callable, tasks: Sequence, workers: int) -> List:
    """Order-preserving map, in-process for a single worker."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def default_cat_dim(alpha: float) -> int:
    return int(math.ceil(alpha * alpha + 10 * alpha + 15))


def make_code(p: Dict[str, Any]) -> RSBCode:
    if p["code"] == "binomial":
        d = p["d"] or p["N"] * p["K"] + 1
        return RSBCode.binomial(p["N"], p["K"], d)
    return RSBCode.cat(p["N"], p["alpha"], p["d"] or default_cat_dim(p["alpha"]))


# dephasing -----------------------------------------------------------------

def _dephasing_cell(task):
    a, r, tau, n, seed = task
    est = mc_dephasing_factor(a, r, tau, n, seed)
    exact = float(rtn_dephasing_factor(a, r, tau))
    return [a, r, tau, exact, est.mean.real, est.mean.imag, est.std_error, est.within(exact)]


def run_dephasing(cfg: ScenarioConfig, workers: int) -> ResultTable:
    cells = [(a, r, t) for a in cfg["a"] for r in cfg["r"] for t in cfg["tau"]]
    seeds = spawn_seeds(cfg.seed, len(cells))
    rows = _pool_map(_dephasing_cell, [c + (cfg["samples"], s) for c, s in zip(cells, seeds)], workers)
    cols = ["a", "r", "tau", "g_analytic", "g_mc_re", "g_mc_im", "g_mc_stderr", "within_3sigma"]
    frac = float(np.mean([row[-1] for row in rows]))
    return ResultTable(cols, rows, {"fraction_within_3sigma": frac})


# wigner --------------------------------------------------------------------

def _initial_state(p: Dict[str, Any]) -> np.ndarray:
    if p["state"] == "fock":
        return fock_state(p["n"], p["d"] or p["n"] + 1)
    if p["state"] == "coherent":
        return coherent_state(p["alpha"], p["d"] or default_cat_dim(p["alpha"]))
    v = make_code(dict(p, code=p["state"])).plus
    return np.outer(v, v.conj())


def _wigner_cell(task):
    rho, r, tau, radius, extent, points = task
    rho = RTNDephasing(r).channel(tau, rho.shape[0]).apply(rho)
    grid = (-extent, extent, points)
    return [tau, negativity_volume(wigner(rho, grid, grid)), ring_negativity(rho, radius)]


def run_wigner(cfg: ScenarioConfig, workers: int) -> ResultTable:
    rho = _initial_state(cfg.params)
    tasks = [(rho, cfg["r"], t, cfg["ring_radius"], cfg["extent"], cfg["points"]) for t in cfg["tau"]]
    rows = _pool_map(_wigner_cell, tasks, workers)
    meta = {}
    if len(rows) >= 3:
        meta["n_wn"] = n_wn([row[1] for row in rows])
    return ResultTable(["tau", "negativity_volume", "ring_negativity"], rows, meta)


# blp -----------------------------------------------------------------------

def make_pair(p: Dict[str, Any]):
    if p["pair"] == "fock":
        return fock_pair(p["l"], max(p["d"] or 0, p["l"] + 1))
    if p["pair"] == "coherent":
        d = p["d"] or default_cat_dim(p["alpha"])
        return coherent_state(p["alpha"], d), coherent_state(-p["alpha"], d)
    code = make_code(dict(p, code=p["pair"]))
    return np.outer(code.plus, code.plus.conj()), np.outer(code.minus, code.minus.conj())


def _blp_cell(task):
    pair, family, horizon, step = task
    rep = blp_star(pair, family, horizon, step, strict=False)
    return [rep.n_blp_star, rep.converged, rep.tail_bound, len(rep.rising_intervals)]


def run_blp(cfg: ScenarioConfig, workers: int) -> ResultTable:
    pair = make_pair(cfg.params)
    tasks = [(pair, RTNDephasing(r), cfg["horizon"], cfg["step"]) for r in cfg["r"]]
    out = _pool_map(_blp_cell, tasks, workers)
    rows = []
    for r, res in zip(cfg["r"], out):
        closed = (analytic_fock_pair_blp(cfg["l"], r)
                  if cfg["pair"] == "fock" and r < cfg["l"] else float("nan"))
        rows.append([r] + res[1:] + [closed, res[0]])
    cols = ["r", "converged", "tail_bound", "n_revivals", "closed_form", "n_blp_star"]
    return ResultTable(cols, rows, {"converged": all(row[1] for row in rows)})


# oneoverf ------------------------------------------------------------------

def run_oneoverf(cfg: ScenarioConfig, workers: int) -> ResultTable:
    d, alpha = cfg["d"], cfg["alpha"]
    pair = (coherent_state(alpha, d), coherent_state(-alpha, d))
    tasks = [(pair, OneOverFDephasing(n, cfg["r_min"], cfg["r_max"], cfg["coupling_normalized"]),
              cfg["horizon"], cfg["step"]) for n in cfg["n_f"]]
    out = _pool_map(_blp_cell, tasks, workers)
    rows = [[n, res[1], res[2], res[0]] for n, res in zip(cfg["n_f"], out)]
    return ResultTable(["n_f", "converged", "tail_bound", "n_blp_star"], rows,
                       {"converged": all(row[1] for row in rows)})


# knill ---------------------------------------------------------------------

def _noise_model(p: Dict[str, Any]) -> NoiseModel:
    if p["noise"] == "rtn":
        return NoiseModel(RTNDephasing(p["r"]), p["kappa"])
    if p["noise"] == "oneoverf":
        return NoiseModel(OneOverFDephasing(p["n_f"], p["r_min"], p["r_max"]), p["kappa"])
    return NoiseModel(None, p["kappa"])


def _knill_cell(task):
    kcfg, model, tau = task
    d = kcfg.code_N.d
    channel = model.channel(tau, d)
    row = [tau, knill_fidelity(kcfg, model, tau)]
    if model.kappa == 0:
        table = model.dephasing_table(tau, d)
        row += [semi_analytic_fidelity_dephasing(kcfg, table), fidelity_bound(kcfg, channel)]
    else:
        row += [float("nan"), float("nan")]
    return row + [noise_strength(channel, kcfg.code_N), break_even_fidelity(channel)]


def run_knill(cfg: ScenarioConfig, workers: int) -> ResultTable:
    code = make_code(cfg.params)
    kcfg = KnillConfig.symmetric(code, cfg["n_bins"])
    model = _noise_model(cfg.params)
    rows = _pool_map(_knill_cell, [(kcfg, model, t) for t in cfg["tau"]], workers)
    cols = ["tau", "fidelity", "semi_analytic", "bound", "noise_strength", "break_even"]
    return ResultTable(cols, rows, {"n_code": code.n_code})


# sweep ---------------------------------------------------------------------

def _sweep_cell(task):
    r, a0, d, horizon, step = task
    return gaussian_blp_sweep(r, [a0], d, horizon, step)[0][0]


def run_sweep(cfg: ScenarioConfig, workers: int) -> ResultTable:
    tasks = [(cfg["r"], a0, cfg["d"], cfg["horizon"], cfg["step"]) for a0 in cfg["alpha0"]]
    rows = [list(row) for row in _pool_map(_sweep_cell, tasks, workers)]
    best = max(rows, key=lambda row: row[1])[0]
    return ResultTable(["alpha0", "n_blp_star"], rows, {"alpha0_max": best})


# validate ------------------------------------------------------------------

def _check(name, value, reference, tol, relative=False):
    err = abs(value - reference) / (abs(reference) if relative else 1.0)
    return [name, value, reference, tol, err <= tol]


def _validate_task(task):
    name, samples, seed = task
    if name == "mc_rtn":
        rows = []
        for k, (a, r, tau) in enumerate([(1, 0.1, 1.0), (2, 1.0, 2.0), (3, 10.0, 0.5)]):
            est = mc_dephasing_factor(a, r, tau, samples, seed.spawn(3)[k])
            exact = float(rtn_dephasing_factor(a, r, tau))
            rows.append([f"mc_rtn a={a} r={r} tau={tau}", est.mean.real, exact,
                         3 * est.std_error, est.within(exact)])
        return rows
    if name == "mc_oneoverf":
        p = OneOverFParams(2, 1e-4, 1e4, 1.0)
        est = mc_one_over_f_factor(1.0, p, samples, seed)
        exact = float(one_over_f_factor(1.0, p))
        return [["mc_oneoverf n_f=2 tau=1", est.mean.real, exact, 3 * est.std_error, est.within(exact)]]
    if name == "fock_blp":
        rep = blp_star(fock_pair(1, 2), RTNDephasing(0.1), 400.0, 0.01, strict=False)
        return [_check("fock_pair_blp l=1 r=0.1", rep.n_blp_star, analytic_fock_pair_blp(1, 0.1), 1e-2, True)]
    if name == "povm":
        d, n_bins = 12, 64
        total = sum(phase_povm_bin(k, n_bins, None, d) for k in range(n_bins))
        return [_check("povm_completeness d=12", float(np.max(np.abs(total - np.eye(d)))), 0.0, 1e-10)]
    if name == "diamond":
        code = RSBCode.binomial(2, 2, 5)
        ch = NoiseModel(RTNDephasing(0.1), 0.01).channel(1.3, 5)
        return [_check("noise_strength_oracle", noise_strength(ch, code),
                       variational_noise_strength(ch, code), 1e-4),
                _check("noise_strength_identity", noise_strength(Channel.identity(5), code), 0.0, 0.0)]
    raise ValueError(name)


VALIDATION_CHECKS = ("mc_rtn", "mc_oneoverf", "fock_blp", "povm", "diamond")


def run_validate(cfg: ScenarioConfig, workers: int) -> ResultTable:
    seeds = spawn_seeds(cfg.seed, len(VALIDATION_CHECKS))
    tasks = [(name, cfg["samples"], s) for name, s in zip(VALIDATION_CHECKS, seeds)]
    rows = [row for group in _pool_map(_validate_task, tasks, workers) for row in group]
    ok = all(row[-1] for row in rows)
    return ResultTable(["check", "value", "reference", "tolerance", "passed"], rows, {"all_passed": ok}, ok)


RUNNERS = {
    "dephasing": run_dephasing,
    "wigner": run_wigner,
    "blp": run_blp,
    "oneoverf": run_oneoverf,
    "knill": run_knill,
    "sweep": run_sweep,
    "validate": run_validate,
}


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> ResultTable:
    table = RUNNERS[cfg.scenario](cfg, workers)
    header = {"scenario": cfg.scenario, "config_hash": cfg.digest(), "seed": cfg.seed,
              "version": __version__}
    table.metadata = {**header, **table.metadata}
    return table


def default_workers() -> int:
    return os.cpu_count() or 1

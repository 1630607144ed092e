"""
Parameter sweeps over the energy cap or the interferer energy, with one
result row per (axis point, variant, trial).
"""

import csv
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..model import ChannelMatrix, linear_to_db
from ..occupancy import (complex_normal, draw_interferer, estimate_occupancy,
                         occupancy_snapshots, true_occupancy)
from ..shaper import apply_energy_policy, design

__all__ = ['CSV_HEADER', 'ResultRow', 'TrialScenario', 'trial_rng',
           'draw_trial', 'build_occupancy', 'run_trial', 'run_sweep',
           'emit_csv', 'read_csv', 'Summary', 'summarize', 'emit_plotdata']

CSV_HEADER = ('axis', 'variant', 'trial', 'sinr_db', 'et_opt', 'transmitting',
              'gamma_max_db', 'metric')

# purpose tags keep the random streams of different draws independent
STREAMS = {'channel': 0, 'interferer': 1, 'sensing': 2, 'frame': 3}


def trial_rng(seed, trial, purpose, *extra):
    key = (int(trial), STREAMS[purpose]) + tuple(int(e) for e in extra)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


@dataclass(frozen=True)
class ResultRow:
    axis_value: float
    variant_tag: str
    trial_index: int
    sinr_db: float
    e_t_opt: float
    transmitting: bool
    gamma_max_achieved_db: float
    metric: float

    def sort_key(self):
        return (self.axis_value, self.variant_tag, self.trial_index)


@dataclass(frozen=True, eq=False)
class TrialScenario:
    h: ChannelMatrix
    interferers: tuple


def draw_trial(cfg, trial, code_len=None):
    """Channel and interferers for one trial, from the trial's own streams."""
    link = cfg.link
    l = link.code_len if code_len is None else code_len
    h = ChannelMatrix(complex_normal(trial_rng(cfg.seed, trial, 'channel'),
                                     (link.m_tx, link.n_rx)))
    specs = tuple(
        draw_interferer(t.kind, t.e_i_db, t.m_i, link.n_rx, l,
                        trial_rng(cfg.seed, trial, 'interferer', i), seed=i)
        for i, t in enumerate(cfg.interferers))
    return TrialScenario(h, specs)


def build_occupancy(cfg, scenario, trial, link=None):
    """Analytic occupancy, or a sample estimate from the trial's sensing stream."""
    link = cfg.link if link is None else link
    if cfg.occupancy_mode == 'analytic':
        return true_occupancy(list(scenario.interferers), cfg.sigma2, dim=link.dim)
    batch = occupancy_snapshots(list(scenario.interferers), cfg.sigma2,
                                link.n_rx, link.code_len,
                                trial_rng(cfg.seed, trial, 'sensing'),
                                cfg.snapshot_count)
    return estimate_occupancy(batch, cfg.loading)


def _row(axis_value, trial, res):
    return ResultRow(
        axis_value=float(axis_value), variant_tag=res.variant, trial_index=trial,
        sinr_db=float(linear_to_db(res.sinr_at_cap)) if res.transmitting else None,
        e_t_opt=res.e_t_opt, transmitting=res.transmitting,
        gamma_max_achieved_db=float(linear_to_db(res.gamma_max_achieved)),
        metric=res.metric)


def run_trial(cfg, sweep, trial):
    """All rows of a single trial."""
    scenario = draw_trial(cfg, trial)
    variants = cfg.shaping_variants()
    rows = []
    if sweep.axis == 'et_max':
        # the occupancy and the designs do not depend on the energy cap
        o = build_occupancy(cfg, scenario, trial)
        designs = [design(v, scenario.h, o, cfg.link, cfg.weight_rule)
                   for v in variants]
        for x in sweep.values:
            link = replace(cfg.link, et_max=x)
            for d in designs:
                rows.append(_row(x, trial, apply_energy_policy(d, link, cfg.policy)))
    else:
        for x in sweep.values:
            scaled = TrialScenario(scenario.h, tuple(s.with_energy(x)
                                                     for s in scenario.interferers))
            o = build_occupancy(cfg, scaled, trial)
            for v in variants:
                d = design(v, scenario.h, o, cfg.link, cfg.weight_rule)
                rows.append(_row(x, trial, apply_energy_policy(d, cfg.link, cfg.policy)))
    return rows


def _run_trial_args(args):
    return run_trial(*args)


def run_sweep(cfg, sweep=None, workers=1):
    """
    Rows for every (axis point, variant, trial), sorted by that key.

    Trials are independent and may be spread over ``workers`` processes;
    the output does not depend on the worker count.
    """
    sweep = cfg.sweep if sweep is None else sweep
    if sweep is None:
        raise ValueError("no sweep given and the scenario defines none")
    jobs = [(cfg, sweep, t) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_trial_args, jobs))
    else:
        chunks = [_run_trial_args(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=ResultRow.sort_key)
    return rows


def _fmt(x):
    if x is None:
        return ''
    return f"{x:.6g}"


def emit_csv(rows, path):
    """Write rows with the fixed header; floats keep 6 significant digits."""
    if not rows:
        raise ValueError("no rows to write")
    rows = sorted(rows, key=ResultRow.sort_key)
    try:
        with open(path, 'w', newline='', encoding='utf-8') as fh:
            writer = csv.writer(fh, lineterminator='\n')
            writer.writerow(CSV_HEADER)
            for r in rows:
                writer.writerow([_fmt(r.axis_value), r.variant_tag, r.trial_index,
                                 _fmt(r.sinr_db), _fmt(r.e_t_opt),
                                 'true' if r.transmitting else 'false',
                                 _fmt(r.gamma_max_achieved_db), _fmt(r.metric)])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_csv(path):
    def num(s):
        return None if s == '' else float(s)
    with open(path, newline='', encoding='utf-8') as fh:
        reader = csv.DictReader(fh)
        return [ResultRow(num(d['axis']), d['variant'], int(d['trial']),
                          num(d['sinr_db']), num(d['et_opt']),
                          d['transmitting'] == 'true', num(d['gamma_max_db']),
                          num(d['metric']))
                for d in reader]


@dataclass
class Summary:
    """
    Per-variant aggregates.

    ``table[variant]`` is a list of dicts, one per axis point, with keys
    axis, n, n_tx, sinr_db_mean, sinr_db_std, et_opt_mean, et_opt_std.
    ``crossing[variant]`` is the first axis value whose mean SINR reaches
    gamma_db - 0.05 dB, or None.
    """
    table: dict
    crossing: dict
    gamma_db: float

    def at(self, variant, axis_value):
        for entry in self.table[variant]:
            if np.isclose(entry['axis'], axis_value):
                return entry
        raise KeyError(f"{variant} has no axis point {axis_value}")

    def gain_db(self, variant, baseline, axis_value):
        """Mean SINR difference between two variants at one axis point."""
        return (self.at(variant, axis_value)['sinr_db_mean']
                - self.at(baseline, axis_value)['sinr_db_mean'])


def summarize(rows, gamma_db):
    if not rows:
        raise ValueError("no rows to summarize")
    groups = defaultdict(list)
    for r in rows:
        groups[(r.variant_tag, r.axis_value)].append(r)
    table = defaultdict(list)
    for (variant, axis), members in sorted(groups.items()):
        sinr = np.array([r.sinr_db for r in members if r.sinr_db is not None])
        et = np.array([r.e_t_opt for r in members])
        table[variant].append({
            'axis': axis,
            'n': len(members),
            'n_tx': int(sinr.size),
            'sinr_db_mean': float(sinr.mean()) if sinr.size else None,
            'sinr_db_std': float(sinr.std()) if sinr.size else None,
            'et_opt_mean': float(et.mean()),
            'et_opt_std': float(et.std()),
        })
    crossing = {}
    for variant, entries in table.items():
        crossing[variant] = next(
            (e['axis'] for e in entries
             if e['sinr_db_mean'] is not None and e['sinr_db_mean'] >= gamma_db - 0.05),
            None)
    return Summary(dict(table), crossing, gamma_db)


def emit_plotdata(summary, directory, stem='sweep'):
    """
    Two-column ``axis value`` files per variant: mean SINR (dB) and mean
    optimal energy. Returns the written paths.
    """
    os.makedirs(directory, exist_ok=True)
    paths = []
    for variant, entries in summary.table.items():
        for field, suffix in (('sinr_db_mean', 'sinr_db'), ('et_opt_mean', 'et_opt')):
            path = os.path.join(directory, f"{stem}_{variant}_{suffix}.dat")
            with open(path, 'w', encoding='utf-8') as fh:
                for e in entries:
                    val = e[field]
                    fh.write(f"{e['axis']:.6g} {'nan' if val is None else f'{val:.6g}'}\n")
            paths.append(path)
    return paths

"""
Command line entry point.

    stshape sweep    --config FILE --out rows.csv [--seed N] [--emit-plotdata DIR]
    stshape shape    --config FILE [--out result.json] [--seed N]
    stshape validate --config FILE [--out validate.csv] [--seed N]

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from ..model import assemble_signature, linear_to_db
from ..receiver import (detect_and_ber, filter_sinr, max_sinr_filter,
                        measure_empirical_sinr, simulate_frame)
from ..occupancy import true_occupancy
from ..shaper import shape
from ..stlinalg import ContractError
from .config import ConfigError, load_config
from .sweep import (build_occupancy, draw_trial, emit_csv, emit_plotdata,
                    run_sweep, summarize, trial_rng)

log = logging.getLogger('stshape')

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _load(args):
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides['seed'] = args.seed
    if getattr(args, 'trials', None) is not None:
        overrides['trials'] = args.trials
    return replace(cfg, **overrides) if overrides else cfg


def cmd_sweep(args):
    cfg = _load(args)
    if cfg.sweep is None:
        raise ConfigError("sweep: scenario needs sweep.axis and sweep.values")
    rows = run_sweep(cfg, workers=args.workers)
    emit_csv(rows, args.out)
    summary = summarize(rows, cfg.link.gamma_db)
    for variant, x in summary.crossing.items():
        log.info("%-12s threshold reached at %s", variant,
                 'never' if x is None else f"{x:g}")
    if args.emit_plotdata:
        stem = os.path.splitext(os.path.basename(args.out))[0]
        emit_plotdata(summary, args.emit_plotdata, stem)
    return EXIT_OK


def cmd_shape(args):
    cfg = _load(args)
    scenario = draw_trial(cfg, args.trial)
    o = build_occupancy(cfg, scenario, args.trial)
    results = [shape(v, scenario.h, o, cfg.link, cfg.policy, cfg.weight_rule).as_dict()
               for v in cfg.shaping_variants()]
    text = json.dumps({'trial': args.trial, 'results': results}, indent=2)
    print(text)
    if args.out:
        try:
            with open(args.out, 'w', encoding='utf-8') as fh:
                fh.write(text + '\n')
        except OSError as exc:
            raise OSError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    return EXIT_OK


def cmd_validate(args):
    cfg = _load(args)
    link = cfg.link
    header = ('trial', 'variant', 'et_opt', 'analytic_sinr_db',
              'measured_sinr_db', 'ser', 'ber')
    out_rows = []
    for trial in range(cfg.trials):
        scenario = draw_trial(cfg, trial)
        o = build_occupancy(cfg, scenario, trial)
        o_true = true_occupancy(list(scenario.interferers), cfg.sigma2, dim=link.dim)
        for k, v in enumerate(cfg.shaping_variants()):
            res = shape(v, scenario.h, o, link, cfg.policy, cfg.weight_rule)
            if not res.transmitting:
                out_rows.append((trial, v.tag, 0.0, None, None, None, None))
                continue
            g = assemble_signature(res.s_opt, res.w_opt, scenario.h)
            filt = max_sinr_filter(o, g)
            analytic = filter_sinr(filt, o_true, g, res.e_t_opt / link.m_tx)
            frame = simulate_frame(g, list(scenario.interferers), cfg.sigma2,
                                   res.e_t_opt, link.m_tx, link,
                                   trial_rng(cfg.seed, trial, 'frame', k),
                                   args.symbols)
            measured = measure_empirical_sinr(frame, filt, g, res.e_t_opt, link.m_tx)
            ser, ber = detect_and_ber(frame, filt, g, res.e_t_opt, link.m_tx, link)
            out_rows.append((trial, v.tag, res.e_t_opt, float(linear_to_db(analytic)),
                             float(linear_to_db(measured)), ser, ber))
            log.info("trial %d %-12s analytic %.2f dB measured %.2f dB BER %.3g",
                     trial, v.tag, linear_to_db(analytic), linear_to_db(measured), ber)

    def fmt(x):
        return '' if x is None else (f"{x:.6g}" if isinstance(x, float) else str(x))
    try:
        fh = open(args.out, 'w', newline='', encoding='utf-8') if args.out else sys.stdout
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(header)
        for r in out_rows:
            writer.writerow([fmt(x) for x in r])
        if fh is not sys.stdout:
            fh.close()
    except OSError as exc:
        raise OSError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog='stshape',
        description="Space-time waveform shaping for a MIMO link in an occupied band")
    p.add_argument('-v', '--verbose', action='store_true')
    sub = p.add_subparsers(dest='command', required=True)

    def common(sp, out_required):
        sp.add_argument('--config', required=True, help="scenario file")
        sp.add_argument('--out', required=out_required, help="output path")
        sp.add_argument('--seed', type=int, default=None,
                        help="override the scenario's master seed")

    sp = sub.add_parser('sweep', help="run the configured sweep and write CSV")
    common(sp, True)
    sp.add_argument('--trials', type=int, default=None)
    sp.add_argument('--workers', type=int, default=1)
    sp.add_argument('--emit-plotdata', metavar='DIR', default=None,
                    help="write per-variant two-column files to DIR")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser('shape', help="single-shot shaping for one trial")
    common(sp, False)
    sp.add_argument('--trial', type=int, default=0)
    sp.set_defaults(func=cmd_shape)

    sp = sub.add_parser('validate', help="Monte-Carlo check of the analytic SINR")
    common(sp, False)
    sp.add_argument('--trials', type=int, default=None)
    sp.add_argument('--symbols', type=int, default=100_000)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(message)s')
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (np.linalg.LinAlgError, ContractError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())

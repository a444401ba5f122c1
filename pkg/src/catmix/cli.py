#! /usr/bin/env python
# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

"""
usage: catmix [OPTIONS] COMMAND [ARGS]...

Command line driver. Library errors are turned into exit codes here
and nowhere else: 2 for bad input or config, 3 for a violated
mathematical precondition, 4 when the numerical retry budget ran out.
"""

import concurrent.futures
import json
import logging
import sys

import click
import numpy as np

from catmix import growth, library, mixing, qmorph
from catmix.euclid import IntVector2, decompose_primitive, parabolic_completion, vector_lower_bound
from catmix.exceptions import *
from catmix.sl2core import (ConjMethod, ElementClass, PrimeVerdict, classify,
                            is_conjugate_to_inverse, mat_pow, prime_criterion)

logger = logging.getLogger('catmix.cli')


class CatmixGroup(click.Group):
    def invoke(self, ctx):
        try:
            return super(CatmixGroup, self).invoke(ctx)
        except CatmixException as e:
            logger.error("%s: %s", type(e).__name__, e)
            ctx.exit(e.exit_code)


def _print_defaults(ctx, param, value):
    if not value or ctx.resilient_parsing:
        return
    click.echo(library.dump_defaults(), nl=False)
    ctx.exit(0)


def _emit(config, text):
    out = library.write_report(text, config['output']['path'])
    if out is not None:
        click.echo(out, nl=False)


def _engine(config):
    e = config['engine']
    return qmorph.build_engine(library.parse_matrix(config['system']['h']), tol=e['tol'],
                               sigma_min=e['sigma_min'], retries=e['retries'],
                               defect_samples=e['defect_samples'],
                               defect_word_len=e['defect_word_len'], seed=config['seed'])


@click.group(cls=CatmixGroup)
@click.option('--config', 'config_file', type=click.Path(dir_okay=False), default=None,
              help='YAML experiment configuration.')
@click.option('--print-defaults', is_flag=True, is_eager=True, expose_value=False,
              callback=_print_defaults, help='Print the default configuration and exit.')
@click.option('--h', 'h', default=None, help='Base matrix "a,b,c,d".')
@click.option('--t', 't', type=int, default=None, help='Kick period t.')
@click.option('--nmax', type=int, default=None, help='Number of kicked steps.')
@click.option('--kicks', type=click.Path(dir_okay=False), default=None,
              help='Kick file (JSON lines, one matrix per line).')
@click.option('--obs', type=click.Path(dir_okay=False), default=None, help='Observable JSON file.')
@click.option('--seed', type=int, default=None, help='Seed for every random draw.')
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Report path.')
@click.option('--engine-tol', type=float, default=None, help='Geometric tolerance of the engine.')
@click.option('-v', '--verbose', is_flag=True, help='Log at debug level.')
@click.pass_context
def cli(ctx, config_file, h, t, nmax, kicks, obs, seed, out, engine_tol, verbose):
    """Stable mixing experiments for kicked cat maps."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, stream=sys.stderr,
                        format='[%(levelname)s] %(name)s: %(message)s', force=True)
    config = library.load_config(config_file) if config_file else library.default_config()
    overrides = (
        ('system', 'h', h), ('system', 't', t), ('system', 'n_max', nmax),
        ('observable', 'file', obs), ('output', 'path', out), ('engine', 'tol', engine_tol),
    )
    for section, key, value in overrides:
        if value is not None:
            config[section][key] = value
    if kicks is not None:
        config['kicks']['source'] = 'file'
        config['kicks']['file'] = kicks
    if seed is not None:
        config['seed'] = seed
    library.validate_config(config)
    logger.debug("config hash %s", library.config_hash(config))
    ctx.obj = config


@cli.command('classify')
@click.argument('matrix')
@click.pass_obj
def classify_cmd(config, matrix):
    """Class, conjugacy to the inverse and the prime criterion."""
    m = library.parse_matrix(matrix)
    cls = classify(m)
    lines = ['matrix: %s' % m, 'class: %s' % ElementClass.to_string(cls), 'trace: %d' % m.trace()]
    if cls == ElementClass.HYPERBOLIC:
        verdict = is_conjugate_to_inverse(m)
        lines.append('conj_to_inverse: %s (%s)' % ('true' if verdict.answer else 'false',
                                                   ConjMethod.to_string(verdict.method)))
        if verdict.witness is not None:
            lines.append('witness: %s' % verdict.witness)
        bound = config['factorization']['bound']
        lines.append('prime_criterion: %s' % PrimeVerdict.to_string(prime_criterion(m, bound)))
    click.echo('\n'.join(lines))


@cli.command()
@click.argument('vector')
@click.option('--matrix', default=None, help='f for the parabolic completion and lower bound.')
@click.pass_obj
def decompose(config, vector, matrix):
    """Elementary word of a primitive vector."""
    v = IntVector2.parse(vector)
    word = decompose_primitive(v)
    record = {'vector': str(v), 'word': json.loads(word.to_json()), 'length': len(word)}
    if matrix is not None:
        f = library.parse_matrix(matrix)
        h1, h2, h3 = parabolic_completion(v, f)
        record['completion'] = {'h1': str(h1), 'h2': str(h2), 'h3': str(h3)}
        e = _engine(config)
        est = qmorph.r_hom(e, f, config['engine']['n_max'])
        dr = max(e.defect, 1)
        record['r'] = est.estimate
        record['defect'] = dr
        record['image_norm'] = v.times(f).norm()
        record['lower_bound'] = vector_lower_bound(v, f, est.estimate, dr)
    _emit(config, library.json_report(config, [record]))


@cli.command()
@click.pass_obj
def mix(config):
    """Correlations and frequency expansion along the kicked system."""
    n_max = config['system']['n_max']
    V = config['observable']['probe_radius']
    F = library.observable(config)
    system = mixing.compose(library.system_spec(config), n_max)
    with concurrent.futures.ThreadPoolExecutor(max_workers=config['workers']) as pool:
        rows = list(pool.map(lambda n: mixing.mix_row(system, F, n, V), range(1, n_max + 1)))

    summary = {'zero_time': mixing.zero_time(F, system) if F.is_finite() else 'n/a'}
    try:
        fit = mixing.decay_fit([(r['n'], r['corr_abs'] + r['tail_bound']) for r in rows])
        summary['rate'], summary['r2'] = fit.rate, fit.r2
    except AllZero:
        summary['rate'], summary['r2'] = 'AllZero', 'n/a'
    except InvalidParameter as e:
        logger.warning("no decay fit: %s", e)
        summary['rate'], summary['r2'] = 'n/a', 'n/a'
    if n_max >= 2:
        summary['expansion_slope'] = mixing.expansion_slope(system, V)
    t_max = config['system']['t_max']
    if t_max is not None and F.is_finite():
        found = mixing.empirical_t0(lambda t: library.system_spec(config, t), F,
                                    range(config['system']['t'], t_max + 1), n_max)
        summary['empirical_t0'] = None if found is None else found[0]
    _emit(config, library.csv_report(config, rows, summary))


@cli.command()
@click.option('--g', 'elements', multiple=True, help='Element to evaluate; h when omitted.')
@click.option('--samples', type=int, default=None, help='Extra defect sample size.')
@click.pass_obj
def qm(config, elements, samples):
    """Homogeneous quasi-morphism estimates."""
    e = _engine(config)
    gs = [library.parse_matrix(g) for g in elements] or [e.h]
    if samples:
        qmorph.defect_estimate(e, samples, config['engine']['defect_word_len'], seed=config['seed'])
    records = qmorph.evaluate_records(e, gs, config['engine']['n_max'])
    report = json.loads(library.json_report(config, records))
    report['engine'] = e.describe()
    _emit(config, json.dumps(report, sort_keys=True, indent=2) + '\n')


@cli.command('growth')
@click.argument('matrix', required=False)
@click.option('--sweep', type=int, default=None, help='CSV sweep over COUNT random matrices.')
@click.option('--max-trace', type=int, default=10 ** 4, show_default=True)
@click.option('--check/--no-check', default=True, help='Compare with the quasi-morphism bound.')
@click.pass_obj
def growth_cmd(config, matrix, sweep, max_trace, check):
    """Trace reduction certificate, or a reduction sweep."""
    red = config['reduction']
    if sweep is not None:
        rows = growth.reduction_sweep(np.random.default_rng(config['seed']), sweep, max_trace,
                                      red['box_bound'])
        _emit(config, library.csv_report(config, rows))
        return
    f = library.parse_matrix(matrix or config['system']['h'])
    cert = growth.trace_certificate(f, red['box_bound'], red['cf_terms'])
    record = {'certificate': cert.to_dict()}
    if check:
        e = _engine(config)
        est = qmorph.r_hom(e, f, config['engine']['n_max'])
        tb = growth.trace_bound_check(f, est.estimate, max(e.defect, 1))
        record['trace_bound'] = {'r': est.estimate, 'error_bar': est.error_bar,
                                 'defect': e.defect, 'lhs': tb.lhs, 'rhs': tb.rhs,
                                 'holds': tb.holds}
    _emit(config, library.json_report(config, [record]))


@cli.command()
@click.argument('matrix', required=False)
@click.option('--power', type=int, default=1, show_default=True, help='Bound MATRIX^power.')
@click.pass_obj
def rho(config, matrix, power):
    """Two-sided bounds for the biinvariant metric."""
    g = mat_pow(library.parse_matrix(matrix or config['system']['h']), power)
    e = _engine(config)
    est = qmorph.r_hom(e, g, config['engine']['n_max'])
    bounds = growth.rho_bounds(g, est.estimate, max(e.defect, 1), config['rho']['lip_const'])
    record = {'g': str(g), 'r': est.estimate, 'defect': e.defect}
    record.update(bounds.to_dict())
    n_max = config['system']['n_max']
    system = mixing.compose(library.system_spec(config), n_max)
    record['kick_distance'] = growth.rho_bar_kick_distance(system, n_max)
    ks = range(1, 9)
    lowers = [growth.rho_lower(mat_pow(e.h, k), qmorph.r_hom(e, mat_pow(e.h, k), 8).estimate,
                               max(e.defect, 1), config['rho']['lip_const']) for k in ks]
    margin = growth.mixing_margin(record['kick_distance'], system.spec.t,
                                  growth.linear_growth_rate(ks, lowers))
    record['mixing_margin'] = dict(margin._asdict(), heuristic=True)
    _emit(config, library.json_report(config, [record]))


def main(argv=None):
    cli.main(args=argv, prog_name='catmix')


if __name__ == '__main__':
    main()

#! /usr/bin/env python
# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

"""
Top-level library routines behind the command line: the experiment
configuration, kick and observable files, and report writers.
"""

import copy
import csv
import hashlib
import io
import json
import logging

import yaml

import catmix
from catmix.exceptions import *
from catmix.mixing import (AlphabetKicks, ExplicitKicks, KickedSystemSpec, NoKicks,
                           Observable, PeriodicKicks)
from catmix.sl2core import UnimodularMatrix

logger = logging.getLogger(__name__)

DEFAULTS = {
    'system': {
        'h': '4,9,7,16',
        't': 2,
        't_max': None,
        'n_max': 20,
    },
    'kicks': {
        'source': 'none',
        'file': None,
        'matrices': [],
        'alphabet': ['1,1,0,1', '1,0,1,1', '0,1,-1,0'],
        'trace_bound': None,
    },
    'observable': {
        'file': None,
        'probe_radius': 10,
    },
    'engine': {
        'tol': 1e-9,
        'sigma_min': 2.0 ** -20,
        'retries': 8,
        'defect_samples': 32,
        'defect_word_len': 8,
        'n_max': 128,
    },
    'factorization': {
        'bound': 10 ** 6,
    },
    'reduction': {
        'box_bound': 200,
        'cf_terms': 512,
    },
    'rho': {
        'lip_const': 4.0,
    },
    'output': {
        'path': None,
    },
    'seed': 0,
    'workers': 1,
}

KICK_SOURCES = ('none', 'file', 'periodic', 'alphabet')


def default_config():
    return copy.deepcopy(DEFAULTS)


def dump_defaults():
    return yaml.safe_dump(DEFAULTS, default_flow_style=False, sort_keys=True)


def _check_type(path, value, default):
    if default is None or value is None:
        return value
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                pass
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    elif isinstance(default, list):
        ok = isinstance(value, list)
    else:
        ok = isinstance(value, type(default))
    if not ok:
        raise ConfigError("config key [%s] expects %s, got %r" % (path, type(default).__name__, value))
    return value


def _merge(base, doc, prefix=''):
    for key, value in doc.items():
        path = prefix + str(key)
        if key not in base:
            raise ConfigError("unknown config key [%s]" % path)
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError("config section [%s] must be a mapping" % path)
            _merge(base[key], value, path + '.')
        else:
            base[key] = _check_type(path, value, DEFAULTS_FLAT.get(path))


def _flatten(d, prefix=''):
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, prefix + k + '.'))
        else:
            out[prefix + k] = v
    return out


DEFAULTS_FLAT = _flatten(DEFAULTS)


def load_config_str(yaml_str, filename=None):
    """
    Resolve a YAML configuration over the defaults.

    @param yaml_str: YAML text
    @type  yaml_str: str
    @param filename: name used in error messages
    @type  filename: str
    """
    try:
        doc = {} if yaml_str.strip() == '' else yaml.safe_load(yaml_str)
    except yaml.YAMLError as e:
        raise ConfigError("cannot parse config: %s" % e)
    if type(doc) != dict:
        if filename:
            raise ConfigError("yaml file [%s] does not contain a dictionary" % filename)
        raise ConfigError("yaml string does not contain a dictionary")
    config = default_config()
    _merge(config, doc)
    validate_config(config)
    return config


def load_config(filename):
    try:
        with open(filename, 'r') as f:
            return load_config_str(f.read(), filename=filename)
    except IOError as e:
        raise ConfigError("cannot read config [%s]: %s" % (filename, e))


def validate_config(config):
    if config['kicks']['source'] not in KICK_SOURCES:
        raise ConfigError("kicks.source must be one of %s, got [%s]"
                          % (', '.join(KICK_SOURCES), config['kicks']['source']))
    for path in ('system.t', 'system.n_max', 'engine.n_max', 'workers', 'observable.probe_radius'):
        section, _, key = path.rpartition('.')
        value = config[section][key] if section else config[key]
        if value < 1:
            raise ConfigError("config key [%s] must be >= 1, got %r" % (path, value))
    if config['engine']['tol'] <= 0:
        raise ConfigError("engine.tol must be positive")
    for path in ('system.t_max', 'kicks.trace_bound'):
        section, _, key = path.partition('.')
        value = config[section][key]
        if value is not None and (not isinstance(value, int) or isinstance(value, bool)):
            raise ConfigError("config key [%s] expects an integer, got %r" % (path, value))
    return config


def config_hash(config):
    """First 16 hex digits of SHA-256 over the canonical JSON of the config."""
    canonical = json.dumps(config, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]


def parse_matrix(text):
    if isinstance(text, (list, tuple)):
        if len(text) != 4:
            raise MalformedInput("matrix %r must have four entries" % (text,))
        return UnimodularMatrix(*text)
    return UnimodularMatrix.parse(text)


def parse_kicks_str(text, filename=None):
    """
    Kick file: JSON lines, one matrix per line, as "a,b,c,d" or [a,b,c,d].
    """
    matrices = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            matrices.append(parse_matrix(json.loads(line)))
        except ValueError as e:
            raise MalformedInput("%s line %d: %s" % (filename or 'kick file', lineno, e))
    return matrices


def load_kicks(filename):
    try:
        with open(filename, 'r') as f:
            return parse_kicks_str(f.read(), filename)
    except IOError as e:
        raise MalformedInput("cannot read kick file [%s]: %s" % (filename, e))


def load_observable(filename):
    try:
        with open(filename, 'r') as f:
            return Observable.from_json(f.read())
    except IOError as e:
        raise MalformedInput("cannot read observable [%s]: %s" % (filename, e))


def kick_source(config):
    k = config['kicks']
    source = k['source']
    if source == 'none':
        return NoKicks()
    if source == 'file':
        if not k['file']:
            raise ConfigError("kicks.source is file but kicks.file is not set")
        return ExplicitKicks(load_kicks(k['file']))
    if source == 'periodic':
        matrices = [parse_matrix(m) for m in k['matrices']]
        if not matrices and k['file']:
            matrices = load_kicks(k['file'])
        return PeriodicKicks(matrices)
    return AlphabetKicks([parse_matrix(m) for m in k['alphabet']], config['seed'])


def system_spec(config, t=None):
    return KickedSystemSpec(parse_matrix(config['system']['h']),
                            config['system']['t'] if t is None else t,
                            kick_source(config), config['kicks']['trace_bound'])


def observable(config):
    if config['observable']['file']:
        return load_observable(config['observable']['file'])
    # default probe: cos 2 pi <(1,0), x>
    return Observable.cosine((1, 0))


def header(config):
    return {
        'version': catmix.__version__,
        'config_hash': config_hash(config),
        'seed': config['seed'],
        'config': config,
    }


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return 'NotReached'
    return str(value)


def csv_report(config, rows, summary=None):
    """
    '#' header lines, then CSV rows; summary lines follow as '# key: value'.
    """
    out = io.StringIO()
    h = header(config)
    out.write('# catmix %s\n' % h['version'])
    out.write('# config_hash: %s\n' % h['config_hash'])
    out.write('# seed: %s\n' % h['seed'])
    out.write('# config: %s\n' % json.dumps(config, sort_keys=True))
    if rows:
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(list(rows[0].keys()))
        for row in rows:
            writer.writerow([_cell(v) for v in row.values()])
    for key, value in (summary or {}).items():
        out.write('# %s: %s\n' % (key, _cell(value)))
    return out.getvalue()


def json_report(config, records):
    return json.dumps({'header': header(config), 'records': records},
                      sort_keys=True, indent=2) + '\n'


def write_report(text, path):
    """Write to path, or return the text for stdout when path is None."""
    if path is None:
        return text
    with io.open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    logger.debug("report written to %s", path)
    return None

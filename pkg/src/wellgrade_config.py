"""
WellGrade run configuration.

One YAML document (JSON is accepted, it is a YAML subset) whose sections
mirror the simulation parameters:

  system:      c1, c2, m
  basis:       N, kappa
  protocol:    kind, delta, amplitude, tau_omega, ramp_fraction
  environment: gamma_over_omega, lambda_over_omega, T
  numerics:    integration and sampling knobs
  output:      directory, formats
"""
import copy
import os

import yaml

from qtransfer.dynamics import EnvironmentSpec, NumericsSpec
from qtransfer.exceptions import ConfigError, Error
from qtransfer.integrator import METHODS
from qtransfer.model import ProtocolKind, ProtocolSpec, SystemSpec
from wellgrade_util import (canonical_json, coerce_numeric, parse_keyval_list,
                            sha256_text)

DEFAULT_CONFIG = {
  'system': {'c1': -1.5, 'c2': 0.05, 'm': 1.0},
  'basis': {'N': 60, 'kappa': 60},
  'protocol': {'kind': 'quantum1', 'delta': 0.001, 'amplitude': None,
               'tau_omega': 10.0, 'ramp_fraction': 1.0 / 3.0},
  'environment': {'gamma_over_omega': 0.01, 'lambda_over_omega': 0.001,
                  'T': 1.0},
  'numerics': {'abs_tol': 1e-9, 'rel_tol': 1e-7, 'max_step': 0.05,
               'min_step': 1e-12, 'sample_stride': 50,
               'sample_fraction': 0.0025, 'hermitize_every': 10,
               'n_theta': None, 'n_phi': None, 'store_states': False,
               'method': 'RK45', 'density_every': 40},
  'output': {'directory': 'results', 'formats': ['csv', 'json']},
}

REQUIRED_KEYS = ('system.c1', 'system.c2', 'basis.N', 'basis.kappa',
                 'protocol.kind', 'protocol.delta', 'protocol.tau_omega',
                 'environment.gamma_over_omega',
                 'environment.lambda_over_omega', 'environment.T')

FORMATS = ('csv', 'json')


def _lookup(data, path):
  node = data
  for part in path.split('.'):
    if not isinstance(node, dict) or part not in node:
      raise KeyError(path)
    node = node[part]
  return node


def _coerce_value(value):
  if isinstance(value, str):
    lowered = value.lower()
    if lowered in ('true', 'yes'):
      return True
    if lowered in ('false', 'no'):
      return False
    if lowered in ('null', 'none', '~'):
      return None
    if value.startswith('[') or value.startswith('{'):
      return yaml.safe_load(value)
    return coerce_numeric(value)
  return value


class RunConfig(object):
  """
  WellGrade Configuration elements.
  """
  WELLGRADE_TMPDIR = '/tmp/wellgrade'  # Temporary directory for WellGrade
  WELLGRADE_LOGFILE = '/tmp/wellgrade/wellgrade.log'  # Path to logfile
  WELLGRADE_CONFIG_FILE = None

  def __init__(self, data, config_file=None):
    if not isinstance(data, dict):
      raise ConfigError('config', "top level must be a mapping")
    data = copy.deepcopy(data)
    if 'WELLGRADE_LOGFILE' in data:
      self.WELLGRADE_LOGFILE = data.pop('WELLGRADE_LOGFILE')
    self.WELLGRADE_CONFIG_FILE = config_file
    for path in REQUIRED_KEYS:
      try:
        _lookup(data, path)
      except KeyError:
        raise ConfigError(path, "required key is missing")
    merged = copy.deepcopy(DEFAULT_CONFIG)
    for section, values in data.items():
      if section not in DEFAULT_CONFIG:
        raise ConfigError(section, "unknown section")
      if values is None:
        continue
      if not isinstance(values, dict):
        raise ConfigError(section, "must be a mapping")
      for key, value in values.items():
        if key not in DEFAULT_CONFIG[section]:
          raise ConfigError("%s.%s" % (section, key), "unknown key")
        merged[section][key] = value
    self._data = merged
    self._validate()

  @classmethod
  def from_file(cls, config_file):
    if not config_file:
      raise ConfigError('config', "you must provide a config file")
    if not os.path.exists(config_file):
      raise ConfigError('config', "file %s does not exist" % config_file)
    try:
      with open(config_file) as fp:
        userconfig = yaml.safe_load(fp.read())
    except yaml.YAMLError as e:
      raise ConfigError('config', "cannot parse %s: %s" % (config_file, e))
    return cls(userconfig or {}, config_file)

  @classmethod
  def defaults(cls):
    """The embedded reference configuration."""
    return cls(copy.deepcopy(DEFAULT_CONFIG))

  def with_overrides(self, overrides):
    """
    Copy with dotted key=value overrides applied, e.g. ``environment.T=10``.

    :param overrides: list of key=value strings
    :type overrides: ``list`` of ``str``
    """
    try:
      pairs = parse_keyval_list(overrides)
    except AttributeError as e:
      raise ConfigError('override', str(e))
    data = copy.deepcopy(self._data)
    for path, raw in pairs.items():
      parts = path.split('.')
      if len(parts) != 2:
        raise ConfigError(path, "override keys are section.key")
      section, key = parts
      if section not in DEFAULT_CONFIG or key not in DEFAULT_CONFIG[section]:
        raise ConfigError(path, "unknown key")
      data[section][key] = _coerce_value(raw)
    data['WELLGRADE_LOGFILE'] = self.WELLGRADE_LOGFILE
    return RunConfig(data, self.WELLGRADE_CONFIG_FILE)

  def get(self, path):
    return _lookup(self._data, path)

  def snapshot(self):
    return copy.deepcopy(self._data)

  def content_hash(self):
    return sha256_text(canonical_json(self._data))

  def _number(self, path, positive=False, nonnegative=False, negative=False,
              integer=False, optional=False):
    value = self.get(path)
    if value is None and optional:
      return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
      raise ConfigError(path, "must be a number, got %r" % (value,))
    if integer and int(value) != value:
      raise ConfigError(path, "must be an integer, got %r" % (value,))
    if positive and not value > 0:
      raise ConfigError(path, "must be positive, got %r" % (value,))
    if nonnegative and not value >= 0:
      raise ConfigError(path, "must be >= 0, got %r" % (value,))
    if negative and not value < 0:
      raise ConfigError(path, "must be negative, got %r" % (value,))
    return int(value) if integer else float(value)

  def _validate(self):
    self._number('system.c1', negative=True)
    self._number('system.c2', positive=True)
    self._number('system.m', positive=True)
    if self._number('basis.N', integer=True) < 2:
      raise ConfigError('basis.N', "must be >= 2")
    self._number('basis.kappa', integer=True, nonnegative=True)

    try:
      kind = ProtocolKind(self.get('protocol.kind'))
    except ValueError:
      raise ConfigError('protocol.kind', "must be one of %s" %
                        ", ".join(k.value for k in ProtocolKind))
    delta = self._number('protocol.delta', positive=True)
    amplitude = self._number('protocol.amplitude', optional=True)
    if not kind.is_quantum and amplitude is not None and not amplitude > delta:
      raise ConfigError('protocol.amplitude', "must exceed protocol.delta")
    self._number('protocol.tau_omega', positive=True)
    ramp = self._number('protocol.ramp_fraction', positive=True)
    if ramp > 0.5:
      raise ConfigError('protocol.ramp_fraction', "must be in (0, 1/2]")

    self._number('environment.gamma_over_omega', nonnegative=True)
    self._number('environment.lambda_over_omega', nonnegative=True)
    self._number('environment.T', positive=True)

    for key in ('abs_tol', 'rel_tol', 'max_step', 'min_step',
                'sample_fraction'):
      self._number('numerics.' + key, positive=True)
    if self.get('numerics.min_step') >= self.get('numerics.max_step'):
      raise ConfigError('numerics.min_step', "must be below numerics.max_step")
    if self.get('numerics.sample_fraction') > 1.0:
      raise ConfigError('numerics.sample_fraction', "must be <= 1")
    for key in ('sample_stride', 'hermitize_every'):
      if self._number('numerics.' + key, integer=True) < 1:
        raise ConfigError('numerics.' + key, "must be >= 1")
    self._number('numerics.density_every', integer=True, nonnegative=True)
    for key in ('n_theta', 'n_phi'):
      self._number('numerics.' + key, integer=True, nonnegative=True,
                   optional=True)
    if not isinstance(self.get('numerics.store_states'), bool):
      raise ConfigError('numerics.store_states', "must be true or false")
    if self.get('numerics.method') not in METHODS:
      raise ConfigError('numerics.method', "must be one of %s" %
                        ', '.join(sorted(METHODS)))

    if not isinstance(self.get('output.directory'), str):
      raise ConfigError('output.directory', "must be a path")
    formats = self.get('output.formats')
    if isinstance(formats, str):
      formats = [formats]
      self._data['output']['formats'] = formats
    if not isinstance(formats, list) or \
        any(f not in FORMATS for f in formats):
      raise ConfigError('output.formats', "must be a list drawn from %s" %
                        ", ".join(FORMATS))

  @property
  def kind(self):
    return ProtocolKind(self.get('protocol.kind'))

  @property
  def tau_omega(self):
    return float(self.get('protocol.tau_omega'))

  @property
  def N(self):
    return int(self.get('basis.N'))

  @property
  def kappa(self):
    return int(self.get('basis.kappa'))

  @property
  def output_directory(self):
    return self.get('output.directory')

  @property
  def formats(self):
    return list(self.get('output.formats'))

  def system_spec(self, omega=None):
    return SystemSpec(self.get('system.c1'), self.get('system.c2'),
                      self.get('system.m'), omega)

  def protocol_spec(self, omega):
    """ProtocolSpec with tau = tau_omega / omega."""
    try:
      return ProtocolSpec(self.kind, self.get('protocol.delta'),
                          self.tau_omega / omega,
                          self.get('protocol.amplitude'),
                          self.get('protocol.ramp_fraction'))
    except Error as e:
      raise ConfigError('protocol', str(e))

  def environment_spec(self, omega, hbar=1.0):
    return EnvironmentSpec(self.get('environment.gamma_over_omega') * omega,
                           self.get('environment.lambda_over_omega') * omega,
                           self.get('environment.T'),
                           self.get('system.m'), hbar)

  def numerics_spec(self):
    n = self._data['numerics']
    return NumericsSpec(n['abs_tol'], n['rel_tol'], n['max_step'],
                        n['min_step'], n['sample_stride'],
                        n['sample_fraction'], n['hermitize_every'],
                        n['n_theta'], n['n_phi'], n['store_states'],
                        method=n['method'],
                        density_every=n['density_every'])

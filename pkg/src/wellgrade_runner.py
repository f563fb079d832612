"""
Scenario orchestration: one graded run with its artifacts, parameter sweeps
over a worker pool, the reference table, the Landau-Zener demo and the
numerical validation report.
"""
import functools
import itertools
import logging
import math
import multiprocessing
import os
import traceback

import numpy as np

import qtransfer
from qtransfer import broadcast, lz, metrics, model, phasespace
from qtransfer.dynamics import COLUMNS, propagate
from qtransfer.exceptions import ConfigError, Error
from qtransfer.model import ProtocolKind, ProtocolSpec
from qtransfer.spinbasis import build_basis
from wellgrade_config import RunConfig
from wellgrade_plugin import locate_output_plugins
from wellgrade_util import (get_wellgrade_topdir, log_exceptions, randomid,
                            sha256_file, timed, wellgrade_isotime,
                            wellgrade_log)

SWEEP_HEADER = ('protocol', 'T', 'tau_omega', 'hs_ratio', 'sigma_ir',
                'transfer_pct', 'g_s', 'g_q', 'g_t', 'G', 'reason')
TABLE1_HEADER = ('quantity', 'protocol', 'T', 'value', 'published', 'delta')
TABLE1_QUANTITIES = ('tau_omega', 'hs_ratio', 'sigma_ir', 'transfer_pct',
                     'g_s', 'g_q', 'g_t', 'G')
TABLE1_TEMPERATURES = (1.0, 10.0)
TABLE1_TAU_OMEGA = {ProtocolKind.CLASSICAL1: 300.0,
                    ProtocolKind.CLASSICAL2: 300.0,
                    ProtocolKind.QUANTUM1: 10.0,
                    ProtocolKind.QUANTUM2: 10.0}

# Published reference values, (kind, T) -> quantity -> value
PUBLISHED_TABLE1 = {
  ('classical1', 1.0): {'tau_omega': 300, 'hs_ratio': 0.13, 'sigma_ir': 1.37,
                        'transfer_pct': 0.8239, 'g_s': 0.88, 'g_q': 0.27,
                        'g_t': 0.25, 'G': 0.06},
  ('classical1', 10.0): {'tau_omega': 300, 'hs_ratio': 0.08, 'sigma_ir': 2.36,
                         'transfer_pct': 0.5780, 'g_s': 0.90, 'g_q': 0.09,
                         'g_t': 0.09, 'G': 0.007},
  ('classical2', 1.0): {'tau_omega': 300, 'hs_ratio': 0.20, 'sigma_ir': 2.18,
                        'transfer_pct': 0.9154, 'g_s': 0.86, 'g_q': 0.36,
                        'g_t': 0.11, 'G': 0.03},
  ('classical2', 10.0): {'tau_omega': 300, 'hs_ratio': 0.07, 'sigma_ir': 4.29,
                         'transfer_pct': 0.5632, 'g_s': 0.90, 'g_q': 0.10,
                         'g_t': 0.01, 'G': 0.0009},
  ('quantum1', 1.0): {'tau_omega': 10, 'hs_ratio': 2.20, 'sigma_ir': 0.10,
                      'transfer_pct': 0.9998, 'g_s': 0.90, 'g_q': 0.94,
                      'g_t': 0.90, 'G': 0.76},
  ('quantum1', 10.0): {'tau_omega': 10, 'hs_ratio': 1.72, 'sigma_ir': 0.47,
                       'transfer_pct': 0.9610, 'g_s': 0.91, 'g_q': 0.59,
                       'g_t': 0.63, 'G': 0.34},
  ('quantum2', 1.0): {'tau_omega': 10, 'hs_ratio': 2.06, 'sigma_ir': 0.10,
                      'transfer_pct': 0.9545, 'g_s': 0.90, 'g_q': 0.89,
                      'g_t': 0.90, 'G': 0.72},
  ('quantum2', 10.0): {'tau_omega': 10, 'hs_ratio': 1.33, 'sigma_ir': 0.46,
                       'transfer_pct': 0.6828, 'g_s': 0.92, 'g_q': 0.40,
                       'g_t': 0.63, 'G': 0.23},
}


def default_tau_omega_grid(count=12):
  return [float(v) for v in np.logspace(-1.0, math.log10(300.0), count)]


def worker_count(cells):
  """
  Pool size: the CPU count, capped by WELLGRADE_THREADS and the number of
  cells.
  """
  count = os.cpu_count() or 1
  env = os.environ.get('WELLGRADE_THREADS')
  if env:
    try:
      count = min(count, max(1, int(env)))
    except ValueError:
      raise ConfigError('WELLGRADE_THREADS', "must be an integer, got %r" %
                        env)
  return max(1, min(count, cells))


@functools.lru_cache(maxsize=4)
def cached_basis(N, kappa):
  return build_basis(N, kappa)


class Scenario(object):
  """
  Everything a run needs, derived from a RunConfig. omega comes from the
  initial right well and sets gamma, Lambda and tau.
  """

  def __init__(self, config):
    self.config = config
    self.basis = cached_basis(config.N, config.kappa)
    system = config.system_spec()
    unit = ProtocolSpec(config.kind, config.get('protocol.delta'), 1.0,
                        config.get('protocol.amplitude'),
                        config.get('protocol.ramp_fraction'))
    omega = model.well_frequency(self.basis, system, unit)
    self.omega = omega
    self.system = system.with_omega(omega)
    self.protocol = config.protocol_spec(omega)
    self.env = config.environment_spec(omega, self.basis.hbar)
    self.numerics = config.numerics_spec()
    self.use_sta = self.protocol.kind.is_quantum
    self.grid = self.numerics.sphere_grid(self.basis.N)

  def derived(self):
    return {'omega': self.omega, 'gamma': self.env.gamma,
            'Lambda': self.env.Lambda, 'tau': self.protocol.tau,
            'gamma_x': self.env.gamma_x, 'gamma_p': self.env.gamma_p,
            'decoherence_time': metrics.decoherence_time(self.env,
                                                         self.system)}

  def initial_state(self):
    return model.initial_state(self.basis, self.system, self.protocol)

  def target_state(self):
    return model.target_state(self.basis, self.system, self.protocol)


@timed
def execute(config, run_id=None):
  """
  Propagate and grade one configuration without writing anything.

  :return: (scenario, trajectory, report)
  """
  scenario = Scenario(config)
  wellgrade_log(logging.INFO,
                "Run %s: %s T=%g omega=%.6g gamma=%.6g Lambda=%.6g tau=%.6g" %
                (run_id, scenario.protocol.kind.value, scenario.env.T,
                 scenario.omega, scenario.env.gamma, scenario.env.Lambda,
                 scenario.protocol.tau))
  target = scenario.target_state()
  trajectory = propagate(scenario.initial_state(), scenario.system,
                         scenario.protocol, scenario.env, scenario.basis,
                         scenario.numerics, use_sta=scenario.use_sta,
                         grid=scenario.grid, reference=target, run_id=run_id)
  report = metrics.grade(trajectory, target, scenario.basis.hbar)
  wellgrade_log(logging.INFO, "Run %s graded: %r" % (run_id, report))
  return scenario, trajectory, report


@log_exceptions
def store_artifacts(artifacts, directory, formats, plugin_dir=None):
  """
  Hand every artifact to the output plugins of the configured formats.

  :return: list of written paths
  """
  plugin_dir = plugin_dir or os.path.join(get_wellgrade_topdir(), 'plugins',
                                          'output')
  located = locate_output_plugins(plugin_dir)
  written = []
  for fmt in formats:
    if fmt not in located:
      raise ConfigError('output.formats', "no output plugin for '%s'" % fmt)
    plugin = located[fmt]()
    if not plugin.startup({'directory': directory}):
      raise Error("output plugin %s failed to start" % plugin.plugin_name)
    try:
      for artifact in artifacts:
        written.extend(plugin.store(artifact))
    finally:
      plugin.shutdown()
  return written


def write_manifest(config, directory, paths, run_id, started, derived=None,
                   plugin_dir=None):
  """
  manifest.json with the config snapshot, its hash and per-file checksums.
  """
  manifest = {
    'run_id': run_id,
    'version': qtransfer.__version__,
    'config': config.snapshot(),
    'config_hash': config.content_hash(),
    'started': started,
    'finished': wellgrade_isotime(),
    'derived': derived or {},
    'files': {os.path.basename(p): sha256_file(p) for p in sorted(paths)},
  }
  return store_artifacts([{'name': 'manifest', 'data': manifest}], directory,
                         ['json'], plugin_dir)[0]


def _plain_number(value):
  if isinstance(value, (np.floating, np.integer)):
    return value.item()
  return value


def run_scenario(config, out_dir=None, plugin_dir=None):
  """
  Propagate, grade and write trajectory.csv, grading.json,
  position_density.csv (when snapshots are on) and manifest.json.

  :return: (report, list of written paths)
  """
  run_id = randomid()
  started = wellgrade_isotime()
  directory = out_dir or config.output_directory
  os.makedirs(directory, exist_ok=True)
  wellgrade_log(logging.INFO, "Run %s started, config hash %s" %
                (run_id, config.content_hash()))
  with broadcast.ProgressLogger(run_id):
    scenario, trajectory, report = execute(config, run_id)
  derived = scenario.derived()
  grading = report.to_dict()
  grading['protocol'] = scenario.protocol.kind.value
  grading['T'] = scenario.env.T
  grading['tau_omega'] = config.tau_omega
  grading['derived'] = derived
  grading['diagnostics'] = {k: _plain_number(v)
                            for k, v in grading['diagnostics'].items()}
  artifacts = [
    {'name': 'trajectory', 'header': list(COLUMNS),
     'rows': trajectory.rows},
    {'name': 'grading', 'data': grading},
  ]
  if trajectory.densities:
    artifacts.append({'name': 'position_density',
                      'header': ['t', 'x', 'probability'],
                      'rows': trajectory.density_rows()})
  paths = store_artifacts(artifacts, directory, config.formats, plugin_dir)
  paths.append(write_manifest(config, directory, paths, run_id, started,
                              derived, plugin_dir))
  wellgrade_log(logging.INFO, "Run %s finished: G=%.6g, wrote %d files" %
                (run_id, report.G, len(paths)))
  return report, paths


def cell_config(config, kind, T, tau_omega):
  """Config of one sweep cell; other kinds fall back to their own amplitude."""
  overrides = ['protocol.kind=%s' % kind.value, 'environment.T=%r' % T,
               'protocol.tau_omega=%r' % tau_omega]
  if kind is not config.kind:
    overrides.append('protocol.amplitude=null')
  return config.with_overrides(overrides)


def _nan_row(kind, T, tau_omega, e):
  nan = float('nan')
  return (kind.value, T, tau_omega, nan, nan, nan, nan, nan, nan, nan,
          "%s: %s" % (e.__class__.__name__, e))


def _run_cell(args):
  """Pool worker: one (kind, T, tau_omega) cell. Failures become NaN rows."""
  data, kind_value, T, tau_omega = args
  kind = ProtocolKind(kind_value)
  try:
    config = cell_config(RunConfig(data), kind, T, tau_omega)
    _, _, report = execute(config)
    return (kind.value, T, tau_omega, report.hs_ratio, report.sigma_ir,
            report.transfer_pct, report.g_s, report.g_q, report.g_t,
            report.G, '')
  except Error as e:
    wellgrade_log(logging.ERROR, "Cell %s T=%g tau_omega=%g failed: %s" %
                  (kind.value, T, tau_omega, e))
    return _nan_row(kind, T, tau_omega, e)
  except Exception as e:
    wellgrade_log(logging.ERROR,
                  "Cell %s T=%g tau_omega=%g unhandled exception: %s\n%s" %
                  (kind.value, T, tau_omega, e, traceback.format_exc()))
    return _nan_row(kind, T, tau_omega, e)


def run_cells(config, cells, threads=None):
  """
  Execute cells in a process pool; rows keep the order of ``cells``.
  """
  data = config.snapshot()
  jobs = [(data, kind.value, float(T), float(tw)) for kind, T, tw in cells]
  threads = threads or worker_count(len(jobs))
  wellgrade_log(logging.INFO, "Running %d cells on %d workers" %
                (len(jobs), threads))
  if threads == 1:
    return [_run_cell(job) for job in jobs]
  with multiprocessing.Pool(threads) as pool:
    return pool.map(_run_cell, jobs)


def sweep(config, tau_omega_list=None, temperatures=None, kinds=None,
          out_dir=None, plugin_dir=None, threads=None):
  """
  Grade every (protocol, T, tau_omega) cell and write sweep.csv.

  :return: (rows, written paths)
  """
  if tau_omega_list is None:
    tau_omega_list = default_tau_omega_grid()
  if temperatures is None:
    temperatures = [config.get('environment.T')]
  if not tau_omega_list:
    raise ConfigError('sweep.tau_omega', "list is empty")
  if not temperatures:
    raise ConfigError('sweep.temperatures', "list is empty")
  for tw in tau_omega_list:
    if not tw > 0:
      raise ConfigError('sweep.tau_omega', "values must be positive")
  for T in temperatures:
    if not T > 0:
      raise ConfigError('sweep.temperatures', "values must be positive")
  kinds = [ProtocolKind(k) for k in (kinds or list(ProtocolKind))]
  cells = list(itertools.product(kinds, temperatures, tau_omega_list))
  rows = run_cells(config, cells, threads)
  directory = out_dir or config.output_directory
  os.makedirs(directory, exist_ok=True)
  paths = store_artifacts([{'name': 'sweep', 'header': list(SWEEP_HEADER),
                            'rows': rows}], directory,
                          ['csv'], plugin_dir)
  return rows, paths


def table1_rows(cell_rows):
  """
  Long-format reference table rows from sweep rows, with the published
  value and the difference to it.
  """
  rows = []
  index = {name: SWEEP_HEADER.index(name) for name in SWEEP_HEADER}
  for quantity in TABLE1_QUANTITIES:
    for cell in cell_rows:
      kind, T = cell[index['protocol']], cell[index['T']]
      value = float(cell[index[quantity]])
      published = PUBLISHED_TABLE1.get((kind, float(T)), {}).get(quantity)
      if published is None:
        published = delta = float('nan')
      else:
        published = float(published)
        delta = value - published
      rows.append((quantity, kind, T, value, published, delta))
  return rows


def table1(config=None, overrides=None, out_dir=None, plugin_dir=None,
           threads=None):
  """
  The eight reference scenarios (four protocols at T = 1 and 10) with the
  reference values; writes table1.csv and table1.json.

  :return: (rows, written paths)
  """
  config = config or RunConfig.defaults()
  if overrides:
    config = config.with_overrides(overrides)
  cells = [(kind, T, TABLE1_TAU_OMEGA[kind])
           for kind in ProtocolKind for T in TABLE1_TEMPERATURES]
  cell_rows = run_cells(config, cells, threads)
  rows = table1_rows(cell_rows)
  data = {'columns': {}, 'config_hash': config.content_hash()}
  for quantity, kind, T, value, published, delta in rows:
    key = "%s@T=%g" % (kind, T)
    data['columns'].setdefault(key, {})[quantity] = {
      'value': value, 'published': published, 'delta': delta}
  for cell in cell_rows:
    if cell[-1]:
      data['columns']["%s@T=%g" % (cell[0], cell[1])]['reason'] = cell[-1]
  directory = out_dir or config.output_directory
  os.makedirs(directory, exist_ok=True)
  paths = store_artifacts([
    {'name': 'table1', 'header': list(TABLE1_HEADER), 'rows': rows},
    {'name': 'table1', 'data': data}], directory, ['csv', 'json'], plugin_dir)
  return rows, paths


def lz_demo(delta=0.05, tau=1.0, cd=True):
  """
  One Landau-Zener sweep g: -1 -> 1.

  :return: dict summary
  """
  spec = lz.LZSpec(Delta=delta, tau=tau, with_cd=cd)
  result = lz.lz_run(spec)
  return {'Delta': delta, 'tau': tau, 'cd': cd,
          'final_fidelity': result.final_fidelity,
          'min_fidelity': result.min_fidelity,
          'sigma_x_initial': result.sigma_x_initial,
          'sigma_x_final': result.sigma_x_final}


def validate(config=None, n_levels=15, decomposition_trials=100):
  """
  Numerical checks without writing artifacts: continuum benchmark of the
  spin spectrum, the friction-term decomposition and sphere-grid
  refinement of the Wehrl entropy and Pi on the initial state.

  :return: dict report with a 'passed' flag
  """
  config = config or RunConfig.defaults()
  scenario = Scenario(config)
  checks = {}

  levels = model.benchmark_discretization(scenario.basis, scenario.system,
                                          scenario.protocol, 0.0,
                                          n_levels=n_levels)
  worst = max(level.rel_err for level in levels)
  checks['discretization'] = {
    'levels': [level._asdict() for level in levels],
    'max_rel_err': worst, 'passed': worst < 0.01}
  checks['omega'] = {'value': scenario.omega,
                     'passed': 2.25 <= scenario.omega <= 2.35}

  error = phasespace.verify_decomposition(32, decomposition_trials)
  checks['decomposition'] = {'max_abs_error': error, 'passed': error < 1e-10}

  rho = scenario.initial_state()
  N = scenario.basis.N
  coarse = phasespace.sphere_grid(N)
  fine = phasespace.sphere_grid(N, 2 * coarse.n_theta, 2 * coarse.n_phi)
  r1 = phasespace.entropy_rates(rho, coarse, scenario.basis, scenario.env)
  r2 = phasespace.entropy_rates(rho, fine, scenario.basis, scenario.env)
  d_wehrl = abs(r1.wehrl - r2.wehrl)
  d_pi = abs(r1.pi - r2.pi) / max(abs(r2.pi), 1e-300)
  checks['grid_refinement'] = {
    'wehrl': r1.wehrl, 'wehrl_change': d_wehrl, 'pi': r1.pi,
    'pi_rel_change': d_pi, 'passed': d_wehrl < 1e-6 and d_pi < 5e-3}

  tau_dec = metrics.decoherence_time(scenario.env, scenario.system)
  checks['decoherence_time'] = {'value': tau_dec,
                                'passed': 0.6 <= tau_dec <= 0.8}
  passed = all(c['passed'] for c in checks.values())
  for name, check in checks.items():
    wellgrade_log(logging.INFO if check['passed'] else logging.WARNING,
                  "validate %s: %s" % (name,
                                       'ok' if check['passed'] else 'FAILED'))
  return {'checks': checks, 'passed': passed, 'derived': scenario.derived()}

import json
import math
import os
import shutil
import sys
import tempfile
import unittest

import numpy as np
from click.testing import CliRunner

import wellgrade
import wellgrade_runner
import wellgrade_util
from qtransfer.exceptions import ConfigError, StepUnderflow
from qtransfer.model import ProtocolKind
from wellgrade_config import RunConfig


def config_path(name):
  return os.path.join(wellgrade_util.get_wellgrade_topdir(), 'tests', 'dev',
                      'configs', name)


class TestSweepHelpers(unittest.TestCase):

  def test_default_grid(self):
    grid = wellgrade_runner.default_tau_omega_grid()
    self.assertEqual(12, len(grid))
    self.assertAlmostEqual(0.1, grid[0])
    self.assertAlmostEqual(300.0, grid[-1])

  def test_worker_count(self):
    saved = os.environ.get('WELLGRADE_THREADS')
    try:
      os.environ['WELLGRADE_THREADS'] = '1'
      self.assertEqual(1, wellgrade_runner.worker_count(8))
      os.environ['WELLGRADE_THREADS'] = 'many'
      with self.assertRaises(ConfigError):
        wellgrade_runner.worker_count(8)
      del os.environ['WELLGRADE_THREADS']
      self.assertEqual(1, wellgrade_runner.worker_count(1))
    finally:
      if saved is None:
        os.environ.pop('WELLGRADE_THREADS', None)
      else:
        os.environ['WELLGRADE_THREADS'] = saved

  def test_cell_config(self):
    base = RunConfig.defaults().with_overrides(['protocol.amplitude=2'])
    same = wellgrade_runner.cell_config(base, ProtocolKind.QUANTUM1, 10.0,
                                        3.0)
    self.assertEqual(2, same.get('protocol.amplitude'))
    self.assertEqual(10.0, same.get('environment.T'))
    self.assertEqual(3.0, same.tau_omega)
    other = wellgrade_runner.cell_config(base, ProtocolKind.CLASSICAL1, 1.0,
                                         300.0)
    self.assertEqual(ProtocolKind.CLASSICAL1, other.kind)
    self.assertIsNone(other.get('protocol.amplitude'))

  def test_sweep_rejects_empty_lists(self):
    config = RunConfig.defaults()
    with self.assertRaises(ConfigError) as cm:
      wellgrade_runner.sweep(config, tau_omega_list=[1.0], temperatures=[])
    self.assertEqual('sweep.temperatures', cm.exception.field)
    with self.assertRaises(ConfigError) as cm:
      wellgrade_runner.sweep(config, tau_omega_list=[0.0, 1.0])
    self.assertEqual('sweep.tau_omega', cm.exception.field)


class TestRunCellFailures(unittest.TestCase):

  def setUp(self):
    super(TestRunCellFailures, self).setUp()
    self._execute = wellgrade_runner.execute

  def tearDown(self):
    wellgrade_runner.execute = self._execute
    super(TestRunCellFailures, self).tearDown()

  def _failing(self, error):
    def execute(config, run_id=None):
      raise error
    wellgrade_runner.execute = execute

  def _cell(self):
    return wellgrade_runner._run_cell(
      (RunConfig.defaults().snapshot(), 'quantum1', 1.0, 1.0))

  def test_linear_algebra_failure(self):
    self._failing(np.linalg.LinAlgError("eigh did not converge"))
    row = self._cell()
    self.assertEqual(('quantum1', 1.0, 1.0), row[:3])
    self.assertTrue(math.isnan(row[9]))
    self.assertTrue(row[10].startswith('LinAlgError'))

  def test_simulation_error(self):
    self._failing(StepUnderflow("step 1e-13 below min_step"))
    row = self._cell()
    self.assertTrue(all(math.isnan(v) for v in row[3:10]))
    self.assertEqual('StepUnderflow: step 1e-13 below min_step', row[10])

  def test_inline_pool_keeps_going(self):
    self._failing(ValueError("bad cell"))
    rows = wellgrade_runner.run_cells(
      RunConfig.defaults(), [(ProtocolKind.QUANTUM1, 1.0, 1.0),
                             (ProtocolKind.CLASSICAL1, 1.0, 2.0)], threads=1)
    self.assertEqual(2, len(rows))
    self.assertEqual(['ValueError: bad cell'] * 2, [r[10] for r in rows])


class TestTable1Rows(unittest.TestCase):
  def runTest(self):
    cells = [('quantum1', 1.0, 10.0, 2.0, 0.1, 0.99, 0.9, 0.9, 0.9, 0.73, ''),
             ('quantum1', 5.0, 10.0, 2.0, 0.1, 0.99, 0.9, 0.9, 0.9, 0.73, '')]
    rows = wellgrade_runner.table1_rows(cells)
    self.assertEqual(len(wellgrade_runner.TABLE1_QUANTITIES) * 2, len(rows))
    by_key = dict(((q, T), (value, published, delta))
                  for q, _, T, value, published, delta in rows)
    self.assertEqual((10.0, 10.0, 0.0), by_key[('tau_omega', 1.0)])
    value, published, delta = by_key[('G', 1.0)]
    self.assertAlmostEqual(0.76, published)
    self.assertAlmostEqual(-0.03, delta)
    value, published, delta = by_key[('G', 5.0)]
    self.assertTrue(math.isnan(published))
    self.assertTrue(math.isnan(delta))


class TestLzDemo(unittest.TestCase):
  def runTest(self):
    summary = wellgrade_runner.lz_demo(0.05, 1.0, True)
    self.assertTrue(summary['cd'])
    self.assertGreaterEqual(summary['min_fidelity'], 0.999)


class TestRunScenario(unittest.TestCase):

  @classmethod
  def setUpClass(cls):
    cls.config = RunConfig.from_file(config_path('quick.yml'))
    cls.dirs = [tempfile.mkdtemp(prefix='wellgrade-run-') for _ in range(2)]
    cls.results = [wellgrade_runner.run_scenario(cls.config, d)
                   for d in cls.dirs]

  @classmethod
  def tearDownClass(cls):
    for d in cls.dirs:
      shutil.rmtree(d, ignore_errors=True)

  def test_artifacts(self):
    report, paths = self.results[0]
    names = sorted(os.path.basename(p) for p in paths)
    self.assertEqual(['grading.json', 'manifest.json', 'position_density.csv',
                      'trajectory.csv'],
                     names)
    self.assertGreaterEqual(report.G, 0.0)
    self.assertLessEqual(report.G, 1.0)
    self.assertEqual(0.0, report.sigma_ir)
    with open(os.path.join(self.dirs[0], 'grading.json')) as fp:
      grading = json.load(fp)
    self.assertEqual('quantum1', grading['protocol'])
    self.assertAlmostEqual(report.G, grading['G'])
    self.assertIn('omega', grading['derived'])

  def test_manifest(self):
    with open(os.path.join(self.dirs[0], 'manifest.json')) as fp:
      manifest = json.load(fp)
    self.assertEqual(self.config.content_hash(), manifest['config_hash'])
    self.assertEqual(40, manifest['config']['basis']['N'])
    for name in ('trajectory.csv', 'grading.json', 'position_density.csv'):
      self.assertEqual(
        wellgrade_util.sha256_file(os.path.join(self.dirs[0], name)),
        manifest['files'][name])

  def test_reproducible(self):
    for name in ('trajectory.csv', 'grading.json', 'position_density.csv'):
      with open(os.path.join(self.dirs[0], name), 'rb') as a, \
          open(os.path.join(self.dirs[1], name), 'rb') as b:
        self.assertEqual(a.read(), b.read())

  def test_trajectory_header(self):
    with open(os.path.join(self.dirs[0], 'trajectory.csv')) as fp:
      self.assertEqual('# wellgrade trajectory v1', fp.readline().strip())
      header = fp.readline().strip().split(',')
    self.assertEqual('t', header[0])
    self.assertIn('thermal_energy', header)
    self.assertIn('level_0', header)

  def test_position_density(self):
    with open(os.path.join(self.dirs[0], 'position_density.csv')) as fp:
      lines = fp.read().splitlines()
    self.assertEqual('# wellgrade position_density v1', lines[0])
    self.assertEqual('t,x,probability', lines[1])
    rows = [[float(v) for v in line.split(',')] for line in lines[2:]]
    # one block of N points per snapshot, starting at t = 0
    self.assertEqual(0, len(rows) % 40)
    self.assertEqual(0.0, rows[0][0])
    self.assertAlmostEqual(1.0, sum(r[2] for r in rows[:40]), places=6)


class TestCommandLine(unittest.TestCase):

  def setUp(self):
    super(TestCommandLine, self).setUp()
    self._runner = CliRunner()

  def test_missing_required_key(self):
    result = self._runner.invoke(wellgrade.wellgrade, [
      'simulate', '--config', config_path('missing_c2.yml')])
    self.assertEqual(wellgrade.EXIT_CONFIG, result.exit_code)

  def test_bad_override(self):
    result = self._runner.invoke(wellgrade.wellgrade, [
      'validate', '-o', 'environment.T=-1'])
    self.assertEqual(wellgrade.EXIT_CONFIG, result.exit_code)

  def test_empty_sweep(self):
    result = self._runner.invoke(wellgrade.wellgrade, [
      'sweep', '--temps', '', '--tau-omega', '1'])
    self.assertEqual(wellgrade.EXIT_CONFIG, result.exit_code)
    result = self._runner.invoke(wellgrade.wellgrade, [
      'sweep', '--tau-omega', '1,x'])
    self.assertEqual(wellgrade.EXIT_CONFIG, result.exit_code)

  def test_lz_demo(self):
    result = self._runner.invoke(wellgrade.wellgrade, ['lz-demo'])
    self.assertEqual(wellgrade.EXIT_OK, result.exit_code)
    self.assertIn('min_fidelity', result.output)
    result = self._runner.invoke(wellgrade.wellgrade,
                                 ['lz-demo', '--delta', '0'])
    self.assertEqual(wellgrade.EXIT_CONFIG, result.exit_code)


if __name__ == '__main__':
  sys.exit(unittest.main())

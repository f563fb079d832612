import math
import sys
import unittest

import numpy as np

from qtransfer import metrics
from qtransfer.dynamics import COLUMNS, EnvironmentSpec, TrajectoryRecord
from qtransfer.exceptions import (DegenerateEndpoints, MetricsError,
                                  NegativeEigenvalue)
from qtransfer.model import SystemSpec
from qtransfer.operators import (maximally_mixed, pure_state,
                                 random_density_matrix)
from qtransfer.spinbasis import build_basis
from wellgrade_runner import PUBLISHED_TABLE1

PSI0 = np.array([1.0, 0.0])
PLUS = np.array([1.0, 1.0]) / math.sqrt(2.0)


def synthetic_record(env, pi=float('nan'), hs_integral=2.0):
  record = TrajectoryRecord(2.0, env=env)
  for t in (0.0, 1.0, 2.0):
    values = dict((c, 0.0) for c in COLUMNS)
    values.update(t=t, pi=pi, sys_energy=1.0, sys_energy_var=0.25,
                  transfer_pct=0.5 * t)
    record.add(values)
  record.initial_state = pure_state(PSI0)
  record.final_state = pure_state(PLUS)
  record.norm_integrals = {'op': 1.0, 'hs': hs_integral, 'tr': 3.0}
  return record


class TestFidelity(unittest.TestCase):

  def test_pure_states(self):
    self.assertAlmostEqual(1.0, metrics.fidelity(pure_state(PLUS),
                                                 pure_state(PLUS)))
    self.assertAlmostEqual(0.0, metrics.fidelity(pure_state([1, 0]),
                                                 pure_state([0, 1])))
    self.assertAlmostEqual(0.5, metrics.fidelity(pure_state(PSI0),
                                                 pure_state(PLUS)))

  def test_mixed_states(self):
    rng = np.random.default_rng(21)
    rho = random_density_matrix(rng, 5)
    sigma = random_density_matrix(rng, 5)
    self.assertAlmostEqual(metrics.fidelity(rho, sigma),
                           metrics.fidelity(sigma, rho), places=8)
    self.assertAlmostEqual(1.0, metrics.fidelity(rho, rho), places=8)
    psi = np.ones(5) / math.sqrt(5.0)
    self.assertAlmostEqual(float(np.real(np.vdot(psi, rho @ psi))),
                           metrics.fidelity(rho, pure_state(psi)), places=8)
    self.assertAlmostEqual(1.0, metrics.fidelity(maximally_mixed(5),
                                                 maximally_mixed(5)))

  def test_errors(self):
    with self.assertRaises(NegativeEigenvalue):
      metrics.fidelity(np.diag([1.1, -0.1]), maximally_mixed(2))
    with self.assertRaises(MetricsError):
      metrics.fidelity(maximally_mixed(2), maximally_mixed(3))

  def test_bures_angle(self):
    self.assertAlmostEqual(math.pi / 2, metrics.bures_angle(
      pure_state([1, 0]), pure_state([0, 1])))
    self.assertAlmostEqual(math.pi / 4, metrics.bures_angle(
      pure_state(PSI0), pure_state(PLUS)))


class TestPositionMeasures(unittest.TestCase):

  def setUp(self):
    super(TestPositionMeasures, self).setUp()
    self.basis = build_basis(16, 16)

  def test_parity_complement(self):
    rho = random_density_matrix(np.random.default_rng(2), 16)
    reflected = metrics.parity_reflect(rho, self.basis)
    total = metrics.transfer_percentage(rho, self.basis) + \
      metrics.transfer_percentage(reflected, self.basis)
    self.assertAlmostEqual(1.0, total, places=10)

  def test_coherence_of_position_eigenstate(self):
    psi = self.basis.x_eigvecs[:, 3]
    self.assertAlmostEqual(0.0, metrics.coherence_l1(pure_state(psi),
                                                     self.basis), places=10)
    self.assertGreater(metrics.coherence_l1(pure_state(self.basis.vacuum()),
                                            self.basis), 1.0)


class TestDecoherenceTime(unittest.TestCase):
  def runTest(self):
    system = SystemSpec(-1.5, 0.05)
    omega = 2.3
    env = EnvironmentSpec(0.01 * omega, 0.001 * omega, 1.0)
    tau_d = metrics.decoherence_time(env, system)
    self.assertGreater(tau_d, 0.6)
    self.assertLess(tau_d, 0.8)
    self.assertEqual(math.inf, metrics.decoherence_time(
      EnvironmentSpec(0.0, 0.001, 1.0), system))


class TestSpeedGrade(unittest.TestCase):

  def test_values(self):
    self.assertAlmostEqual(1.0, metrics.speed_grade(2.0, 2.0))
    self.assertAlmostEqual(0.9, metrics.speed_grade(20.0, 2.0))
    self.assertEqual(1.0, metrics.speed_grade(2.0, math.inf))
    self.assertEqual(0.0, metrics.speed_grade(2.0, 0.0))
    self.assertEqual(0.0, metrics.speed_grade(1e12, 1.0))
    self.assertEqual(1.0, metrics.speed_grade(1.0, 10.0))

  def test_published_rows_are_consistent(self):
    # gS from tau*omega and the printed hs ratio, gT from the printed Sigma
    for (kind, T), row in sorted(PUBLISHED_TABLE1.items()):
      tau = row['tau_omega'] / 2.3
      g_s = metrics.speed_grade(tau, 1.0 / row['hs_ratio'])
      self.assertAlmostEqual(row['g_s'], g_s, delta=0.01,
                             msg="%s T=%g" % (kind, T))
      self.assertAlmostEqual(row['g_t'], math.exp(-row['sigma_ir']),
                             delta=0.01, msg="%s T=%g" % (kind, T))


class TestClosedBounds(unittest.TestCase):
  def runTest(self):
    self.assertEqual((0.0, 0.0), metrics.closed_bounds(0.0, 1.0, 1.0))
    mt, ml = metrics.closed_bounds(math.pi / 2, 0.5, 1.0)
    self.assertAlmostEqual(math.pi, mt)
    self.assertAlmostEqual(math.pi / 2, ml)
    self.assertEqual((math.inf, math.inf),
                     metrics.closed_bounds(1.0, 0.0, 0.0))


class TestQslReport(unittest.TestCase):

  def test_values(self):
    record = synthetic_record(EnvironmentSpec(0.0, 0.0, 1.0))
    report = metrics.qsl_report(record)
    self.assertAlmostEqual(math.pi / 4, report.bures_angle)
    self.assertAlmostEqual(0.5, report.sin2)
    self.assertAlmostEqual(1.0, report.hs_norm_avg)
    self.assertAlmostEqual(0.5, report.op_norm_avg)
    self.assertAlmostEqual(1.5, report.tr_norm_avg)
    self.assertAlmostEqual(0.5, report.tau_qsl)
    self.assertAlmostEqual(2.0, report.hs_ratio)
    self.assertEqual((), report.flags)
    self.assertAlmostEqual(0.5, metrics.tau_qsl(record))

  def test_degenerate_endpoints(self):
    record = synthetic_record(EnvironmentSpec(0.0, 0.0, 1.0))
    record.final_state = record.initial_state.copy()
    report = metrics.qsl_report(record)
    self.assertIn('degenerate_endpoints', report.flags)
    self.assertEqual(0.0, report.tau_qsl)
    with self.assertRaises(DegenerateEndpoints):
      metrics.tau_qsl(record)

  def test_frozen_generator(self):
    record = synthetic_record(EnvironmentSpec(0.0, 0.0, 1.0), hs_integral=0.0)
    record.norm_integrals = {'op': 0.0, 'hs': 0.0, 'tr': 0.0}
    report = metrics.qsl_report(record)
    self.assertIn('frozen_generator', report.flags)
    self.assertEqual(math.inf, report.tau_qsl)


class TestGrade(unittest.TestCase):

  def test_closed_run(self):
    record = synthetic_record(EnvironmentSpec(0.0, 0.0, 1.0))
    report = metrics.grade(record, pure_state(PLUS))
    self.assertEqual(0.0, report.sigma_ir)
    self.assertAlmostEqual(1.0, report.g_t)
    self.assertAlmostEqual(1.0, report.g_q)
    self.assertAlmostEqual(1.0 - 0.1 * math.log10(4.0), report.g_s)
    self.assertAlmostEqual(report.g_s * report.g_q * report.g_t, report.G)
    self.assertAlmostEqual(1.0, report.transfer_pct)
    self.assertAlmostEqual(0.5, report.diagnostics['energy_spread_avg'])
    data = report.to_dict()
    self.assertEqual(report.G, data['G'])
    self.assertIn('mt_bound', data['diagnostics'])

  def test_open_run_with_production(self):
    record = synthetic_record(EnvironmentSpec(0.1, 0.0, 1.0), pi=0.25)
    report = metrics.grade(record, pure_state(PSI0))
    self.assertAlmostEqual(0.5, report.sigma_ir)
    self.assertAlmostEqual(math.exp(-0.5), report.g_t)
    self.assertAlmostEqual(0.5, report.g_q)

  def test_open_run_without_production(self):
    record = synthetic_record(EnvironmentSpec(0.1, 0.0, 1.0))
    with self.assertRaises(MetricsError):
      metrics.grade(record, pure_state(PLUS))


if __name__ == '__main__':
  sys.exit(unittest.main())

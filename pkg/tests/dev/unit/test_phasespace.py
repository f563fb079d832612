import math
import sys
import unittest

import numpy as np

from qtransfer import phasespace
from qtransfer.dynamics import COLUMNS, EnvironmentSpec, TrajectoryRecord
from qtransfer.exceptions import MetricsError, NonMonotoneTime
from qtransfer.operators import maximally_mixed, random_density_matrix
from qtransfer.spinbasis import build_basis


class TestSphereGrid(unittest.TestCase):

  def test_weights(self):
    grid = phasespace.sphere_grid(6)
    self.assertEqual(12, grid.n_theta)
    self.assertEqual(25, grid.n_phi)
    self.assertEqual(12 * 25, grid.size)
    self.assertAlmostEqual(4.0 * math.pi, float(np.sum(grid.weights)))
    # int cos^2 theta dOmega = 4 pi / 3
    self.assertAlmostEqual(4.0 * math.pi / 3.0,
                           grid.integrate(np.cos(grid.theta) ** 2))

  def test_too_coarse(self):
    with self.assertRaises(MetricsError):
      phasespace.sphere_grid(6, n_theta=1)
    with self.assertRaises(MetricsError):
      phasespace.sphere_grid(6, n_phi=2)


class TestHusimi(unittest.TestCase):

  @classmethod
  def setUpClass(cls):
    cls.basis = build_basis(8, 8)
    cls.grid = phasespace.sphere_grid(8)
    cls.coherent = phasespace.coherent_states(cls.basis, cls.grid)

  def test_coherent_states_normalized(self):
    norms = np.linalg.norm(self.coherent, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)

  def test_normalization(self):
    rng = np.random.default_rng(4)
    for _ in range(5):
      rho = random_density_matrix(rng, 8)
      field = phasespace.husimi_field(rho, self.grid, self.basis,
                                      self.coherent)
      self.assertAlmostEqual(1.0, field.normalization(), delta=1e-8)

  def test_wehrl_of_maximally_mixed(self):
    field = phasespace.husimi_field(maximally_mixed(8), self.grid, self.basis,
                                    self.coherent)
    self.assertAlmostEqual(math.log(8), phasespace.wehrl_entropy(field),
                           delta=1e-6)

  def test_wehrl_bounds_von_neumann(self):
    rng = np.random.default_rng(9)
    for rank in (1, 3, 8):
      rho = random_density_matrix(rng, 8, rank)
      field = phasespace.husimi_field(rho, self.grid, self.basis,
                                      self.coherent)
      self.assertGreaterEqual(phasespace.wehrl_entropy(field),
                              phasespace.von_neumann_entropy(rho))


class TestEntropyRates(unittest.TestCase):

  @classmethod
  def setUpClass(cls):
    cls.basis = build_basis(8, 8)
    cls.grid = phasespace.sphere_grid(8)

  def test_production_nonnegative(self):
    env = EnvironmentSpec(0.02, 0.002, 1.0)
    rng = np.random.default_rng(12)
    for _ in range(3):
      rho = random_density_matrix(rng, 8)
      rates = phasespace.entropy_rates(rho, self.grid, self.basis, env)
      self.assertGreaterEqual(rates.pi, 0.0)
      self.assertAlmostEqual(rates.pi - rates.dissipative_rate, rates.phi)
      self.assertEqual(0, rates.clamped_nodes)

  def test_closed_environment(self):
    env = EnvironmentSpec(0.0, 0.0, 1.0)
    rho = random_density_matrix(np.random.default_rng(0), 8)
    rates = phasespace.entropy_rates(rho, self.grid, self.basis, env)
    self.assertEqual(0.0, rates.pi)
    self.assertAlmostEqual(0.0, rates.dissipative_rate)

  def test_rates_scale_with_coupling(self):
    rho = random_density_matrix(np.random.default_rng(1), 8)
    weak = phasespace.entropy_rates(rho, self.grid, self.basis,
                                    EnvironmentSpec(0.0, 0.001, 1.0))
    strong = phasespace.entropy_rates(rho, self.grid, self.basis,
                                      EnvironmentSpec(0.0, 0.002, 1.0))
    self.assertAlmostEqual(2.0 * weak.pi, strong.pi)


class TestSigmaAccumulation(unittest.TestCase):

  def test_trapezoid(self):
    self.assertAlmostEqual(2.0, phasespace.accumulate_sigma([0, 1, 2],
                                                            [0, 1, 2]))

  def test_non_monotone(self):
    with self.assertRaises(NonMonotoneTime):
      phasespace.accumulate_sigma([0.0, 1.0, 1.0], [1.0, 1.0, 1.0])
    with self.assertRaises(NonMonotoneTime):
      phasespace.accumulate_sigma([0.0], [1.0])

  def test_ledger(self):
    record = TrajectoryRecord(2.0)
    for t in (0.0, 1.0, 2.0):
      values = dict((c, 0.0) for c in COLUMNS)
      values.update(t=t, pi=1.0, wehrl=t, phi=0.5)
      record.add(values)
    ledger = phasespace.entropy_ledger(record)
    np.testing.assert_allclose(ledger.sigma_cumulative, [0.0, 1.0, 2.0])
    self.assertAlmostEqual(2.0, ledger.sigma_ir)
    self.assertTrue(np.all(np.diff(ledger.sigma_cumulative) >= 0.0))


class TestDecomposition(unittest.TestCase):

  def test_identity_holds(self):
    self.assertLess(phasespace.verify_decomposition(32, 100), 1e-10)

  def test_truncation_too_small(self):
    with self.assertRaises(MetricsError):
      phasespace.verify_decomposition(4)


if __name__ == '__main__':
  sys.exit(unittest.main())

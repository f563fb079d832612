"""
Spin coherent-state phase space: Husimi Q function, Wehrl entropy and the
split of the dissipative Wehrl rate into production Pi and flux Phi.

Coherent states |Omega> = exp(-i phi Jz) exp(-i theta Jy) |j, j> are built
from one eigendecomposition of Jy per basis.
"""

import collections
import math

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from qtransfer.exceptions import MetricsError, NonMonotoneTime
from qtransfer.operators import (commutator, anticommutator, hermitize,
                                 random_density_matrix)

Q_FLOOR = 1e-14

EntropyRates = collections.namedtuple(
  'EntropyRates', ['pi', 'phi', 'dissipative_rate', 'wehrl', 'clamped_nodes'])

EntropyLedger = collections.namedtuple(
  'EntropyLedger', ['t', 'wehrl', 'pi', 'phi', 'sigma_cumulative',
                    'sigma_ir'])


class SphereGrid(object):
  """
  Gauss-Legendre nodes in cos(theta) times uniform phi. ``weights`` include
  the sin(theta) measure and sum to 4 pi.
  """

  def __init__(self, n_theta, n_phi):
    x, w = np.polynomial.legendre.leggauss(n_theta)
    self.n_theta = n_theta
    self.n_phi = n_phi
    self.theta_nodes = np.arccos(x)
    self.theta_weights = w
    self.phi_nodes = 2.0 * np.pi * np.arange(n_phi) / n_phi
    # node k = i_theta * n_phi + i_phi
    self.theta = np.repeat(self.theta_nodes, n_phi)
    self.phi = np.tile(self.phi_nodes, n_theta)
    self.weights = np.repeat(w, n_phi) * (2.0 * np.pi / n_phi)

  @property
  def size(self):
    return self.n_theta * self.n_phi

  def integrate(self, values):
    return float(np.dot(self.weights, values))

  def __repr__(self):
    return "SphereGrid(n_theta=%d, n_phi=%d)" % (self.n_theta, self.n_phi)


def sphere_grid(N, n_theta=None, n_phi=None):
  """
  :param N: spin dimension, sets the defaults 2N and 4N+1
  """
  n_theta = 2 * N if n_theta is None else n_theta
  n_phi = 4 * N + 1 if n_phi is None else n_phi
  if n_theta < 2 or n_phi < 3:
    raise MetricsError("sphere grid needs n_theta >= 2 and n_phi >= 3")
  return SphereGrid(int(n_theta), int(n_phi))


def coherent_states(basis, grid):
  """
  Rows are the coherent-state vectors |Omega> on every grid node.
  """
  hbar = basis.hbar
  lam, V = np.linalg.eigh(hermitize(basis.J_y) / hbar)
  top = V.conj().T @ basis.vacuum()
  rotated = (np.exp(-1j * np.outer(grid.theta_nodes, lam)) * top) @ V.T
  m = np.real(np.diag(basis.J_z)) / hbar
  phases = np.exp(-1j * np.outer(grid.phi_nodes, m))
  states = rotated[:, np.newaxis, :] * phases[np.newaxis, :, :]
  return states.reshape(grid.size, basis.N)


def _expect(coherent, op):
  """<Omega|op|Omega> on every node."""
  return np.sum((coherent.conj() @ op) * coherent, axis=1)


class HusimiField(object):

  def __init__(self, grid, values, N):
    self.grid = grid
    self.N = N
    self.values = values

  def normalization(self):
    return self.N / (4.0 * math.pi) * self.grid.integrate(self.values)


def husimi_field(rho, grid, basis, coherent=None):
  if coherent is None:
    coherent = coherent_states(basis, grid)
  q = np.real(_expect(coherent, rho))
  return HusimiField(grid, np.clip(q, 0.0, None), basis.N)


def wehrl_entropy(field):
  """-(N/4 pi) int Q ln Q with 0 ln 0 = 0."""
  q = field.values
  safe = np.where(q > 0.0, q, 1.0)
  return -field.N / (4.0 * math.pi) * field.grid.integrate(q * np.log(safe))


def von_neumann_entropy(rho):
  p = np.linalg.eigvalsh(hermitize(rho))
  p = p[p > 1e-15]
  return float(-np.sum(p * np.log(p)))


def entropy_rates(rho, grid, basis, env, coherent=None,
                  rho_dot_dissipative=None, q_floor=Q_FLOOR):
  """
  Entropy production rate Pi from the phase-space currents
  J_O = <Omega|[O, rho]|Omega> and the flux Phi = Pi - dS_D/dt.

  :param env: bath with gamma, Lambda, gamma_x, gamma_p, hbar and a
    ``dissipator(rho, x, p)`` method
  :param rho_dot_dissipative: the dissipative part of drho/dt if already
    computed
  :return: EntropyRates
  """
  if coherent is None:
    coherent = coherent_states(basis, grid)
  x = basis.x_op
  p = basis.p_op
  scale = basis.N / (4.0 * math.pi)

  q = np.real(_expect(coherent, rho))
  q_pos = np.clip(q, 0.0, None)
  clamped = int(np.count_nonzero(q < q_floor))
  q_safe = np.maximum(q, q_floor)

  wehrl = -scale * grid.integrate(
    q_pos * np.log(np.where(q_pos > 0.0, q_pos, 1.0)))

  pi = 0.0
  x_coeff = env.gamma / (2.0 * env.hbar) + env.gamma_x + env.Lambda
  if x_coeff:
    jx = _expect(coherent, commutator(x, rho))
    pi += x_coeff * scale * grid.integrate(np.abs(jx) ** 2 / q_safe)
  if env.gamma_p:
    jp = _expect(coherent, commutator(p, rho))
    pi += env.gamma_p * scale * grid.integrate(np.abs(jp) ** 2 / q_safe)

  if rho_dot_dissipative is None:
    rho_dot_dissipative = env.dissipator(rho, x, p)
  q_dot = np.real(_expect(coherent, rho_dot_dissipative))
  ds_dt = -scale * grid.integrate((1.0 + np.log(q_safe)) * q_dot)
  return EntropyRates(float(pi), float(pi - ds_dt), float(ds_dt),
                      float(wehrl), clamped)


def _check_times(times):
  times = np.asarray(times, dtype=float)
  if len(times) < 2:
    raise NonMonotoneTime("need at least two samples, got %d" % len(times))
  if np.any(np.diff(times) <= 0.0):
    raise NonMonotoneTime("sample times are not strictly increasing")
  return times


def accumulate_sigma(times, pi):
  """Sigma_ir = int Pi dt by the trapezoid rule over the samples."""
  times = _check_times(times)
  return float(trapezoid(np.asarray(pi, dtype=float), times))


def entropy_ledger(trajectory):
  """
  Wehrl entropy, Pi, Phi and the running Sigma_ir(t) of a trajectory.
  """
  times = _check_times(trajectory.column('t'))
  pi = trajectory.column('pi')
  if np.any(np.isnan(pi)):
    raise MetricsError("trajectory has no phase-space observables")
  cumulative = cumulative_trapezoid(pi, times, initial=0.0)
  return EntropyLedger(times, trajectory.column('wehrl'), pi,
                       trajectory.column('phi'), cumulative,
                       float(cumulative[-1]))


def fock_operators(dim):
  """Truncated Fock a, x = (a + a^dagger)/sqrt2, p = -i(a - a^dagger)/sqrt2."""
  a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
  ad = a.conj().T
  return a, (a + ad) / math.sqrt(2.0), -1j * (a - ad) / math.sqrt(2.0)


def decomposition_sides(rho, a, x, p, gamma=1.0, hbar=1.0):
  """
  Both sides of
    -(i gamma/2hbar)[x,{p,rho}]
      = -(gamma/2hbar)[x,[x,rho]] - (gamma/sqrt2 hbar)[x, rho a - a^dagger rho]
  """
  lhs = -(1j * gamma / (2.0 * hbar)) * commutator(x, anticommutator(p, rho))
  rhs = (-(gamma / (2.0 * hbar)) * commutator(x, commutator(x, rho))
         - (gamma / (math.sqrt(2.0) * hbar)) *
         commutator(x, rho @ a - a.conj().T @ rho))
  return lhs, rhs


def verify_decomposition(dim=32, trials=100, seed=0, interior=None):
  """
  Largest entrywise deviation between the friction term and its
  production/flux split for random states on the interior levels.

  :param interior: number of populated low levels, default 3/4 of ``dim``
  """
  if dim < 8:
    raise MetricsError("Fock truncation must be >= 8, got %d" % dim)
  interior = interior or dim - dim // 4
  rng = np.random.default_rng(seed)
  a, x, p = fock_operators(dim)
  worst = 0.0
  for _ in range(trials):
    rho = np.zeros((dim, dim), dtype=complex)
    rho[:interior, :interior] = random_density_matrix(rng, interior)
    lhs, rhs = decomposition_sides(rho, a, x, p)
    block = interior - 1
    worst = max(worst, float(np.max(np.abs(lhs - rhs)[:block, :block])))
  return worst

"""
Double-well model: control schedules, the time-dependent Hamiltonian, well
classification, initial/target states, thermal references and the
finite-difference benchmark of the spin discretisation.
"""

import collections
import logging
import math

import aenum
import numpy as np
from scipy.linalg import eigh_tridiagonal

from qtransfer.exceptions import (GridTooCoarse, ModelError, OutOfRange,
                                  WellClassificationFailed)
from qtransfer.operators import hermitize, pure_state
from wellgrade_util import wellgrade_log

WELL_THRESHOLD = 1.0
INITIAL_COEFFICIENTS = (0.6, 0.8)
DEFAULT_RAMP_FRACTION = 1.0 / 3.0
TIME_SLACK = 1e-12


class ProtocolKind(str, aenum.Enum):
  CLASSICAL1 = 'classical1'
  CLASSICAL2 = 'classical2'
  QUANTUM1 = 'quantum1'
  QUANTUM2 = 'quantum2'

  @property
  def is_quantum(self):
    return self in (ProtocolKind.QUANTUM1, ProtocolKind.QUANTUM2)

  @property
  def flattens(self):
    return self is ProtocolKind.CLASSICAL2

  @property
  def default_amplitude(self):
    """Maximal tilt A used when a classical config does not give one."""
    return {ProtocolKind.CLASSICAL1: 5.0,
            ProtocolKind.CLASSICAL2: 1.0}.get(self)


class WellLabel(str, aenum.Enum):
  LEFT = 'left'
  RIGHT = 'right'
  DELOCALIZED = 'delocalized'


class SystemSpec(object):
  """
  Quartic double well V(x) = c1 x^2 + c2 x^4 with mass m.
  """

  def __init__(self, c1, c2, m=1.0, omega=None):
    if not c1 < 0.0:
      raise ModelError("c1 must be negative, got %r" % (c1,))
    if not c2 > 0.0:
      raise ModelError("c2 must be positive, got %r" % (c2,))
    if not m > 0.0:
      raise ModelError("m must be positive, got %r" % (m,))
    if omega is not None and not omega > 0.0:
      raise ModelError("omega must be positive, got %r" % (omega,))
    self.c1 = float(c1)
    self.c2 = float(c2)
    self.m = float(m)
    self.omega = None if omega is None else float(omega)

  def with_omega(self, omega):
    return SystemSpec(self.c1, self.c2, self.m, omega)

  @property
  def well_minimum(self):
    """Position of the right minimum, sqrt(-c1 / 2 c2)."""
    return math.sqrt(-self.c1 / (2.0 * self.c2))

  @property
  def well_separation(self):
    return 2.0 * self.well_minimum

  @property
  def barrier_height(self):
    """Barrier top above the well bottoms, c1^2 / 4 c2."""
    return self.c1 ** 2 / (4.0 * self.c2)

  def potential(self, x):
    return self.c1 * x ** 2 + self.c2 * x ** 4

  def flatten_shape(self, x):
    """
    The central bump c1^2/4c2 + c1 x^2 + c2 x^4 restricted to x^2 <= -c1/2c2.
    """
    inside = (-self.c1 / (2.0 * self.c2) - x ** 2) >= 0.0
    return (self.barrier_height + self.potential(x)) * inside

  def __repr__(self):
    return "SystemSpec(c1=%g, c2=%g, m=%g, omega=%r)" % (
      self.c1, self.c2, self.m, self.omega)


class ProtocolSpec(object):
  """
  One transfer schedule. ``tau`` is the physical duration.
  """

  def __init__(self, kind, delta, tau, amplitude=None,
               ramp_fraction=DEFAULT_RAMP_FRACTION):
    kind = ProtocolKind(kind)
    if amplitude is None:
      amplitude = kind.default_amplitude
    if not delta > 0.0:
      raise OutOfRange("delta must be positive, got %r" % (delta,))
    if not tau > 0.0:
      raise OutOfRange("tau must be positive, got %r" % (tau,))
    if not kind.is_quantum and not amplitude > delta:
      raise OutOfRange("amplitude %r must exceed delta %r" %
                       (amplitude, delta))
    if not 0.0 < ramp_fraction <= 0.5:
      raise OutOfRange("ramp_fraction must be in (0, 1/2], got %r" %
                       (ramp_fraction,))
    self.kind = kind
    self.delta = float(delta)
    self.tau = float(tau)
    self.amplitude = None if amplitude is None else float(amplitude)
    self.ramp_fraction = float(ramp_fraction)

  def with_tau(self, tau):
    return ProtocolSpec(self.kind, self.delta, tau, self.amplitude,
                        self.ramp_fraction)

  @property
  def ramp_time(self):
    return self.ramp_fraction * self.tau

  def __repr__(self):
    return "ProtocolSpec(%s, delta=%g, tau=%g, amplitude=%r, ramp=%g)" % (
      self.kind.value, self.delta, self.tau, self.amplitude,
      self.ramp_fraction)


class EigenFrame(object):
  """
  Instantaneous eigenpairs of a Hamiltonian at time ``t``; columns of
  ``states`` follow ``energies``.
  """

  def __init__(self, t, energies, states, well_labels=None):
    self.t = t
    self.energies = energies
    self.states = states
    self.well_labels = well_labels

  @property
  def dim(self):
    return len(self.energies)

  def with_labels(self, labels):
    return EigenFrame(self.t, self.energies, self.states, tuple(labels))

  def with_states(self, energies, states):
    return EigenFrame(self.t, energies, states, self.well_labels)

  def residual(self, H):
    """max_i ||H|i> - E_i|i>||"""
    r = H @ self.states - self.states * self.energies
    return float(np.max(np.linalg.norm(r, axis=0)))

  def indices(self, label):
    return [i for i, l in enumerate(self.well_labels or ()) if l is label]


def _check_time(protocol, t):
  slack = TIME_SLACK * max(1.0, protocol.tau)
  if t < -slack or t > protocol.tau + slack:
    raise OutOfRange("t=%r outside [0, %r]" % (t, protocol.tau))
  return min(max(t, 0.0), protocol.tau)


def control_values(protocol, t):
  """
  Tilt alpha(t) and flattening weight beta(t) of ``protocol``.

  :param protocol: ProtocolSpec
  :param t: time in [0, tau]
  :return: (alpha, beta)
  """
  t = _check_time(protocol, t)
  d = protocol.delta
  kind = protocol.kind
  if kind is ProtocolKind.QUANTUM1:
    s = t / protocol.tau
    return -d + 6.0 * d * s ** 2 - 4.0 * d * s ** 3, 0.0
  if kind is ProtocolKind.QUANTUM2:
    s = t / protocol.tau
    return (-d + 30.0 * d * s ** 2 - 100.0 * d * s ** 3 + 120.0 * d * s ** 4
            - 48.0 * d * s ** 5), 0.0

  t1 = protocol.ramp_time
  if t <= t1:
    up = t / t1
  else:
    up = 1.0 - (t - t1) / (protocol.tau - t1)
  alpha = -d + (protocol.amplitude + d) * up
  beta = up if kind.flattens else 0.0
  return alpha, beta


def control_rates(protocol, t):
  """
  Analytic time derivatives (alpha_dot, beta_dot). On the classical knot the
  restoring slope is returned.
  """
  t = _check_time(protocol, t)
  d = protocol.delta
  tau = protocol.tau
  kind = protocol.kind
  if kind is ProtocolKind.QUANTUM1:
    s = t / tau
    return d * (12.0 * s - 12.0 * s ** 2) / tau, 0.0
  if kind is ProtocolKind.QUANTUM2:
    s = t / tau
    return d * (60.0 * s - 300.0 * s ** 2 + 480.0 * s ** 3
                - 240.0 * s ** 4) / tau, 0.0

  t1 = protocol.ramp_time
  if t < t1:
    rate = 1.0 / t1
  else:
    rate = -1.0 / (tau - t1)
  return (protocol.amplitude + d) * rate, (rate if kind.flattens else 0.0)


def potential_function(system, protocol, t):
  """
  Continuum potential V(x, t) including the control terms, as a vectorised
  callable.
  """
  alpha, beta = control_values(protocol, t)

  def potential(x):
    x = np.asarray(x, dtype=float)
    return system.potential(x) + alpha * x - beta * system.flatten_shape(x)
  return potential


class HamiltonianSchedule(object):
  """
  H0(t) = p'^2/2m + V(x') + alpha(t) x' - beta(t) F(x') with the static part
  and the flattening shape F built once.
  """

  def __init__(self, basis, system, protocol):
    self.basis = basis
    self.system = system
    self.protocol = protocol
    p = basis.p_op
    self._static = hermitize(p @ p / (2.0 * system.m) +
                             basis.function_of_x(system.potential))
    self._x = basis.x_op
    if protocol.kind.flattens:
      self._flatten = basis.function_of_x(system.flatten_shape)
    else:
      self._flatten = None

  @property
  def static_part(self):
    return self._static

  def hamiltonian(self, t):
    alpha, beta = control_values(self.protocol, t)
    h = self._static + alpha * self._x
    if self._flatten is not None and beta != 0.0:
      h = h - beta * self._flatten
    return h

  def h_dot(self, t):
    """dH0/dt from the analytic control rates."""
    alpha_dot, beta_dot = control_rates(self.protocol, t)
    h = alpha_dot * self._x
    if self._flatten is not None and beta_dot != 0.0:
      h = h - beta_dot * self._flatten
    return h


def build_hamiltonian(basis, system, protocol, t):
  return HamiltonianSchedule(basis, system, protocol).hamiltonian(t)


def instantaneous_frame(H, t=0.0):
  energies, states = np.linalg.eigh(hermitize(H))
  return EigenFrame(t, energies, states)


def classify_wells(frame, basis, x_thresh=WELL_THRESHOLD):
  """
  Label each eigenstate Right / Left / Delocalized by the sign and size of
  its <x'>.
  """
  x = basis.x_op
  mean_x = np.real(np.einsum('ki,kl,li->i', frame.states.conj(), x,
                             frame.states))
  labels = []
  for value in mean_x:
    if value > x_thresh:
      labels.append(WellLabel.RIGHT)
    elif value < -x_thresh:
      labels.append(WellLabel.LEFT)
    else:
      labels.append(WellLabel.DELOCALIZED)
  return frame.with_labels(labels)


def _fix_phase(psi):
  k = int(np.argmax(np.abs(psi)))
  return psi * (abs(psi[k]) / psi[k])


WellStates = collections.namedtuple(
  'WellStates', ['right', 'left', 'right_energies', 'left_energies', 'frame'])


def well_states(basis, system, protocol, count=2, x_thresh=WELL_THRESHOLD):
  """
  The ``count`` lowest Right and Left eigenstates of H0(0) below the barrier
  top.

  Left states are phase-aligned with the parity image of their Right partner,
  <j_L|P|j_R> > 0, which is where adiabatic transport takes |j_R>.

  :return: WellStates
  """
  H = build_hamiltonian(basis, system, protocol, 0.0)
  frame = classify_wells(instantaneous_frame(H, 0.0), basis, x_thresh)
  barrier_top = float(potential_function(system, protocol, 0.0)(0.0))
  below = frame.energies < barrier_top
  right = [i for i in frame.indices(WellLabel.RIGHT) if below[i]][:count]
  left = [i for i in frame.indices(WellLabel.LEFT) if below[i]][:count]
  if len(right) < count:
    raise WellClassificationFailed(
      "found %d Right states below the barrier, need %d" % (len(right), count))
  if len(left) < count:
    raise WellClassificationFailed(
      "found %d Left states below the barrier, need %d" % (len(left), count))

  right_vecs = []
  left_vecs = []
  P = basis.parity
  for r, l in zip(right, left):
    psi_r = _fix_phase(frame.states[:, r])
    psi_l = frame.states[:, l]
    overlap = np.vdot(psi_l, P @ psi_r)
    if abs(overlap) > 1e-8:
      psi_l = psi_l * (overlap / abs(overlap))
    else:
      psi_l = _fix_phase(psi_l)
    right_vecs.append(psi_r)
    left_vecs.append(psi_l)
  wellgrade_log(logging.DEBUG, "Well states: right=%s left=%s" % (right, left))
  return WellStates(right_vecs, left_vecs, frame.energies[right],
                    frame.energies[left], frame)


def well_frequency(basis, system, protocol):
  """omega = (E1^R - E0^R)/hbar of the initial right well."""
  ws = well_states(basis, system, protocol)
  return float(ws.right_energies[1] - ws.right_energies[0]) / basis.hbar


def initial_vector(basis, system, protocol, coefficients=INITIAL_COEFFICIENTS):
  ws = well_states(basis, system, protocol, count=len(coefficients))
  psi = sum(c * v for c, v in zip(coefficients, ws.right))
  return psi / np.linalg.norm(psi)


def initial_state(basis, system, protocol, coefficients=INITIAL_COEFFICIENTS):
  """
  Pure state sum_j c_j |j>_R of the right-well eigenstates of H0(0).
  """
  return pure_state(initial_vector(basis, system, protocol, coefficients))


def target_state(basis, system, protocol, tau=None,
                 coefficients=INITIAL_COEFFICIENTS):
  """
  Pure state sum_j c_j exp(-i E_j^R tau / hbar) |j>_L, the initial
  information carried into the left well.

  :param tau: elapsed time for the phases; defaults to ``protocol.tau``
  """
  if tau is None:
    tau = protocol.tau
  ws = well_states(basis, system, protocol, count=len(coefficients))
  psi = sum(c * np.exp(-1j * e * tau / basis.hbar) * v
            for c, e, v in zip(coefficients, ws.right_energies, ws.left))
  return pure_state(psi / np.linalg.norm(psi))


def thermal_state(H, T):
  """
  Gibbs state exp(-H/T)/Z with k_B = 1.

  :param T: temperature, > 0
  """
  if not T > 0.0:
    raise OutOfRange("temperature must be positive, got %r" % (T,))
  w, v = np.linalg.eigh(hermitize(H))
  p = np.exp(-(w - w[0]) / T)
  p /= p.sum()
  return (v * p) @ v.conj().T


def thermal_energy(energies, T):
  """
  Mean energy of the Gibbs ensemble over the levels ``energies``.

  :param energies: eigenvalues, ascending
  """
  if not T > 0.0:
    raise OutOfRange("temperature must be positive, got %r" % (T,))
  energies = np.asarray(energies, dtype=float)
  p = np.exp(-(energies - energies[0]) / T)
  return float(np.dot(p, energies) / p.sum())


def mean_energy(H, rho):
  return float(np.real(np.trace(H @ rho)))


def position_density(rho, basis):
  """
  Probability of each eigenvalue of x'.

  :return: (x eigenvalues, probabilities)
  """
  U = basis.x_eigvecs
  probs = np.real(np.einsum('ki,kl,li->i', U.conj(), rho, U))
  return basis.x_eigvals.copy(), probs


def continuum_levels(potential, x_min, x_max, n_points, n_levels,
                     hbar=1.0, m=1.0):
  """
  Lowest ``n_levels`` eigenvalues of -hbar^2/2m d^2/dx^2 + V(x) by second
  order finite differences with Dirichlet walls at x_min and x_max.

  :param n_points: number of grid points including the two walls
  """
  x = np.linspace(x_min, x_max, n_points)
  h = x[1] - x[0]
  interior = x[1:-1]
  kinetic = hbar ** 2 / (2.0 * m * h ** 2)
  diag = 2.0 * kinetic + potential(interior)
  off = -kinetic * np.ones(len(interior) - 1)
  levels = eigh_tridiagonal(diag, off, eigvals_only=True, select='i',
                            select_range=(0, n_levels - 1))
  return levels, float(np.min(potential(x)))


LevelComparison = collections.namedtuple(
  'LevelComparison', ['level', 'e_discrete', 'e_continuum', 'rel_err'])


def benchmark_discretization(basis, system, protocol, t=0.0, x_min=-12.0,
                             x_max=12.0, n_points=4000, n_levels=15,
                             potential=None, refinement_levels=15,
                             refinement_tol=1e-3):
  """
  Compare the spin-basis spectrum with the finite-difference continuum.

  :param potential: optional V(x) overriding the model potential for both
    the discrete and the continuum Hamiltonian (no control terms)
  :return: list of LevelComparison, ascending
  """
  if n_levels > basis.N:
    raise ModelError("n_levels %d exceeds basis dimension %d" %
                     (n_levels, basis.N))
  if potential is None:
    potential = potential_function(system, protocol, t)
    H = build_hamiltonian(basis, system, protocol, t)
  else:
    p = basis.p_op
    H = p @ p / (2.0 * system.m) + basis.function_of_x(potential)
  discrete = np.linalg.eigvalsh(hermitize(H))[:n_levels]

  continuum, v_min = continuum_levels(potential, x_min, x_max, n_points,
                                      n_levels, basis.hbar, system.m)
  check = min(refinement_levels, n_levels)
  if check > 0:
    finer, _ = continuum_levels(potential, x_min, x_max, 2 * n_points, check,
                                basis.hbar, system.m)
    shift = np.abs(finer - continuum[:check]) / (continuum[:check] - v_min)
    if np.any(shift > refinement_tol):
      worst = int(np.argmax(shift))
      raise GridTooCoarse(
        "doubling the grid moves level %d by %.3g%% (n_points=%d)" %
        (worst, 100.0 * shift[worst], n_points))

  result = []
  for k in range(n_levels):
    rel = abs(discrete[k] - continuum[k]) / (continuum[k] - v_min)
    result.append(LevelComparison(k, float(discrete[k]), float(continuum[k]),
                                  float(rel)))
  return result

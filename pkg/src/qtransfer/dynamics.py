"""
Open-system propagation of the density matrix.

  drho/dt = -(i/hbar)[H, rho] - Lambda [x,[x,rho]]
            - (i gamma/2 hbar)[x,{p,rho}] - gamma_x [x,[x,rho]]
            - gamma_p [p,[p,rho]]

with H = H0(t), or H0(t) + H_STA(t) for counter-diabatic runs.
"""

import logging
import math

import numpy as np

from qtransfer import broadcast, metrics, phasespace
from qtransfer.exceptions import (IntegrationError, ModelError, PositivityLoss,
                                  StaError)
from qtransfer.integrator import METHODS, AdaptiveStepper
from qtransfer.model import (HamiltonianSchedule, instantaneous_frame,
                             position_density, thermal_energy)
from qtransfer.operators import (anticommutator, commutator, hermitian_norms,
                                 hermitize, hs_norm, purity)
from qtransfer.sta import counterdiabatic_term, crossing_times
from wellgrade_util import timed, wellgrade_log

TRACE_DRIFT_WARN = 1e-8
TRACE_RENORM = 1e-12
SPECTRUM_LEVELS = 6


class EnvironmentSpec(object):
  """
  Bath parameters. gamma_x = gamma m T / hbar^2 and gamma_p = gamma/(16 m T)
  with k_B = 1.
  """

  def __init__(self, gamma, Lambda, T, m=1.0, hbar=1.0):
    if gamma < 0.0 or Lambda < 0.0:
      raise ModelError("gamma and Lambda must be >= 0, got %r, %r" %
                       (gamma, Lambda))
    if not T > 0.0:
      raise ModelError("temperature must be positive, got %r" % (T,))
    self.gamma = float(gamma)
    self.Lambda = float(Lambda)
    self.T = float(T)
    self.m = float(m)
    self.hbar = float(hbar)

  @property
  def gamma_x(self):
    return self.gamma * self.m * self.T / self.hbar ** 2

  @property
  def gamma_p(self):
    return self.gamma / (16.0 * self.m * self.T)

  @property
  def is_closed(self):
    return self.gamma == 0.0 and self.Lambda == 0.0

  def dissipator(self, rho, x, p):
    """Localisation plus completely positive Caldeira-Leggett part."""
    if self.is_closed:
      return np.zeros_like(rho)
    xr = commutator(x, rho)
    out = -(self.Lambda + self.gamma_x) * commutator(x, xr)
    if self.gamma:
      out = out - (1j * self.gamma / (2.0 * self.hbar)) * commutator(
        x, anticommutator(p, rho))
      out = out - self.gamma_p * commutator(p, commutator(p, rho))
    return out

  def __repr__(self):
    return "EnvironmentSpec(gamma=%g, Lambda=%g, T=%g)" % (
      self.gamma, self.Lambda, self.T)


class NumericsSpec(object):
  """
  Integration and sampling knobs. ``n_theta``/``n_phi`` of None select the
  default sphere grid 2N x (4N+1); ``n_theta=0`` disables phase-space
  observables.
  ``density_every`` keeps the position density of every n-th sample and of
  the last one; 0 disables the snapshots.
  """

  def __init__(self, abs_tol=1e-9, rel_tol=1e-7, max_step=0.05,
               min_step=1e-12, sample_stride=50, sample_fraction=1.0 / 400,
               hermitize_every=10, n_theta=None, n_phi=None,
               store_states=False, window_grade=0.05, window_floor=1e-9,
               positivity_warn=1e-4, positivity_abort=1e-2, method='RK45',
               density_every=40):
    if abs_tol <= 0.0 or rel_tol <= 0.0:
      raise IntegrationError("tolerances must be positive")
    if not 0.0 < min_step < max_step:
      raise IntegrationError("need 0 < min_step < max_step")
    if sample_stride < 1 or hermitize_every < 1:
      raise IntegrationError("sample_stride and hermitize_every must be >= 1")
    if not 0.0 < sample_fraction <= 1.0:
      raise IntegrationError("sample_fraction must be in (0, 1]")
    if method not in METHODS:
      raise IntegrationError("unknown integration method %r" % (method,))
    if density_every < 0:
      raise IntegrationError("density_every must be >= 0")
    self.abs_tol = abs_tol
    self.rel_tol = rel_tol
    self.max_step = max_step
    self.min_step = min_step
    self.sample_stride = int(sample_stride)
    self.sample_fraction = sample_fraction
    self.hermitize_every = int(hermitize_every)
    self.n_theta = n_theta
    self.n_phi = n_phi
    self.store_states = store_states
    self.window_grade = window_grade
    self.window_floor = window_floor
    self.positivity_warn = positivity_warn
    self.positivity_abort = positivity_abort
    self.method = method
    self.density_every = int(density_every)

  def scaled(self, factor):
    """Copy with both tolerances multiplied by ``factor``."""
    other = NumericsSpec.__new__(NumericsSpec)
    other.__dict__.update(self.__dict__)
    other.abs_tol = self.abs_tol * factor
    other.rel_tol = self.rel_tol * factor
    return other

  def sphere_grid(self, N):
    if self.n_theta == 0:
      return None
    return phasespace.sphere_grid(N, self.n_theta or 2 * N,
                                  self.n_phi or 4 * N + 1)

  def stepper(self):
    return AdaptiveStepper(self.abs_tol, self.rel_tol, self.max_step,
                           self.min_step, self.method)


class MasterEquation(object):
  """
  Right-hand side of the master equation for a fixed basis and bath.
  """

  def __init__(self, basis, env):
    self.basis = basis
    self.env = env
    self._x = basis.x_op
    self._p = basis.p_op

  def dissipative(self, rho):
    return self.env.dissipator(rho, self._x, self._p)

  def rhs(self, rho, H):
    return (-1j / self.basis.hbar) * commutator(H, rho) + self.dissipative(rho)


def generator(rho, H, env, basis):
  """
  drho/dt for state ``rho`` under Hamiltonian ``H``.
  """
  return MasterEquation(basis, env).rhs(rho, H)


def generator_hs_norm(rho, H, env, basis):
  return hs_norm(generator(rho, H, env, basis))


COLUMNS = ('t', 'energy', 'sys_energy', 'sys_energy_var', 'sys_ground_energy',
           'transfer_pct', 'wehrl', 'pi', 'phi', 'dissipative_rate',
           'coherence_l1', 'hs_norm', 'op_norm', 'tr_norm', 'sta_cost',
           'purity', 'min_eig', 'von_neumann', 'fidelity_ref', 'clamped_nodes',
           'thermal_energy') + tuple('level_%d' % k
                                     for k in range(SPECTRUM_LEVELS))


class TrajectoryRecord(object):
  """
  Samples of one propagation. Observables are stored per sample in the
  order of ``COLUMNS``.
  """

  def __init__(self, tau, protocol=None, env=None, use_sta=False):
    self.tau = tau
    self.protocol = protocol
    self.env = env
    self.use_sta = use_sta
    self.rows = []
    self.states = []
    self.initial_state = None
    self.final_state = None
    self.accepted = 0
    self.rejected = 0
    self.max_trace_drift = 0.0
    self.positivity_warnings = 0
    # time integrals of ||L[rho]|| over every accepted step
    self.norm_integrals = {'op': 0.0, 'hs': 0.0, 'tr': 0.0}
    self.flags = []
    # (t, probabilities) over the x' eigenvalues in density_x
    self.densities = []
    self.density_x = None

  @property
  def times(self):
    return self.column('t')

  def __len__(self):
    return len(self.rows)

  def column(self, name):
    k = COLUMNS.index(name)
    return np.array([row[k] for row in self.rows], dtype=float)

  def norm_average(self, kind='hs'):
    """(1/tau) int ||L[rho_t]|| dt from the per-step accumulation."""
    return self.norm_integrals[kind] / self.tau

  def add(self, values, state=None):
    self.rows.append(tuple(float(values[c]) for c in COLUMNS))
    if state is not None:
      self.states.append(state.copy())

  def add_density(self, t, x, probs):
    self.density_x = x
    self.densities.append((float(t), probs))

  def density_rows(self):
    """Position-density snapshots flattened to (t, x, probability) rows."""
    return [(t, float(x), float(p)) for t, probs in self.densities
            for x, p in zip(self.density_x, probs)]


class _HamiltonianCache(object):
  """H_sys(t) with the counter-diabatic term, memoised on the last time."""

  def __init__(self, schedule, hbar, use_sta):
    self.schedule = schedule
    self.hbar = hbar
    self.use_sta = use_sta
    self._t = None
    self._value = None

  def __call__(self, t):
    if t != self._t:
      H0 = self.schedule.hamiltonian(t)
      if self.use_sta:
        frame = instantaneous_frame(H0, t)
        H_sta, _ = counterdiabatic_term(frame, self.schedule.h_dot(t),
                                        self.hbar)
      else:
        H_sta = None
      self._t = t
      self._value = (H0, H_sta)
    return self._value

  def total(self, t):
    H0, H_sta = self(t)
    return H0 if H_sta is None else H0 + H_sta


def _window_cap(times, grade, floor):
  def cap(t):
    d = min(abs(t - tc) for tc in times)
    return max(floor, grade * d)
  return cap


@timed
def propagate(rho0, system, protocol, env, basis, numerics=None,
              use_sta=False, grid=None, reference=None, run_id=None):
  """
  Integrate the master equation from 0 to protocol.tau.

  :param rho0: initial density matrix
  :param numerics: NumericsSpec, defaults when None
  :param use_sta: add the counter-diabatic term (quantum protocols only)
  :param grid: SphereGrid for the phase-space observables, or None
  :param reference: optional state whose fidelity is tracked
  :param run_id: tag for the published ``trajectory.sample`` messages
  :return: TrajectoryRecord
  """
  numerics = numerics or NumericsSpec()
  if use_sta and not protocol.kind.is_quantum:
    raise StaError("counter-diabatic driving needs a quantum protocol, got %s"
                   % protocol.kind.value)
  tau = protocol.tau
  hbar = basis.hbar
  schedule = HamiltonianSchedule(basis, system, protocol)
  hamiltonians = _HamiltonianCache(schedule, hbar, use_sta)
  equation = MasterEquation(basis, env)
  coherent = phasespace.coherent_states(basis, grid) if grid else None
  record = TrajectoryRecord(tau, protocol, env, use_sta)
  record.initial_state = rho0.copy()
  nan = float('nan')

  def rhs(t, rho):
    return equation.rhs(rho, hamiltonians.total(t))

  def sample(t, rho, rho_dot):
    H0, H_sta = hamiltonians(t)
    H_sys = H0 if H_sta is None else H0 + H_sta
    w = np.linalg.eigvalsh(hermitize(rho))
    min_eig = float(w[0])
    if min_eig < -numerics.positivity_abort:
      msg = "density matrix eigenvalue %.3g at t=%.6g" % (min_eig, t)
      wellgrade_log(logging.ERROR, msg)
      raise PositivityLoss(msg)
    if min_eig < -numerics.positivity_warn:
      record.positivity_warnings += 1
      wellgrade_log(logging.WARNING,
                    "Positivity loss %.3g at t=%.6g" % (min_eig, t))
    e_sys = np.linalg.eigvalsh(hermitize(H_sys))
    e0 = e_sys if H_sta is None else np.linalg.eigvalsh(hermitize(H0))
    mean_sys = float(np.real(np.trace(H_sys @ rho)))
    mean_sys_sq = float(np.real(np.trace(H_sys @ H_sys @ rho)))
    op_n, hs_n, tr_n = hermitian_norms(rho_dot)
    values = {
      't': t,
      'energy': float(np.real(np.trace(H0 @ rho))),
      'sys_energy': mean_sys,
      'sys_energy_var': max(0.0, mean_sys_sq - mean_sys ** 2),
      'sys_ground_energy': float(e_sys[0]),
      'transfer_pct': metrics.transfer_percentage(rho, basis),
      'coherence_l1': metrics.coherence_l1(rho, basis),
      'hs_norm': hs_n, 'op_norm': op_n, 'tr_norm': tr_n,
      'sta_cost': hs_norm(H_sta) if H_sta is not None else 0.0,
      'purity': purity(rho),
      'min_eig': min_eig,
      'von_neumann': phasespace.von_neumann_entropy(rho),
      'fidelity_ref': (metrics.fidelity(rho, reference)
                       if reference is not None else nan),
      'thermal_energy': thermal_energy(e0, env.T),
    }
    for k in range(SPECTRUM_LEVELS):
      values['level_%d' % k] = float(e0[k]) if k < len(e0) else nan
    if grid is not None:
      rates = phasespace.entropy_rates(
        rho, grid, basis, env, coherent=coherent,
        rho_dot_dissipative=equation.dissipative(rho))
      values.update(wehrl=rates.wehrl, pi=rates.pi, phi=rates.phi,
                    dissipative_rate=rates.dissipative_rate,
                    clamped_nodes=rates.clamped_nodes)
    else:
      values.update(wehrl=nan, pi=nan, phi=nan, dissipative_rate=nan,
                    clamped_nodes=nan)
    index = len(record.rows)
    record.add(values, rho if numerics.store_states else None)
    if numerics.density_every and (index % numerics.density_every == 0 or
                                   t >= tau):
      x, probs = position_density(rho, basis)
      record.add_density(t, x, probs)
    broadcast.publish_sample(run_id, t, tau, index)

  state = {'last_sample': 0.0, 'last_t': 0.0,
           'last_norms': hermitian_norms(rhs(0.0, rho0))}

  def on_accept(t, rho, rho_dot, n):
    drift = abs(float(np.real(np.trace(rho))) - 1.0)
    record.max_trace_drift = max(record.max_trace_drift, drift)
    if drift > TRACE_DRIFT_WARN:
      wellgrade_log(logging.WARNING,
                    "Trace drift %.3g at t=%.6g, renormalising" % (drift, t))
    if drift > TRACE_RENORM:
      rho = rho / np.real(np.trace(rho))
    if n % numerics.hermitize_every == 0:
      wellgrade_log(logging.DEBUG, "Hermitising at step %d" % n)
      rho = hermitize(rho)

    norms = hermitian_norms(rho_dot)
    dt = t - state['last_t']
    for key, now, before in zip(('op', 'hs', 'tr'), norms,
                                state['last_norms']):
      record.norm_integrals[key] += 0.5 * dt * (now + before)
    state['last_t'] = t
    state['last_norms'] = norms

    if (n % numerics.sample_stride == 0 or t >= tau or
        t - state['last_sample'] >= numerics.sample_fraction * tau):
      sample(t, rho, rho_dot)
      state['last_sample'] = t
    return rho

  sample(0.0, rho0, rhs(0.0, rho0))

  step_cap = None
  if use_sta:
    crossings = crossing_times(protocol)
    if crossings:
      step_cap = _window_cap(crossings, numerics.window_grade,
                             numerics.window_floor)

  stepper = numerics.stepper()
  result = stepper.integrate(rhs, 0.0, tau, rho0, step_cap=step_cap,
                             on_accept=on_accept)
  record.final_state = result.y
  record.accepted = result.accepted
  record.rejected = result.rejected
  if record.positivity_warnings:
    record.flags.append('positivity_warning')
  wellgrade_log(logging.INFO,
                "Propagated %s tau=%.6g: %d accepted, %d rejected steps, "
                "%d samples, max trace drift %.3g" % (
                  protocol.kind.value, tau, result.accepted, result.rejected,
                  len(record), record.max_trace_drift))
  if not math.isfinite(float(np.real(np.trace(result.y)))):
    raise IntegrationError("non-finite state at t=%g" % result.t)
  return record

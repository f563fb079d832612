"""
State comparison and protocol grading.

  G = gS * gQ * gT
  gS = max(0, 1 - 0.1 log10(tau / tau_QSL)),  gQ = F(rho_f, rho_target),
  gT = exp(-Sigma_ir)
"""

import collections
import math

import numpy as np
from scipy.integrate import trapezoid

from qtransfer.exceptions import (DegenerateEndpoints, MetricsError,
                                  NegativeEigenvalue)
from qtransfer.operators import hermitize
from qtransfer.phasespace import accumulate_sigma

NEGATIVE_TOL = 1e-6
ENDPOINT_TOL = 1e-8

QSLReport = collections.namedtuple(
  'QSLReport', ['bures_angle', 'sin2', 'op_norm_avg', 'hs_norm_avg',
                'tr_norm_avg', 'tau_qsl', 'hs_ratio', 'flags'])


def _psd_eigh(rho, name):
  w, v = np.linalg.eigh(hermitize(rho))
  if w[0] < -NEGATIVE_TOL:
    raise NegativeEigenvalue("%s has eigenvalue %.3g" % (name, w[0]))
  return np.clip(w, 0.0, None), v


def fidelity(rho1, rho2):
  """
  Uhlmann fidelity (tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2.
  """
  if rho1.shape != rho2.shape:
    raise MetricsError("dimension mismatch %r vs %r" %
                       (rho1.shape, rho2.shape))
  w1, v1 = _psd_eigh(rho1, 'rho1')
  w2 = np.linalg.eigvalsh(hermitize(rho2))
  if w2[0] < -NEGATIVE_TOL:
    raise NegativeEigenvalue("rho2 has eigenvalue %.3g" % w2[0])
  sqrt1 = (v1 * np.sqrt(w1)) @ v1.conj().T
  inner = np.linalg.eigvalsh(hermitize(sqrt1 @ rho2 @ sqrt1))
  f = float(np.sum(np.sqrt(np.clip(inner, 0.0, None)))) ** 2
  return min(max(f, 0.0), 1.0)


def bures_angle(rho1, rho2):
  return float(math.acos(min(1.0, math.sqrt(fidelity(rho1, rho2)))))


def transfer_percentage(rho, basis):
  """Population on the nonpositive eigenvalues of x', tr(rho P<=0)."""
  return float(np.real(np.sum(basis.left_projector * rho.T)))


def parity_reflect(rho, basis):
  P = basis.parity
  return P @ rho @ P


def coherence_l1(rho, basis):
  """Sum of |off-diagonal| elements of rho in the eigenbasis of x'."""
  U = basis.x_eigvecs
  r = np.abs(U.conj().T @ rho @ U)
  return float(np.sum(r) - np.trace(r))


def decoherence_time(env, system, delta_x=None):
  """
  hbar^2 / (gamma m T dx^2), dx the distance between the two minima.
  """
  if delta_x is None:
    delta_x = system.well_separation
  if env.gamma == 0.0:
    return math.inf
  return env.hbar ** 2 / (env.gamma * system.m * env.T * delta_x ** 2)


def time_average(times, values, tau=None):
  times = np.asarray(times, dtype=float)
  tau = tau or (times[-1] - times[0])
  return float(trapezoid(np.asarray(values, dtype=float), times)) / tau


def closed_bounds(angle, delta_e, mean_e, hbar=1.0):
  """
  Mandelstam-Tamm and Margolus-Levitin times for a Bures angle with a given
  average energy spread and mean energy above the ground state.

  :return: (mt_bound, ml_bound), +inf when the energy scale vanishes
  """
  if angle == 0.0:
    return 0.0, 0.0
  mt = hbar * angle / delta_e if delta_e > 0.0 else math.inf
  ml = 2.0 * hbar * angle ** 2 / (math.pi * mean_e) if mean_e > 0.0 \
    else math.inf
  return mt, ml


def qsl_closed_bounds(trajectory, hbar=1.0):
  """
  Closed-dynamics bounds from the sampled energy moments of ``trajectory``.
  The mean energy is measured from the instantaneous ground energy.
  """
  times = trajectory.column('t')
  angle = bures_angle(trajectory.initial_state, trajectory.final_state)
  spread = np.sqrt(np.clip(trajectory.column('sys_energy_var'), 0.0, None))
  above = trajectory.column('sys_energy') - \
    trajectory.column('sys_ground_energy')
  return closed_bounds(angle, time_average(times, spread, trajectory.tau),
                       time_average(times, above, trajectory.tau), hbar)


def qsl_report(trajectory, rho_i=None, rho_f=None, hbar=1.0):
  """
  Generalised speed limit of an open run with the three generator norms.
  tau_QSL uses the Hilbert-Schmidt one.

  :return: QSLReport
  """
  rho_i = trajectory.initial_state if rho_i is None else rho_i
  rho_f = trajectory.final_state if rho_f is None else rho_f
  angle = bures_angle(rho_i, rho_f)
  sin2 = math.sin(angle) ** 2
  if sum(trajectory.norm_integrals.values()) > 0.0:
    op_avg = trajectory.norm_average('op')
    hs_avg = trajectory.norm_average('hs')
    tr_avg = trajectory.norm_average('tr')
  else:
    times = trajectory.column('t')
    op_avg = time_average(times, trajectory.column('op_norm'), trajectory.tau)
    hs_avg = time_average(times, trajectory.column('hs_norm'), trajectory.tau)
    tr_avg = time_average(times, trajectory.column('tr_norm'), trajectory.tau)

  flags = []
  if angle < ENDPOINT_TOL:
    flags.append('degenerate_endpoints')
    tau_qsl = 0.0
  elif hs_avg == 0.0:
    flags.append('frozen_generator')
    tau_qsl = math.inf
  else:
    tau_qsl = hbar * sin2 / hs_avg
  hs_ratio = hs_avg / sin2 if sin2 > 0.0 else math.inf
  return QSLReport(angle, sin2, op_avg, hs_avg, tr_avg, tau_qsl, hs_ratio,
                   tuple(flags))


def tau_qsl(trajectory, rho_i=None, rho_f=None, hbar=1.0):
  report = qsl_report(trajectory, rho_i, rho_f, hbar)
  if 'degenerate_endpoints' in report.flags:
    raise DegenerateEndpoints(
      "initial and final states coincide (Bures angle %.3g)" %
      report.bures_angle)
  return report.tau_qsl


def speed_grade(tau, tau_qsl):
  """gS = max(0, 1 - 0.1 log10(tau / tau_QSL)), clipped to [0, 1]."""
  if tau_qsl == math.inf:
    return 1.0
  if tau_qsl <= 0.0:
    return 0.0
  g = 1.0 - 0.1 * math.log10(tau / tau_qsl)
  return min(1.0, max(0.0, g))


class GradingReport(object):

  def __init__(self, g_s, g_q, g_t, sigma_ir, tau, tau_qsl, hs_ratio,
               transfer_pct, diagnostics=None, flags=()):
    self.g_s = g_s
    self.g_q = g_q
    self.g_t = g_t
    self.G = g_s * g_q * g_t
    self.sigma_ir = sigma_ir
    self.tau = tau
    self.tau_qsl = tau_qsl
    self.hs_ratio = hs_ratio
    self.transfer_pct = transfer_pct
    self.diagnostics = diagnostics or {}
    self.flags = tuple(flags)

  def to_dict(self):
    return {
      'g_s': self.g_s, 'g_q': self.g_q, 'g_t': self.g_t, 'G': self.G,
      'sigma_ir': self.sigma_ir, 'tau': self.tau, 'tau_qsl': self.tau_qsl,
      'hs_ratio': self.hs_ratio, 'transfer_pct': self.transfer_pct,
      'diagnostics': dict(self.diagnostics), 'flags': list(self.flags),
    }

  def __repr__(self):
    return "GradingReport(G=%.4g, gS=%.4g, gQ=%.4g, gT=%.4g)" % (
      self.G, self.g_s, self.g_q, self.g_t)


def grade(trajectory, rho_target, hbar=1.0):
  """
  Score a completed trajectory against the target state.

  :return: GradingReport
  """
  times = trajectory.column('t')
  pi = trajectory.column('pi')
  if np.any(np.isnan(pi)):
    if trajectory.env is not None and trajectory.env.is_closed:
      sigma_ir = 0.0
    else:
      raise MetricsError("open trajectory has no entropy production samples")
  else:
    sigma_ir = accumulate_sigma(times, pi)

  qsl = qsl_report(trajectory, hbar=hbar)
  mt, ml = qsl_closed_bounds(trajectory, hbar)
  g_s = speed_grade(trajectory.tau, qsl.tau_qsl)
  g_q = fidelity(trajectory.final_state, rho_target)
  g_t = math.exp(-sigma_ir)
  spread = np.sqrt(np.clip(trajectory.column('sys_energy_var'), 0.0, None))
  diagnostics = {
    'mt_bound': mt,
    'ml_bound': ml,
    'op_norm_avg': qsl.op_norm_avg,
    'hs_norm_avg': qsl.hs_norm_avg,
    'tr_norm_avg': qsl.tr_norm_avg,
    'mean_energy_avg': time_average(
      times, trajectory.column('sys_energy') -
      trajectory.column('sys_ground_energy'), trajectory.tau),
    'energy_var_avg': time_average(
      times, trajectory.column('sys_energy_var'), trajectory.tau),
    'energy_spread_avg': time_average(times, spread, trajectory.tau),
    'bures_angle': qsl.bures_angle,
    'accepted_steps': trajectory.accepted,
    'rejected_steps': trajectory.rejected,
    'max_trace_drift': trajectory.max_trace_drift,
  }
  return GradingReport(g_s, g_q, g_t, sigma_ir, trajectory.tau, qsl.tau_qsl,
                       qsl.hs_ratio,
                       float(trajectory.column('transfer_pct')[-1]),
                       diagnostics, tuple(qsl.flags) + tuple(trajectory.flags))

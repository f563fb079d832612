"""
Landau-Zener two-level model H = Delta sigma_z + g(t) sigma_x with a linear
sweep of g, with and without its counter-diabatic term.
"""

import collections

import numpy as np

from qtransfer.exceptions import OutOfRange
from qtransfer.integrator import AdaptiveStepper
from qtransfer.model import instantaneous_frame
from qtransfer.sta import counterdiabatic_term

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

LZResult = collections.namedtuple(
  'LZResult', ['final_fidelity', 'min_fidelity', 'times', 'fidelities',
               'sigma_x_initial', 'sigma_x_final'])


class LZSpec(object):

  def __init__(self, Delta=0.05, tau=1.0, g0=-1.0, g1=1.0, with_cd=False,
               hbar=1.0):
    if not Delta > 0.0:
      raise OutOfRange("Delta must be positive, got %r" % (Delta,))
    if not tau > 0.0:
      raise OutOfRange("tau must be positive, got %r" % (tau,))
    self.Delta = float(Delta)
    self.tau = float(tau)
    self.g0 = float(g0)
    self.g1 = float(g1)
    self.with_cd = with_cd
    self.hbar = hbar

  def g(self, t):
    return self.g0 + (self.g1 - self.g0) * t / self.tau

  @property
  def g_dot(self):
    return (self.g1 - self.g0) / self.tau

  def __repr__(self):
    return "LZSpec(Delta=%g, tau=%g, g: %g -> %g, cd=%s)" % (
      self.Delta, self.tau, self.g0, self.g1, self.with_cd)


def lz_hamiltonian(spec, t):
  return spec.Delta * SIGMA_Z + spec.g(t) * SIGMA_X


def lz_h_dot(spec, t):
  return spec.g_dot * SIGMA_X


def cd_closed_form(Delta, g, g_dot, hbar=1.0):
  """
  Counter-diabatic term hbar g_dot Delta / (2 (Delta^2 + g^2)) sigma_y.

  Sign convention: the term is i hbar sum_n |dn/dt><n| with sigma_y =
  [[0, -i], [i, 0]], i.e. (hbar / 2) dtheta/dt sigma_y for the mixing angle
  tan theta = g / Delta. A positive sweep rate gives a positive sigma_y
  coefficient.
  """
  return hbar * g_dot * Delta / (2.0 * (Delta ** 2 + g ** 2)) * SIGMA_Y


def lz_cd(spec, t):
  return cd_closed_form(spec.Delta, spec.g(t), spec.g_dot, spec.hbar)


def lz_cd_generic(spec, t):
  """The same term from the general eigenframe construction."""
  frame = instantaneous_frame(lz_hamiltonian(spec, t), t)
  H_sta, _ = counterdiabatic_term(frame, lz_h_dot(spec, t), spec.hbar)
  return H_sta


def ground_state(spec, t):
  _, v = np.linalg.eigh(lz_hamiltonian(spec, t))
  return v[:, 0]


def lz_run(spec, abs_tol=1e-11, rel_tol=1e-9, max_step=None):
  """
  Propagate the instantaneous ground state at t=0 to tau and track its
  fidelity to the instantaneous ground state.

  :return: LZResult
  """
  def hamiltonian(t):
    h = lz_hamiltonian(spec, t)
    if spec.with_cd:
      h = h + lz_cd(spec, t)
    return h

  def rhs(t, psi):
    return (-1j / spec.hbar) * (hamiltonian(t) @ psi)

  psi0 = ground_state(spec, 0.0)
  times = [0.0]
  fidelities = [1.0]

  def on_accept(t, psi, dpsi, n):
    times.append(t)
    fidelities.append(float(abs(np.vdot(ground_state(spec, t), psi)) ** 2))
    return psi

  stepper = AdaptiveStepper(abs_tol, rel_tol, max_step or spec.tau / 200.0,
                            1e-14 * spec.tau)
  result = stepper.integrate(rhs, 0.0, spec.tau, psi0, on_accept=on_accept)
  psi = result.y / np.linalg.norm(result.y)
  fid = np.array(fidelities)
  return LZResult(float(fid[-1]), float(fid.min()), np.array(times), fid,
                  float(np.real(np.vdot(psi0, SIGMA_X @ psi0))),
                  float(np.real(np.vdot(psi, SIGMA_X @ psi))))

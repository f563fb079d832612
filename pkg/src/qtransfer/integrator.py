"""
Adaptive Runge-Kutta propagation on top of scipy's explicit solvers
(RK45 or DOP853), driven one accepted step at a time so the caller can cap
the step size and correct the state between steps. Works on any numpy array
state: state vectors for the two-level runs and density matrices for the
master equation.
"""

import collections
import logging

import numpy as np
from scipy.integrate import DOP853, RK45

from qtransfer.exceptions import IntegrationError, StepUnderflow
from wellgrade_util import wellgrade_log

IntegrationResult = collections.namedtuple(
  'IntegrationResult', ['t', 'y', 'accepted', 'rejected'])

METHODS = {'RK45': RK45, 'DOP853': DOP853}


class AdaptiveStepper(object):
  """
  Step-by-step driver for a scipy Runge-Kutta solver.

  :param method: 'RK45' (Dormand-Prince 5(4)) or 'DOP853'
  """

  def __init__(self, abs_tol=1e-9, rel_tol=1e-7, max_step=0.05,
               min_step=1e-12, method='RK45', max_steps=10000000):
    if abs_tol <= 0.0 or rel_tol <= 0.0:
      raise IntegrationError("tolerances must be positive")
    if not 0.0 < min_step < max_step:
      raise IntegrationError("need 0 < min_step < max_step, got %r, %r" %
                             (min_step, max_step))
    if method not in METHODS:
      raise IntegrationError("unknown method %r, expected one of %s" %
                             (method, ', '.join(sorted(METHODS))))
    self.abs_tol = abs_tol
    self.rel_tol = rel_tol
    self.max_step = max_step
    self.min_step = min_step
    self.method = method
    self.max_steps = max_steps

  def _cap(self, step_cap, t):
    if step_cap is None:
      return self.max_step
    return min(self.max_step, step_cap(t))

  def _solver(self, fun, t, y, t1, cap, first_step=None):
    if first_step is not None:
      first_step = min(first_step, t1 - t)
    return METHODS[self.method](fun, t, np.ravel(y), t1, max_step=cap,
                                rtol=self.rel_tol, atol=self.abs_tol,
                                first_step=first_step)

  def _underflow(self, msg):
    wellgrade_log(logging.ERROR, msg)
    raise StepUnderflow(msg)

  def integrate(self, f, t0, t1, y0, step_cap=None, on_accept=None):
    """
    Integrate y' = f(t, y) from t0 to t1.

    :param step_cap: optional callable t -> largest step allowed from t
    :param on_accept: optional callable (t, y, dy, n_accepted) -> y, invoked
      after every accepted step with dy = f(t, y); a different returned
      array replaces y and restarts the solver from it
    :return: IntegrationResult
    """
    y0 = np.asarray(y0)
    shape = y0.shape
    t1 = float(t1)

    def fun(t, y):
      return np.ravel(f(t, np.reshape(y, shape)))

    t = float(t0)
    y = y0
    if t >= t1:
      return IntegrationResult(t, y, 0, 0)
    solver = self._solver(fun, t, y, t1, self._cap(step_cap, t))
    if not np.all(np.isfinite(solver.f)):
      raise IntegrationError("non-finite derivative at t=%g" % (t,))
    accepted = 0
    rejected = 0

    while solver.status == 'running':
      if accepted + rejected >= self.max_steps:
        raise IntegrationError("step budget %d exhausted at t=%g" %
                               (self.max_steps, solver.t))
      cap = self._cap(step_cap, solver.t)
      if cap < self.min_step and solver.t + cap < t1:
        self._underflow("step cap %.3g below min_step %.3g at t=%.9g" %
                        (cap, self.min_step, solver.t))
      solver.max_step = cap
      nfev = solver.nfev
      message = solver.step()
      if solver.status == 'failed':
        self._underflow("%s solver failed at t=%.9g: %s" %
                        (self.method, solver.t, message))
      attempts = (solver.nfev - nfev) // solver.n_stages
      rejected += max(0, attempts - 1)
      accepted += 1
      t = solver.t
      h = t - solver.t_old
      if h < self.min_step and t < t1:
        self._underflow("step %.3g below min_step %.3g at t=%.9g" %
                        (h, self.min_step, t))

      y_new = np.reshape(solver.y, shape)
      y = y_new
      if on_accept is not None:
        y = on_accept(t, y_new, np.reshape(solver.f, shape), accepted)
        if y is not y_new and solver.status == 'running':
          solver = self._solver(fun, t, y, t1, self._cap(step_cap, t),
                                solver.h_abs)
    return IntegrationResult(t, y, accepted, rejected)

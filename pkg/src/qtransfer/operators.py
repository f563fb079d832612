"""
Dense-matrix helpers shared by the simulation modules.

Operators and density matrices are plain complex numpy arrays; the helpers
here state and check their contracts.
"""

import numpy as np

from qtransfer.exceptions import InvalidDensityMatrix

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
PSD_TOL = 1e-8


def dagger(a):
  return a.conj().T


def commutator(a, b):
  return a @ b - b @ a


def anticommutator(a, b):
  return a @ b + b @ a


def hermitize(a):
  return 0.5 * (a + a.conj().T)


def hermiticity_error(a):
  return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def is_hermitian(a, tol=1e-12):
  return hermiticity_error(a) <= tol


def hs_norm(a):
  """Hilbert-Schmidt norm sqrt(tr A^dagger A)."""
  return float(np.linalg.norm(a, 'fro'))


def hermitian_norms(a):
  """
  Operator, Hilbert-Schmidt and trace norm of a Hermitian matrix from one
  eigenvalue solve.

  :return: (op_norm, hs_norm, trace_norm)
  """
  w = np.abs(np.linalg.eigvalsh(hermitize(a)))
  return float(w.max()), float(np.sqrt(np.sum(w * w))), float(w.sum())


def expectation(op, rho):
  return float(np.real(np.trace(op @ rho)))


def pure_state(psi):
  psi = np.asarray(psi, dtype=complex)
  psi = psi / np.linalg.norm(psi)
  return np.outer(psi, psi.conj())


def maximally_mixed(dim):
  return np.eye(dim, dtype=complex) / dim


def purity(rho):
  return float(np.real(np.sum(rho * rho.T)))


def hermitian_function(a, f):
  """f(A) for Hermitian A through its eigendecomposition."""
  w, v = np.linalg.eigh(hermitize(a))
  return (v * f(w)) @ v.conj().T


def random_density_matrix(rng, dim, rank=None):
  """
  Random full-rank (or given rank) density matrix.

  :param rng: numpy Generator
  """
  rank = rank or dim
  g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
  rho = g @ g.conj().T
  return rho / np.real(np.trace(rho))


def random_hermitian(rng, dim, scale=1.0):
  g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
  return scale * hermitize(g)


def check_density_matrix(rho, name='rho', hermitian_tol=HERMITIAN_TOL,
                         trace_tol=TRACE_TOL, psd_tol=PSD_TOL):
  """
  Raise InvalidDensityMatrix unless rho is square, Hermitian, unit trace and
  positive semidefinite within tolerance.
  """
  if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
    raise InvalidDensityMatrix("%s is not square: shape %r" %
                               (name, rho.shape))
  herm = hermiticity_error(rho)
  if herm > hermitian_tol:
    raise InvalidDensityMatrix("%s is not Hermitian (%.3g)" % (name, herm))
  tr = np.real(np.trace(rho))
  if abs(tr - 1.0) > trace_tol:
    raise InvalidDensityMatrix("%s has trace %.12g" % (name, tr))
  lowest = float(np.linalg.eigvalsh(hermitize(rho))[0])
  if lowest < -psd_tol:
    raise InvalidDensityMatrix(
      "%s has negative eigenvalue %.3g" % (name, lowest))
  return rho

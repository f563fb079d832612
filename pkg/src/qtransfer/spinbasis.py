"""
Finite spin-j representation of a single bosonic mode.

The mode is mapped onto a spin of dimension N = 2j+1 with a truncated
Holstein-Primakoff expansion. Index k of every matrix is the Jz eigenstate
|j, j-k>, so k is also the boson number n and index 0 is the vacuum |j, j>.
"""

import logging
import math

import numpy as np
from scipy.special import binom

from qtransfer.exceptions import InvalidDimension, NonInvertibleM
from wellgrade_util import wellgrade_log

HBAR = 1.0
M_KAPPA_FLOOR = 1e-10


def _freeze(*arrays):
  for a in arrays:
    a.setflags(write=False)


class SpinBasis(object):
  """
  Immutable container of the spin operators, the truncated HP map and the
  dimensionless quadratures x', p'. Safe to share between workers.
  """

  def __init__(self, N, kappa, hbar=HBAR):
    self._N = N
    self._kappa = kappa
    self._hbar = hbar
    self._j = (N - 1) / 2.0

    j = self._j
    m = j - np.arange(N, dtype=float)
    n = np.arange(N, dtype=float)

    j_plus = np.zeros((N, N), dtype=complex)
    # J+|j,m> = hbar sqrt(j(j+1) - m(m+1)) |j,m+1>, and m+1 lives at k-1
    for k in range(1, N):
      j_plus[k - 1, k] = hbar * math.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    j_minus = j_plus.conj().T.copy()
    j_z = np.diag(hbar * m).astype(complex)

    m_diag = self.hp_coefficients(N, kappa, hbar)
    m_values = np.polynomial.polynomial.polyval(n, m_diag)
    small = np.abs(m_values) < M_KAPPA_FLOOR
    if np.any(small):
      raise NonInvertibleM(
        "M_kappa has %d diagonal entries below %g (N=%d, kappa=%d)" %
        (int(small.sum()), M_KAPPA_FLOOR, N, kappa))

    self._m_kappa = np.diag(m_values).astype(complex)
    self._m_kappa_inv = np.diag(1.0 / m_values).astype(complex)
    self._j_plus = j_plus
    self._j_minus = j_minus
    self._j_z = j_z
    self._number_op = np.diag(n).astype(complex)

    a = self._m_kappa_inv @ j_plus
    a_dag = j_minus @ self._m_kappa_inv
    self._a = a
    self._x_op = (a_dag + a) / math.sqrt(2.0)
    self._p_op = 1j * (a_dag - a) / math.sqrt(2.0)

    self._j_x = (j_plus + j_minus) / 2.0
    self._j_y = (j_plus - j_minus) / 2.0j
    self._parity = np.diag((-1.0) ** n).astype(complex)

    x_eigvals, x_eigvecs = np.linalg.eigh(self._x_op)
    self._x_eigvals = x_eigvals
    self._x_eigvecs = x_eigvecs
    self._left_projector = (x_eigvecs[:, x_eigvals <= 0.0] @
                            x_eigvecs[:, x_eigvals <= 0.0].conj().T)

    _freeze(self._m_kappa, self._m_kappa_inv, self._j_plus, self._j_minus,
            self._j_z, self._number_op, self._a, self._x_op, self._p_op,
            self._j_x, self._j_y, self._parity, self._x_eigvals,
            self._x_eigvecs, self._left_projector)

  @staticmethod
  def hp_coefficients(N, kappa, hbar=HBAR):
    """
    Taylor coefficients c_q of hbar*sqrt(2j - n) around n = 0, q = 0..kappa.

    :param N: spin dimension 2j+1
    :type N: ``int``
    :param kappa: truncation order
    :type kappa: ``int``
    :return: coefficients, lowest order first
    :rtype: numpy.ndarray
    """
    two_j = float(N - 1)
    q = np.arange(kappa + 1)
    return hbar * math.sqrt(two_j) * binom(0.5, q) * (-1.0 / two_j) ** q

  @property
  def N(self):
    return self._N

  @property
  def j(self):
    return self._j

  @property
  def kappa(self):
    return self._kappa

  @property
  def hbar(self):
    return self._hbar

  @property
  def J_plus(self):
    return self._j_plus

  @property
  def J_minus(self):
    return self._j_minus

  @property
  def J_z(self):
    return self._j_z

  @property
  def J_x(self):
    return self._j_x

  @property
  def J_y(self):
    return self._j_y

  @property
  def M_kappa(self):
    return self._m_kappa

  @property
  def M_kappa_inv(self):
    return self._m_kappa_inv

  @property
  def a_op(self):
    """Approximate annihilation operator M_kappa^-1 J_+."""
    return self._a

  @property
  def x_op(self):
    return self._x_op

  @property
  def p_op(self):
    return self._p_op

  @property
  def number_op(self):
    return self._number_op

  @property
  def parity(self):
    return self._parity

  @property
  def x_eigvals(self):
    return self._x_eigvals

  @property
  def x_eigvecs(self):
    return self._x_eigvecs

  @property
  def left_projector(self):
    """Spectral projector of x' onto its nonpositive eigenvalues."""
    return self._left_projector

  def identity(self):
    return np.eye(self._N, dtype=complex)

  def vacuum(self):
    """The |j, j> state (n = 0) as a column vector."""
    psi = np.zeros(self._N, dtype=complex)
    psi[0] = 1.0
    return psi

  def function_of_x(self, f):
    """
    Apply a real scalar function to x' spectrally: U diag(f(x_k)) U^dagger.

    :param f: vectorised callable on the eigenvalues of x'
    :return: Hermitian matrix
    """
    values = np.asarray(f(self._x_eigvals), dtype=float)
    return (self._x_eigvecs * values) @ self._x_eigvecs.conj().T

  def __repr__(self):
    return "SpinBasis(N=%d, kappa=%d, hbar=%g)" % (
      self._N, self._kappa, self._hbar)


def build_basis(N, kappa, hbar=HBAR):
  """
  Build the spin-j basis for dimension N with HP truncation order kappa.

  :param N: Hilbert space dimension, N >= 2
  :type N: ``int``
  :param kappa: Taylor truncation order of M_kappa, kappa >= 0
  :type kappa: ``int``
  :param hbar: value of hbar
  :type hbar: ``float``
  :return: SpinBasis
  """
  if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 2:
    raise InvalidDimension("N must be an integer >= 2, got %r" % (N,))
  if isinstance(kappa, bool) or not isinstance(kappa, (int, np.integer)) \
      or kappa < 0:
    raise InvalidDimension("kappa must be an integer >= 0, got %r" % (kappa,))
  if hbar <= 0.0:
    raise InvalidDimension("hbar must be positive, got %r" % (hbar,))
  basis = SpinBasis(int(N), int(kappa), float(hbar))
  wellgrade_log(logging.DEBUG, "Built %r, j=%g" % (basis, basis.j))
  return basis

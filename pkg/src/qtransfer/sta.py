"""
Shortcut-to-adiabaticity machinery: gauge-tracked eigenframes and the exact
counter-diabatic Hamiltonian

  H_STA = i hbar sum_{i != j} <i|dH0/dt|j> / (E_j - E_i) |i><j|
"""

import collections

import numpy as np

from qtransfer.exceptions import DegenerateGap, GaugeAmbiguity, StaError
from qtransfer.model import (HamiltonianSchedule, ProtocolKind,
                             instantaneous_frame)
from qtransfer.operators import hermitize, hs_norm

GAP_FLOOR = 1e-13
COUPLING_FLOOR = 1e-12
OVERLAP_TIE = 1e-6

CDReport = collections.namedtuple('CDReport',
                                 ['t', 'H_sta', 'cost', 'min_gap'])
GapSample = collections.namedtuple('GapSample', ['t', 'h0_gap', 'h1_gap'])


def eigenframe(H, prev=None, t=None):
  """
  Ascending eigenpairs of H; with ``prev`` the columns are matched to the
  previous frame by largest overlap and rotated so <prev_i|i> > 0.

  :param H: Hermitian matrix
  :param prev: EigenFrame or None
  :param t: time stamp of the frame
  :return: EigenFrame
  """
  if t is None:
    t = prev.t if prev is not None else 0.0
  frame = instantaneous_frame(H, t)
  if prev is None:
    return frame

  overlaps = prev.states.conj().T @ frame.states
  mags = np.abs(overlaps)
  order = np.empty(frame.dim, dtype=int)
  for i in range(frame.dim):
    row = mags[i]
    ranked = np.argsort(row)[::-1]
    if frame.dim > 1 and row[ranked[0]] - row[ranked[1]] < OVERLAP_TIE:
      raise GaugeAmbiguity(
        "state %d at t=%g overlaps states %d and %d equally (%.6g)" %
        (i, t, ranked[0], ranked[1], row[ranked[0]]))
    order[i] = ranked[0]
  if len(set(order.tolist())) != frame.dim:
    raise GaugeAmbiguity("overlap matching at t=%g is not one-to-one" % t)

  states = frame.states[:, order]
  phases = overlaps[np.arange(frame.dim), order]
  states = states * (np.abs(phases) / phases)
  return frame.with_states(frame.energies[order], states)


def counterdiabatic_term(frame, h_dot, hbar=1.0, gap_floor=GAP_FLOOR,
                         coupling_floor=COUPLING_FLOOR):
  """
  Exact counter-diabatic term for the frame of H0 and its derivative.

  :param frame: EigenFrame of H0(t)
  :param h_dot: dH0/dt at the same time
  :return: (H_sta, min_gap)
  """
  S = frame.states
  V = S.conj().T @ h_dot @ S
  E = np.asarray(frame.energies)
  gaps = E[np.newaxis, :] - E[:, np.newaxis]
  off = ~np.eye(len(E), dtype=bool)
  closed = off & (np.abs(gaps) <= gap_floor)
  if np.any(closed & (np.abs(V) > coupling_floor)):
    i, j = np.argwhere(closed & (np.abs(V) > coupling_floor))[0]
    raise DegenerateGap(
      "levels %d and %d are degenerate (gap %.3g) but coupled by dH0/dt "
      "(%.3g)" % (i, j, abs(gaps[i, j]), abs(V[i, j])))
  used = off & ~closed
  safe = np.where(used, gaps, 1.0)
  cd = np.where(used, 1j * hbar * V / safe, 0.0)
  min_gap = float(np.min(np.abs(gaps[used]))) if np.any(used) else np.inf
  return hermitize(S @ cd @ S.conj().T), min_gap


def crossing_times(protocol):
  """
  Times in (0, tau) where the quantum tilt alpha(t) passes through zero.
  There the well doublets become degenerate up to tunnelling and H_STA
  spikes.
  """
  d = protocol.delta
  if protocol.kind is ProtocolKind.QUANTUM1:
    coeffs = [-4.0 * d, 6.0 * d, 0.0, -d]
  elif protocol.kind is ProtocolKind.QUANTUM2:
    coeffs = [-48.0 * d, 120.0 * d, -100.0 * d, 30.0 * d, 0.0, -d]
  else:
    return []
  # coefficients are in s = t/tau, so the roots do not depend on delta
  roots = np.roots(np.asarray(coeffs) / d)
  # multiple roots come back split by ~eps^(1/k); merge them
  s = sorted(float(r.real) for r in roots
             if abs(r.imag) < 1e-4 and 0.0 < r.real < 1.0)
  merged = []
  for value in s:
    if merged and value - merged[-1][-1] < 1e-4:
      merged[-1].append(value)
    else:
      merged.append([value])
  return [protocol.tau * float(np.mean(group)) for group in merged]


def _require_quantum(protocol):
  if not protocol.kind.is_quantum:
    raise StaError("counter-diabatic driving needs a quantum protocol, got %s"
                   % protocol.kind.value)


def cd_hamiltonian(basis, system, protocol, t, frame=None, schedule=None,
                   gap_floor=GAP_FLOOR):
  """
  Counter-diabatic Hamiltonian of a quantum protocol at time ``t``.

  :return: CDReport
  """
  _require_quantum(protocol)
  schedule = schedule or HamiltonianSchedule(basis, system, protocol)
  if frame is None:
    frame = instantaneous_frame(schedule.hamiltonian(t), t)
  H_sta, min_gap = counterdiabatic_term(frame, schedule.h_dot(t), basis.hbar,
                                        gap_floor)
  return CDReport(t, H_sta, hs_norm(H_sta), min_gap)


def sta_cost_profile(protocol, system, basis, times):
  """
  ||H_STA(t)||_hs along ``times``.

  :return: list of (t, cost)
  """
  _require_quantum(protocol)
  schedule = HamiltonianSchedule(basis, system, protocol)
  profile = []
  for t in times:
    report = cd_hamiltonian(basis, system, protocol, t, schedule=schedule)
    profile.append((float(t), report.cost))
  return profile


def gap_profile(basis, system, protocol, times):
  """
  Ground to first-excited gap of H0 and of H1 = H0 + H_STA along ``times``.

  :return: list of GapSample
  """
  _require_quantum(protocol)
  schedule = HamiltonianSchedule(basis, system, protocol)
  samples = []
  for t in times:
    H0 = schedule.hamiltonian(t)
    frame = instantaneous_frame(H0, t)
    report = cd_hamiltonian(basis, system, protocol, t, frame=frame,
                            schedule=schedule)
    e1 = np.linalg.eigvalsh(hermitize(H0 + report.H_sta))
    samples.append(GapSample(float(t),
                             float(frame.energies[1] - frame.energies[0]),
                             float(e1[1] - e1[0])))
  return samples

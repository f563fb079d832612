"""
Publish/subscribe of propagation samples on the ``trajectory.sample`` topic.
"""

import logging
import threading

from pubsub import pub

from wellgrade_util import wellgrade_log

SAMPLE_TOPIC = 'trajectory.sample'

__all__ = ['SAMPLE_TOPIC', 'publish_sample', 'SampleConsumer',
           'ProgressLogger']


class AtomicCounter:
  """An atomic, thread-safe incrementing counter."""
  def __init__(self, initial=0):
    self.value = initial
    self._lock = threading.Lock()

  def increment(self, num=1):
    with self._lock:
      self.value += num
      return self.value


def publish_sample(run_id, t, tau, index):
  pub.sendMessage(SAMPLE_TOPIC, run_id=run_id, t=t, tau=tau, index=index)


class SampleConsumer(object):
  """
  Base class for listeners of propagation samples. Subclasses override
  ``on_sample``.
  """
  id_generator = AtomicCounter(0)

  def __init__(self, run_id=None):
    self.run_id = run_id
    self.consumer_id = SampleConsumer.id_generator.increment()
    self._started = False

  def start(self):
    if not self._started:
      pub.subscribe(self._on_sample, SAMPLE_TOPIC)
      self._started = True

  def stop(self):
    if self._started:
      pub.unsubscribe(self._on_sample, SAMPLE_TOPIC)
      self._started = False

  def __enter__(self):
    self.start()
    return self

  def __exit__(self, exc_type, exc_value, traceback):
    self.stop()

  def on_sample(self, run_id, t, tau, index):
    pass

  def _on_sample(self, run_id, t, tau, index):
    if self.run_id is None or run_id == self.run_id:
      self.on_sample(run_id, t, tau, index)


class ProgressLogger(SampleConsumer):
  """Log propagation progress every ``step_percent`` percent of tau."""

  def __init__(self, run_id=None, step_percent=10):
    super(ProgressLogger, self).__init__(run_id)
    self.step_percent = step_percent
    self._next = step_percent

  def on_sample(self, run_id, t, tau, index):
    percent = 100.0 * t / tau if tau else 100.0
    if percent >= self._next:
      wellgrade_log(logging.INFO, "Run %s: t=%.6g (%d%%), sample %d" % (
        run_id, t, int(percent), index))
      while self._next <= percent:
        self._next += self.step_percent

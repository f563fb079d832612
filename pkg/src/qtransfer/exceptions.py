"""Classes containing the exceptions for reporting simulation errors."""

__all__ = ['Error', 'BasisError', 'InvalidDimension', 'NonInvertibleM',
           'ModelError', 'OutOfRange', 'WellClassificationFailed',
           'GridTooCoarse', 'InvalidDensityMatrix', 'StaError',
           'GaugeAmbiguity', 'DegenerateGap', 'IntegrationError',
           'StepUnderflow', 'PositivityLoss', 'MetricsError',
           'NegativeEigenvalue', 'DegenerateEndpoints', 'NonMonotoneTime',
           'ConfigError']


class Error(Exception):
  def __init__(self, value):
    Exception.__init__(self, value)
    self.__value = value

  @property
  def value(self):
    return self.__value

  def __str__(self):
    return str(self.__value)


class BasisError(Error):
  def __init__(self, value):
    Error.__init__(self, value)


class InvalidDimension(BasisError):
  def __init__(self, value):
    BasisError.__init__(self, value)


class NonInvertibleM(BasisError):
  def __init__(self, value):
    BasisError.__init__(self, value)


class ModelError(Error):
  def __init__(self, value):
    Error.__init__(self, value)


class OutOfRange(ModelError):
  def __init__(self, value):
    ModelError.__init__(self, value)


class WellClassificationFailed(ModelError):
  def __init__(self, value):
    ModelError.__init__(self, value)


class GridTooCoarse(ModelError):
  def __init__(self, value):
    ModelError.__init__(self, value)


class InvalidDensityMatrix(ModelError):
  def __init__(self, value):
    ModelError.__init__(self, value)


class StaError(Error):
  def __init__(self, value):
    Error.__init__(self, value)


class GaugeAmbiguity(StaError):
  def __init__(self, value):
    StaError.__init__(self, value)


class DegenerateGap(StaError):
  def __init__(self, value):
    StaError.__init__(self, value)


class IntegrationError(Error):
  def __init__(self, value):
    Error.__init__(self, value)


class StepUnderflow(IntegrationError):
  def __init__(self, value):
    IntegrationError.__init__(self, value)


class PositivityLoss(IntegrationError):
  def __init__(self, value):
    IntegrationError.__init__(self, value)


class MetricsError(Error):
  def __init__(self, value):
    Error.__init__(self, value)


class NegativeEigenvalue(MetricsError):
  def __init__(self, value):
    MetricsError.__init__(self, value)


class DegenerateEndpoints(MetricsError):
  def __init__(self, value):
    MetricsError.__init__(self, value)


class NonMonotoneTime(MetricsError):
  def __init__(self, value):
    MetricsError.__init__(self, value)


class ConfigError(Error):
  """
  Run configuration failed validation.  ``field`` is the dotted path of the
  offending item, e.g. ``system.c2``.
  """
  def __init__(self, field, message):
    Error.__init__(self, "%s: %s" % (field, message))
    self.field = field

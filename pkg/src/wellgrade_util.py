import datetime
import hashlib
import json
import logging
import os
import sys
import time
import uuid

from wrapt import decorator

WELLGRADE_TMPDIR = '/tmp/wellgrade'  # Temporary directory for WellGrade

# WellGrade Temp Dir
os.makedirs(WELLGRADE_TMPDIR, exist_ok=True)

wellgrade_logger = None
wellgrade_loghandler = None
last_log_message = None
last_log_error_message = None

# Global top level directory
wellgrade_topdir = None  # Top level directory for WellGrade


def initialize_logger(wellgrade_logfile_name):
  global wellgrade_logger, wellgrade_loghandler

  # Global WellGrade logger
  wellgrade_logger = logging.getLogger('wellgrade')
  wellgrade_logger.setLevel(logging.INFO)
  if wellgrade_loghandler:
    wellgrade_logger.removeHandler(wellgrade_loghandler)
    wellgrade_loghandler.close()
  wellgrade_loghandler = logging.FileHandler(wellgrade_logfile_name)
  wellgrade_loghandler.setLevel(logging.INFO)
  wellgrade_loghandler.setFormatter(
    logging.Formatter('%(asctime)s WellGrade %(levelname)s %(message)s'))
  wellgrade_logger.addHandler(wellgrade_loghandler)


def randomid():
  """
  Returns a unique 32 character string for correlating different log lines
  and run artifacts.

  :returns str
  """
  # Visually easier in the logs to have a 32 char string without the dashes
  return hashlib.md5(str(uuid.uuid4()).encode('utf-8')).hexdigest()


def get_wellgrade_topdir():
  """
  Get the WellGrade top level directory

  :return: full path to the WellGrade top level directory.
  :type: str
  """
  global wellgrade_topdir
  if not wellgrade_topdir:
    this_file = os.path.realpath(__file__)
    this_dir = os.path.dirname(this_file)
    wellgrade_topdir = os.path.abspath(os.path.join(this_dir, '..'))
  return wellgrade_topdir


def wellgrade_set_log_level(log_level):
  """
  Set logging level
  :param log_level: logger log level
  :type: logger level
  """
  logging.getLogger('wellgrade').setLevel(level=log_level)
  if wellgrade_loghandler:
    wellgrade_loghandler.setLevel(log_level)


def wellgrade_log(log_level, msg):
  """
  Logger message
  :param log_level: logger log level
  :param msg: str: log message
  """
  global last_log_message, last_log_error_message

  if not msg:
    return

  last_log_message = msg
  if log_level >= logging.ERROR:
    last_log_error_message = msg
  if not wellgrade_logger:
    # No log file yet: only warnings and worse are worth a line on stderr.
    if log_level >= logging.WARNING:
      if msg[-1:] != '\n':
        msg = msg + '\n'
      sys.stderr.write(msg)
    return
  wellgrade_logger.log(log_level, msg)
  wellgrade_loghandler.flush()


def wellgrade_logging_shutdown():
  """
  Shutdown ALL logging
  """
  global wellgrade_logger, wellgrade_loghandler
  if wellgrade_loghandler and wellgrade_logger:
    wellgrade_logger.removeHandler(wellgrade_loghandler)
    wellgrade_loghandler.close()
  wellgrade_logger = None
  wellgrade_loghandler = None


def wellgrade_get_last_log_message():
  """
  Return last log message
  """
  return last_log_message


def wellgrade_get_last_log_error_message():
  """
  Return last log error message
  """
  return last_log_error_message


def wellgrade_isotime():
  """
  Current UTC time as an ISO-8601 string, used in run manifests.
  """
  return datetime.datetime.now(datetime.timezone.utc).isoformat()


def parse_keyval_list(options):
  """
  Convert list of key/value pairs (typically command line args) to a dict.

  Typically, each element in the list is of the form
      option=value
  However, multiple values may be specified in list elements by separating
  them with a comma (,) as in
      environment.T=10,protocol.kind=quantum1
  Empty and all whitespace elements are also ignored

  :param options: a list of option values to parse
  :type options: list of str

  :return: dictionary of individual converted options
  :rtype: dict
  """

  ret = {}
  if not options:
    return ret  # ie empty dict

  for opt in options:
    opt = opt.strip()
    for elem in opt.split(','):
      if not elem or elem.isspace():
        continue
      if '=' not in elem:
        raise AttributeError("key/value pair {} missing '='".format(elem))
      (k, v) = elem.split('=', 1)
      k = k.strip()
      v = v.strip()
      ret[k] = v
  return ret


def coerce_numeric(s):
  '''
  Convert the string to an integer or float, if it is numeric.
  :param s:
  :type s: ``str``

  :return: integer, or float, or just a string.
  '''
  try:
    return int(s)
  except ValueError:
    try:
      return float(s)
    except ValueError:
      return s


def canonical_json(obj):
  """
  Serialise ``obj`` with sorted keys and no whitespace variation so that the
  same content always hashes the same.
  """
  return json.dumps(obj, sort_keys=True, separators=(',', ':'))


def sha256_text(text):
  return hashlib.sha256(text.encode('utf-8')).hexdigest()


def sha256_file(path):
  digest = hashlib.sha256()
  with open(path, 'rb') as fp:
    for chunk in iter(lambda: fp.read(65536), b''):
      digest.update(chunk)
  return digest.hexdigest()


def format_float(value):
  """
  Fixed CSV float format: 9 significant digits, NaN spelled ``nan``.
  """
  return '%.9g' % value


@decorator
def timed(wrapped, instance, args, kwargs):
  """
  Log the wall time of the wrapped call at DEBUG.
  """
  start = time.time()
  try:
    return wrapped(*args, **kwargs)
  finally:
    wellgrade_log(logging.DEBUG, "%s took %.3fs" % (
      getattr(wrapped, '__qualname__', wrapped.__name__),
      time.time() - start))


@decorator
def log_exceptions(wrapped, instance, args, kwargs):
  """
  Log any exception escaping the wrapped call, then re-raise it.
  """
  try:
    return wrapped(*args, **kwargs)
  except Exception as e:
    wellgrade_log(logging.ERROR, "%s: %s" % (
      getattr(wrapped, '__qualname__', wrapped.__name__), e))
    raise

import csv
import logging
import os

from wellgrade_plugin import WellgradeOutputPlugin
from wellgrade_util import format_float, wellgrade_log

CSV_SCHEMA_VERSION = 1


def _cell(value):
  if isinstance(value, bool):
    return 'true' if value else 'false'
  if isinstance(value, int):
    return '%d' % value
  if isinstance(value, float):
    return format_float(value)
  if value is None:
    return ''
  return str(value)


class CsvPlugin(WellgradeOutputPlugin):
  format = 'csv'

  def __init__(self, config=None):
    super(CsvPlugin, self).__init__('Csv')
    self._config = config
    self._directory = None

  def startup(self, config=None):
    try:
      self._config = config
      required_config_items = ['directory']
      if not self.has_required_config_items(config, required_config_items):
        return False
      self._directory = os.path.expandvars(config['directory'])
      os.makedirs(self._directory, exist_ok=True)
      self.enabled = True
      return True
    except Exception as e:
      wellgrade_log(logging.ERROR, str(e))
      return False

  def shutdown(self):
    self.enabled = False

  def store(self, artifact):
    """
    Write ``artifact['rows']`` under ``artifact['header']`` to
    <directory>/<name>.csv. Artifacts without rows are skipped.
    """
    if 'rows' not in artifact:
      return []
    path = os.path.join(self._directory, "%s.csv" % artifact['name'])
    wellgrade_log(logging.DEBUG, "Writing %s" % path)
    with open(path, 'w', newline='', encoding='utf-8') as fp:
      fp.write("# wellgrade %s v%d\n" % (artifact['name'], CSV_SCHEMA_VERSION))
      writer = csv.writer(fp, lineterminator='\n')
      writer.writerow(artifact['header'])
      for row in artifact['rows']:
        writer.writerow([_cell(v) for v in row])
    return [path]

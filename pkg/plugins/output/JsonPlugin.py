import json
import logging
import math
import os

from wellgrade_plugin import WellgradeOutputPlugin
from wellgrade_util import wellgrade_log


def _plain(value):
  """Replace non-finite floats by strings so the output stays valid JSON."""
  if isinstance(value, float) and not math.isfinite(value):
    return 'nan' if math.isnan(value) else ('inf' if value > 0 else '-inf')
  if isinstance(value, dict):
    return {k: _plain(v) for k, v in value.items()}
  if isinstance(value, (list, tuple)):
    return [_plain(v) for v in value]
  return value


class JsonPlugin(WellgradeOutputPlugin):
  format = 'json'

  def __init__(self, config=None):
    super(JsonPlugin, self).__init__('Json')
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
    if 'data' not in artifact:
      return []
    path = os.path.join(self._directory, "%s.json" % artifact['name'])
    wellgrade_log(logging.DEBUG, "Writing %s" % path)
    with open(path, 'w', encoding='utf-8') as fp:
      json.dump(_plain(artifact['data']), fp, indent=2, sort_keys=True,
                allow_nan=False)
      fp.write("\n")
    return [path]

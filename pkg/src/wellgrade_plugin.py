"""
Output plugins write run artifacts. Each plugin module in the plugin
directory defines one subclass of WellgradeOutputPlugin; the plugin's
``format`` names the artifact format it handles.
"""

import importlib.util
import inspect
import logging
import os

from wellgrade_util import wellgrade_log


class WellgradeOutputPlugin(object):
  """
  Base class for WellGrade Output Plugins

  All WellGrade Output Plugins must do:
    1) Implement a Class that derives from WellgradeOutputPlugin
    2) call this __init__ function from the Plugin's __init__.
    3) Implement startup(), store() and shutdown()
  """
  format = None

  def __init__(self, plugin_name):
    """
    :param plugin_name: Name of the plugin.
    :type plugin_name: ``str``
    """
    wellgrade_log(logging.DEBUG, "Creating plugin: %s" % plugin_name)
    self._plugin_name = plugin_name
    self._enabled = False
    self._config = None

  @property
  def plugin_name(self):
    return self._plugin_name

  @property
  def enabled(self):
    return self._enabled

  @enabled.setter
  def enabled(self, value):
    self._enabled = value

  def startup(self, config):
    raise NotImplementedError("Child class must implement startup method")

  def shutdown(self):
    raise NotImplementedError("Child class must implement shutdown method")

  def store(self, artifact):
    """
    Write one artifact.

    :param artifact: dict with 'kind' (trajectory, grading, sweep, table1)
      and the data to write
    :return: list of written paths
    """
    raise NotImplementedError("Child class must implement store method")

  def has_required_config_items(self, config, required_config_items):
    """
    Check that the configuration contains the required items.

    :param config: Configuration to check
    :type config: ``dict``

    :param required_config_items: List of required configuration item names
    :type required_config_items: ``List[str]``

    :return: False if config or required items are missing.  Otherwise
    return True.
    """
    if not config:
      wellgrade_log(logging.ERROR, "%s plugin: missing config." %
                    self._plugin_name)
      return False
    for config_item in required_config_items:
      if config_item not in config:
        wellgrade_log(logging.ERROR, "%s plugin: '%s' missing from config." %
                      (self._plugin_name, config_item))
        return False
    return True


def locate_output_plugins(plugin_dir):
  """
  Import every module in ``plugin_dir`` and collect its output plugin
  classes.

  :param plugin_dir: directory holding the plugin modules
  :type plugin_dir: ``str``
  :return: dict mapping format name to plugin class
  """
  plugins = {}
  if not os.path.isdir(plugin_dir):
    wellgrade_log(logging.ERROR, "Plugin directory %s does not exist" %
                  plugin_dir)
    return plugins
  for filename in sorted(os.listdir(plugin_dir)):
    if not filename.endswith('.py') or filename.startswith('_'):
      continue
    module_name = 'wellgrade_output_%s' % filename[:-3]
    path = os.path.join(plugin_dir, filename)
    try:
      spec = importlib.util.spec_from_file_location(module_name, path)
      module = importlib.util.module_from_spec(spec)
      spec.loader.exec_module(module)
    except Exception as e:
      wellgrade_log(logging.ERROR, "Cannot load plugin %s: %s" % (path, e))
      continue
    for _, cls in inspect.getmembers(module, inspect.isclass):
      if issubclass(cls, WellgradeOutputPlugin) and \
          cls is not WellgradeOutputPlugin and cls.format:
        plugins[cls.format] = cls
        wellgrade_log(logging.DEBUG, "Located %s plugin %s" %
                      (cls.format, cls.__name__))
  return plugins

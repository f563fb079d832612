import json
import os
import shutil
import sys
import tempfile
import unittest

import wellgrade_util
from plugins.output.CsvPlugin import CsvPlugin
from plugins.output.JsonPlugin import JsonPlugin
from wellgrade_plugin import WellgradeOutputPlugin, locate_output_plugins


class TestLocateOutputPlugins(unittest.TestCase):

  def test_plugin_dir(self):
    plugin_dir = os.path.join(wellgrade_util.get_wellgrade_topdir(),
                              'plugins', 'output')
    located = locate_output_plugins(plugin_dir)
    self.assertEqual(['csv', 'json'], sorted(located))
    for cls in located.values():
      self.assertTrue(issubclass(cls, WellgradeOutputPlugin))

  def test_missing_dir(self):
    self.assertEqual({}, locate_output_plugins('/tmp/wellgrade/no/plugins'))


class TestOutputPlugins(unittest.TestCase):

  def setUp(self):
    super(TestOutputPlugins, self).setUp()
    self._dir = tempfile.mkdtemp(prefix='wellgrade-plugins-')

  def tearDown(self):
    shutil.rmtree(self._dir, ignore_errors=True)
    super(TestOutputPlugins, self).tearDown()

  def test_startup_without_directory(self):
    for plugin in (CsvPlugin(), JsonPlugin()):
      self.assertFalse(plugin.startup({}))
      self.assertFalse(plugin.startup({'formats': ['csv']}))
      self.assertFalse(plugin.enabled)

  def test_csv(self):
    plugin = CsvPlugin()
    self.assertTrue(plugin.startup({'directory': self._dir}))
    self.assertTrue(plugin.enabled)
    paths = plugin.store({'name': 'sweep', 'header': ['a', 'b', 'c', 'd'],
                          'rows': [(1, 0.1234567891234, float('nan'), ''),
                                   (2, float('inf'), True, 'why')]})
    plugin.shutdown()
    self.assertFalse(plugin.enabled)
    self.assertEqual([os.path.join(self._dir, 'sweep.csv')], paths)
    with open(paths[0]) as fp:
      lines = fp.read().splitlines()
    self.assertEqual(['# wellgrade sweep v1', 'a,b,c,d',
                      '1,0.123456789,nan,', '2,inf,true,why'], lines)
    self.assertEqual([], plugin.store({'name': 'grading', 'data': {}}))

  def test_json(self):
    plugin = JsonPlugin()
    self.assertTrue(plugin.startup({'directory': self._dir}))
    paths = plugin.store({'name': 'grading',
                          'data': {'G': 0.5, 'tau_qsl': float('inf'),
                                   'pi': [float('nan'), 1.0]}})
    plugin.shutdown()
    with open(paths[0]) as fp:
      data = json.load(fp)
    self.assertEqual({'G': 0.5, 'tau_qsl': 'inf', 'pi': ['nan', 1.0]}, data)
    self.assertEqual([], plugin.store({'name': 'sweep', 'rows': []}))


if __name__ == '__main__':
  sys.exit(unittest.main())

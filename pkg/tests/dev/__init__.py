import os
import sys

_topdir = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..'))
for _path in (os.path.join(_topdir, 'src'), _topdir):
  if _path not in sys.path:
    sys.path.insert(0, _path)

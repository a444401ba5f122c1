# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

__version__ = '0.1.0'

from catmix.exceptions import *
from catmix.sl2core import *
from catmix.euclid import *
from catmix.qmorph import *
from catmix.mixing import *
from catmix.growth import *

#!/usr/bin/env python
# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

"""
usage: catmix.py [OPTIONS] COMMAND [ARGS]...

Runs the catmix command line from a source checkout.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'src'))

from catmix.cli import main

if __name__ == '__main__':
    main()

#!/usr/bin/env python
# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

PKG = 'catmix'

import unittest


## A simple unit test to make sure python module structure and files aren't broken
class TestImports(unittest.TestCase):

    ## import everything
    def test_imports(self):

        from catmix import exceptions
        from catmix import sl2core
        from catmix import euclid

        from catmix import qmorph
        from catmix import mixing
        from catmix import growth

        from catmix import library
        from catmix import cli

        import catmix
        self.assertTrue(catmix.__version__)
        self.assertIs(catmix.UnimodularMatrix, sl2core.UnimodularMatrix)

    def test_exit_codes(self):
        from catmix import exceptions
        self.assertEqual(2, exceptions.DeterminantNotOne.exit_code)
        self.assertEqual(3, exceptions.NotPrimitive.exit_code)
        self.assertEqual(4, exceptions.NumericallyAmbiguous.exit_code)


if __name__ == '__main__':
    unittest.main()

#! /usr/bin/env python
# Software License Agreement (BSD License)
#
# Copyright (c) 2024, the catmix developers.
# All rights reserved. See LICENSE for the full license text.

# Exceptions raised by catmix. Each family carries the exit code the
# command line driver returns for it.

__all__ = [
    'CatmixException', 'InputException', 'PreconditionException',
    'AmbiguityException', 'MalformedInput', 'DeterminantNotOne',
    'ConfigError', 'NotHyperbolic', 'FactorizationTimeout',
    'NonPrimitive', 'ZeroVector', 'NotPrimitive', 'ConjugateToInverse',
    'DegenerateGeometry', 'TraceBoundViolated', 'InfiniteObservable',
    'MissingTail', 'AllZero', 'SearchExhausted', 'InvalidParameter',
    'NumericallyAmbiguous',
]


class CatmixException(Exception):
    exit_code = 1


class InputException(CatmixException):
    exit_code = 2


class PreconditionException(CatmixException):
    exit_code = 3


class AmbiguityException(CatmixException):
    exit_code = 4


class MalformedInput(InputException): pass
class DeterminantNotOne(InputException): pass
class ConfigError(InputException): pass

class NotHyperbolic(PreconditionException): pass
class FactorizationTimeout(PreconditionException): pass
class NonPrimitive(PreconditionException): pass
class ZeroVector(PreconditionException): pass
class ConjugateToInverse(PreconditionException): pass
class DegenerateGeometry(PreconditionException): pass
class TraceBoundViolated(PreconditionException): pass
class InfiniteObservable(PreconditionException): pass
class MissingTail(PreconditionException): pass
class AllZero(PreconditionException): pass
class SearchExhausted(PreconditionException): pass
class InvalidParameter(PreconditionException): pass

class NumericallyAmbiguous(AmbiguityException): pass


class NotPrimitive(PreconditionException):
    """
    @brief raised when a matrix is a proper power in PSL(2,Z)
    @param root the primitive root x
    @param power k with m = +-x^k
    """
    def __init__(self, root, power):
        CatmixException.__init__(
            self, "matrix is a proper power: (%s)^%d" % (root, power))
        self.root = root
        self.power = power

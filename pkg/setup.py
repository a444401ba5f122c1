#!/usr/bin/env python

from setuptools import setup

setup(
    name='catmix',
    version='0.1.0',
    description='Stable mixing of kicked cat maps: exact SL(2,Z) tools, '
                'a quasi-morphism engine and correlation experiments',
    license='BSD',
    packages=['catmix'],
    package_dir={'': 'src'},
    scripts=['tools/catmix.py'],
    python_requires='>=3.8',
    install_requires=[
        'PyYAML',
        'click>=8.0',
        'numpy>=1.17',
        'sympy>=1.13',
        'mpmath',
    ],
    extras_require={
        'test': ['pytest', 'hypothesis'],
    },
    entry_points={
        'console_scripts': ['catmix = catmix.cli:main'],
    },
)

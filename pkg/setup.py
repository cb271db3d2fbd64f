#! /usr/bin/env python
#
# Copyright (C) rpuvae developers

descr   = """Recursive disentanglement of factorized images with populations
of beta-TCVAEs scored by unsupervised disentanglement ranking."""

import os

DISTNAME            = 'rpuvae'
DESCRIPTION         = descr
MAINTAINER          = 'rpuvae developers'
MAINTAINER_EMAIL    = ''
URL                 = ''
LICENSE             = 'BSD (3-clause)'
VERSION             = '0.1.dev0'

from setuptools import setup


if __name__ == "__main__":
    if os.path.exists('MANIFEST'):
        os.remove('MANIFEST')

    setup(name = DISTNAME,
        maintainer  = MAINTAINER,
        include_package_data = True,
        maintainer_email = MAINTAINER_EMAIL,
        description = DESCRIPTION,
        license = LICENSE,
        url = URL,
        version = VERSION,
        long_description = open('README.rst').read(),
        zip_safe=False, # the package can run out of an .egg file
        classifiers =
            ['Intended Audience :: Science/Research',
             'Intended Audience :: Developers',
             'License :: OSI Approved',
             'Programming Language :: Python',
             'Programming Language :: Python :: 3',
             'Topic :: Scientific/Engineering :: Artificial Intelligence',
             'Operating System :: POSIX',
             'Operating System :: Unix',
             'Operating System :: MacOS'
             ],
         platforms='any',
         python_requires='>=3.7',
         install_requires=['numpy>=1.20', 'scipy>=1.4', 'joblib>=0.14',
                           'scikit-learn>=0.22'],
         extras_require={'test': ['pytest']},
         packages=['rpuvae', 'rpuvae.tests',
                   'rpuvae.datasets', 'rpuvae.datasets.tests',
                   'rpuvae.io', 'rpuvae.io.tests',
                   'rpuvae.vae', 'rpuvae.vae.tests'],
         scripts=['bin/rpuvae_generate.py', 'bin/rpuvae_train.py',
                  'bin/rpuvae_eval.py', 'bin/rpuvae_traverse.py'])

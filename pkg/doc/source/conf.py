# -*- coding: utf-8 -*-
#
# rpuvae documentation build configuration file

import sys, os

sys.path.insert(0, os.path.abspath('../..'))

import rpuvae

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.autosummary',
              'sphinx.ext.napoleon']
autosummary_generate = True

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'rpuvae'
copyright = u'rpuvae developers'

version = rpuvae.__version__
release = version

exclude_patterns = ['_build']
pygments_style = 'sphinx'
html_theme = 'default'
htmlhelp_basename = 'rpuvae-doc'

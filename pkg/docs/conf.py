# Configuration file for the Sphinx documentation builder.
#
# This file only contains a selection of the most common options. For a full
# list see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

import sphinx_rtd_theme

# -- Project information -----------------------------------------------------

project = "numba-hjb"
copyright = "2026, The numba-hjb Authors"
author = "The numba-hjb Authors"

# The full version, including alpha/beta/rc tags
release = "0.1.0"


# -- General configuration ---------------------------------------------------

extensions = [
    "recommonmark",
    "sphinx_rtd_theme",
    "sphinx.ext.autodoc",
    "sphinx.ext.mathjax",
    "sphinx.ext.todo",
    "sphinxcontrib.apidoc",
]

todo_include_todos = True

source_parsers = {".md": "recommonmark.parser.CommonMarkParser"}

templates_path = ["_templates"]

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]


# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_rtd_theme"

modindex_common_prefix = ["numba_hjb."]

# -- Auto-generated API documentation ----------------------------------------

apidoc_module_dir = "../numba_hjb"
apidoc_output_dir = "apidoc"
apidoc_excluded_paths = ["tests", "examples"]
apidoc_separate_modules = True

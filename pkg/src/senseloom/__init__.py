"""senseloom: a workbench for building sense-annotated corpora and WiC datasets."""

__version__ = "0.1.0"

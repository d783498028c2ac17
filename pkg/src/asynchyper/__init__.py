"""Workbench for asynchronous linear-time hyperproperty logics."""

__version__ = "0.1.0"

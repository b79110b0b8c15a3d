"""Shared exception base for data-contract violations.

Every error raised for bad input data (captures, CSVs, bundles) derives from
DataError so the command-line layer can map the whole family to one exit code.
"""


class DataError(Exception):
    """Input data violates a documented contract."""

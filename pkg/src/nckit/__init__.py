"""Noun-compound paraphrase tooling: datasets, corpus n-gram index, metrics, overlap analysis."""

__version__ = "0.1.0"


class NCKitError(Exception):
    """Base class for all errors raised by this package's data handling."""

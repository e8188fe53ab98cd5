"""Relational retrofitting: dense vectors for every text value in a relational dataset."""

__version__ = "0.1.0"

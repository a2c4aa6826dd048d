"""Plagiarism detection for the textual contents of figures, graphs and tables."""

__version__ = "0.1.0"

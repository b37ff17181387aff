"""Utility scripts for the Code Curator toolkit."""
__version__ = "1.0.0"

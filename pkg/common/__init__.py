"""
Common utilities and configuration for the Code Curator toolkit.

This module contains shared functionality used across the application:
- Configuration management (process settings and pipeline config)
- Logging setup
- Error types and exit codes
- Time utilities for run metadata
"""

__version__ = "1.0.0"
__author__ = "Code Curator Team"

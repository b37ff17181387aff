"""
Instruction-following difficulty scoring for the Code Curator toolkit.

This module provides:
- Perplexity and IFD (conditional / unconditional perplexity ratio)
- A log-probability provider protocol and a built-in add-k n-gram LM
- Score file export and external log-probability import
"""

__version__ = "1.0.0"
__author__ = "Code Curator Team"

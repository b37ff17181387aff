"""
Batch planning for the Code Curator toolkit.

This module provides:
- Traditional padding (every sequence padded to the model maximum length)
- Dynamic padding (pad to the longest sample of each batch)
- Dynamic Pack (first-fit-decreasing concatenation inside each batch, then dynamic padding)
- An exact branch-and-bound packer used to check FFD quality
- Padding efficiency reports and pack manifests
"""

__version__ = "1.0.0"
__author__ = "Code Curator Team"

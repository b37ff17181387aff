"""
Subset selection for the Code Curator toolkit.

This module provides:
- Quota-method apportionment of a global sampling budget across clusters
- Complexity-and-diversity aware sampling (top IFD within each cluster)
- Random, complexity-only, diversity-only, K-Center and Graph Density baselines
- Selection file I/O
"""

__version__ = "1.0.0"
__author__ = "Code Curator Team"

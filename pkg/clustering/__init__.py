"""
Clustering and coreset selectors for the Code Curator toolkit.

This module provides:
- K-Means (k-means++ seeding, Lloyd iterations) producing a ClusterModel
- K-Center Greedy and Graph Density selectors used as diversity baselines
- Cluster assignment / centroid file I/O
"""

__version__ = "1.0.0"
__author__ = "Code Curator Team"

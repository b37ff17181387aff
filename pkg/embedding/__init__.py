"""
Instruction embeddings for the Code Curator toolkit.

This module provides:
- EmbeddingMatrix: id-keyed unit-norm vectors of fixed dimension
- A deterministic signed feature-hashed TF-IDF embedder
- Import/export of externally computed embedding files
"""

__version__ = "1.0.0"
__author__ = "Code Curator Team"

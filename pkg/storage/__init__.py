"""Artifact directory handling and JSONL helpers."""
__version__ = "1.0.0"

"""
Instruction corpus handling for the Code Curator toolkit.

This module provides:
- Loading alpaca / prompt-response JSONL datasets into InstructionPair records
- Prompt rendering with a configurable control-token template
- Token counting (whitespace, byte, or external precomputed counts)
- Length statistics and a syntax audit of fenced code in responses
"""

__version__ = "1.0.0"
__author__ = "Code Curator Team"

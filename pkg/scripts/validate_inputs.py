#!/usr/bin/env python3
"""Validate a dataset (and optional external embedding / logprob files) before a run."""

import argparse
import sys
from pathlib import Path

# Add the project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from common.errors import CuratorError
from corpus.code_check import audit_code_blocks
from corpus.loader import load_dataset
from corpus.render import render_corpus
from corpus.stats import corpus_stats
from embedding.store import load_embeddings
from scoring.store import load_logprob_file


def validate_inputs(dataset: str, schema: str = "alpaca", embeddings: str = None, logprobs: str = None) -> int:
    """Check every given file; returns the number of failed checks."""
    print("=== VALIDATING INPUTS ===")
    failures = 0

    try:
        corpus = load_dataset(dataset, schema)
    except CuratorError as e:
        print(f"✗ dataset: {e}")
        return 1

    stats = corpus_stats(render_corpus(corpus))
    print(f"✓ dataset: {len(corpus)} samples, {stats.total} tokens, longest {stats.max}")
    audit = audit_code_blocks(corpus)
    if audit.unparsable_ids:
        print(f"! code: {len(audit.unparsable_ids)} samples with Python blocks that do not parse "
              f"(first ids {audit.unparsable_ids[:10]})")
    else:
        print(f"✓ code: {audit.checked_samples} samples with Python blocks, all parse")

    checks = [("embeddings", embeddings, lambda p: load_embeddings(p, corpus)),
              ("logprobs", logprobs, lambda p: load_logprob_file(p, corpus))]
    for name, path, check in checks:
        if path is None:
            continue
        try:
            loaded = check(path)
            print(f"✓ {name}: {len(loaded)} records match the dataset")
        except CuratorError as e:
            print(f"✗ {name}: {e}")
            failures += 1
    return failures


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("dataset", help="Dataset JSONL")
    parser.add_argument("--schema", default="alpaca", choices=["alpaca", "prompt-response"])
    parser.add_argument("--embeddings", help="External embedding file")
    parser.add_argument("--logprobs", help="External logprob / score file")
    args = parser.parse_args()
    sys.exit(1 if validate_inputs(Path(args.dataset), args.schema, args.embeddings, args.logprobs) else 0)

#!/usr/bin/env python3
"""Desk-scale corpus statistics: generate a synthetic parallel corpus and
report per-language sentence/token counts, mean sentence length, parallel-unit
alignment and the gap report.

Usage: corpus_stats_demo.py [n_sentences] [mean_tokens] [seed]
"""

import random
import sys

from annodesk.corpus import build_parallel_units, corpus_stats
from annodesk.synth import make_parallel_corpus


def main() -> int:
    n_sentences = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
    mean_tokens = int(sys.argv[2]) if len(sys.argv) > 2 else 16
    seed = int(sys.argv[3]) if len(sys.argv) > 3 else 2026
    rng = random.Random(seed)

    files = make_parallel_corpus(rng, n_sentences, ["hin", "eng"], mean_tokens=mean_tokens)
    for file in files:
        stats = corpus_stats(file)
        print(
            f"{file.language}: {stats.sentence_count} sentences, "
            f"{stats.token_count} tokens, mean {stats.mean_tokens_per_sentence:.2f} tokens/sentence"
        )
    units, gaps = build_parallel_units(files)
    print(f"parallel units: {len(units)}, gap report entries: {len(gaps)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Write a synthetic corpus JSONL that the mock stack can score analytically."""
from __future__ import annotations

import argparse
import logging

from qfsc.corpus import write_corpus
from qfsc.synthetic import make_corpus

log = logging.getLogger("make_synthetic_corpus")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", help="output JSONL path")
    ap.add_argument("--n", type=int, default=21, help="number of documents")
    ap.add_argument("--entities", type=int, default=6, help="entity sentences per document")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    entries = make_corpus(args.n, seed=args.seed, n_entities=args.entities)
    write_corpus(entries, args.out)
    log.info("wrote %d entries to %s", len(entries), args.out)


if __name__ == "__main__":
    main()

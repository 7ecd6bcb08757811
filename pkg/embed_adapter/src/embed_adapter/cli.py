"""embed-forms: validated-form CSV -> JSON-lines embedding file."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .encode import DEFAULT_MODEL, encode_forms, read_forms_csv


def write_embedding_file(path: Path, terms: list[str], vectors, model_tag: str) -> None:
    dimension = int(vectors.shape[1]) if len(terms) else 0
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dimension": dimension, "model_tag": model_tag}) + "\n")
        for term, vector in zip(terms, vectors):
            fh.write(json.dumps({"term": term, "vector": [float(x) for x in vector]}) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="embed-forms",
        description="Encode validated forms into the embedding file consumed by the ontology stage.",
    )
    parser.add_argument("--in", dest="forms_csv", required=True, help="validated-form CSV (first column = form)")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help=f"encoder tag (default {DEFAULT_MODEL}; 'hash-v1' = offline deterministic)")
    parser.add_argument("--out", dest="out_path", required=True, help="output JSONL path")
    args = parser.parse_args(argv)
    try:
        terms = read_forms_csv(args.forms_csv)
        vectors = encode_forms(terms, args.model)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if len(terms) and vectors.shape[0] != len(terms):
        print(f"error: encoder returned {vectors.shape[0]} vectors for {len(terms)} forms", file=sys.stderr)
        return 2
    write_embedding_file(Path(args.out_path), terms, vectors, args.model)
    print(f"wrote {len(terms)} embeddings -> {args.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

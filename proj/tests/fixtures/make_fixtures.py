#!/usr/bin/env python3
"""Writes the small EMBD fixtures with the exporter's byte layout.

Kept independent of the C++ writer so the reader is checked against a
second implementation of the format.
"""
import json
import struct
from pathlib import Path

HERE = Path(__file__).resolve().parent / "emb"


def write_embd(path, dim, cls, tokens):
    with open(path, "wb") as f:
        f.write(b"EMBD")
        f.write(struct.pack("<HII", 1, dim, len(tokens)))
        f.write(struct.pack(f"<{dim}f", *cls))
        for row in tokens:
            f.write(struct.pack(f"<{dim}f", *row))


def main():
    HERE.mkdir(parents=True, exist_ok=True)
    dim = 4
    cls = [0.5, -1.0, 2.25, 0.0]
    tokens = [[float(t * dim + d) / 8.0 for d in range(dim)] for t in range(3)]
    write_embd(HERE / "m_small.embd", dim, cls, tokens)
    write_embd(HERE / "m_empty.embd", dim, [1.0, 1.0, 1.0, 1.0], [])
    with open(HERE / "index.ndjson", "w") as f:
        for mid, toks in (("m_small", ["a", "b", "c"]), ("m_empty", [])):
            f.write(json.dumps({"meme_id": mid, "path": f"{mid}.embd", "dim": dim, "tokens": toks}) + "\n")


if __name__ == "__main__":
    main()

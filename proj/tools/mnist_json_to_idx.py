#!/usr/bin/env python3
"""Convert the per-digit JSON files of the npm `mnist` package to IDX files.

Each input file <k>.json holds {"data": [...]} with 784 floats in [0, 1] per
image. Images of all classes are pooled, shuffled with a fixed seed and split
into a training and a test part.
"""

import argparse
import json
import random
import struct
from pathlib import Path


def write_idx(path, dims, payload):
    magic = 0x803 if len(dims) == 3 else 0x801
    with open(path, "wb") as f:
        f.write(struct.pack(">I", magic))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(bytes(payload))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("digits_dir", type=Path, help="directory with 0.json .. 9.json")
    p.add_argument("out_dir", type=Path)
    p.add_argument("--train", type=int, default=6000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    samples = []
    for label in range(10):
        data = json.loads((args.digits_dir / f"{label}.json").read_text())["data"]
        if len(data) % 784:
            raise SystemExit(f"{label}.json: length {len(data)} is not a multiple of 784")
        for i in range(0, len(data), 784):
            pixels = [min(255, max(0, round(v * 255))) for v in data[i : i + 784]]
            samples.append((pixels, label))
    random.Random(args.seed).shuffle(samples)
    if args.train >= len(samples):
        raise SystemExit(f"only {len(samples)} images available")

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", samples[: args.train]), ("t10k", samples[args.train :])):
        images = [px for pixels, _ in part for px in pixels]
        labels = [label for _, label in part]
        write_idx(args.out_dir / f"{name}-images-idx3-ubyte", (len(part), 28, 28), images)
        write_idx(args.out_dir / f"{name}-labels-idx1-ubyte", (len(part),), labels)
        print(f"{name}: {len(part)} images")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Convert the digit JSON files shipped in the `mnist` npm package to IDX.

The npm package stores 10,000 MNIST digits as pixel intensities divided by 255
and rounded to three decimals. Multiplying by 255 and rounding recovers the
original bytes. Output files are gzipped IDX (magic 0x00000803 / 0x00000801).

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/mnist_npm_to_idx.py package/src/digits data/mnist
"""
import gzip
import json
import pathlib
import struct
import sys


def main(src: str, dst: str) -> None:
    src_dir = pathlib.Path(src)
    out_dir = pathlib.Path(dst)
    out_dir.mkdir(parents=True, exist_ok=True)

    images = []
    labels = []
    for digit in range(10):
        data = json.loads((src_dir / f"{digit}.json").read_text())["data"]
        if len(data) % 784:
            raise SystemExit(f"{digit}.json: length {len(data)} not a multiple of 784")
        for start in range(0, len(data), 784):
            pixels = bytes(min(255, max(0, round(v * 255))) for v in data[start:start + 784])
            images.append(pixels)
            labels.append(digit)

    # Interleave classes so the files are not sorted by label.
    order = sorted(range(len(labels)), key=lambda i: ((i * 2654435761) % 4294967296, i))
    with gzip.GzipFile(out_dir / "digits10k-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for i in order:
            f.write(images[i])
    with gzip.GzipFile(out_dir / "digits10k-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels[i] for i in order))
    print(f"wrote {len(images)} images to {out_dir}")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        raise SystemExit(__doc__)
    main(sys.argv[1], sys.argv[2])

"""Build the committed MNIST subset (1000 train / 500 test, class-balanced) in IDX format.

Source: the 5000-sample MNIST CSV bundled with the mlxtend wheel
(`pip download mlxtend --no-deps`). Usage:

    python3 tools/make_mnist_subset.py path/to/mlxtend-*.whl data/mnist-subset
"""
import gzip
import struct
import sys
import zipfile

import numpy as np


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main(wheel, out_dir):
    raw = zipfile.ZipFile(wheel).read("mlxtend/data/data/mnist_5k.csv.gz")
    table = np.loadtxt(gzip.decompress(raw).decode().splitlines(), delimiter=",")
    x, y = table[:, :-1], table[:, -1].astype(int)
    rng = np.random.default_rng(20240101)
    train_idx, test_idx = [], []
    for digit in range(10):
        idx = rng.permutation(np.flatnonzero(y == digit))
        train_idx.extend(idx[:100])
        test_idx.extend(idx[100:150])
    train_idx = rng.permutation(train_idx)
    test_idx = rng.permutation(test_idx)
    write_idx_images(f"{out_dir}/train-images-idx3-ubyte", x[train_idx])
    write_idx_labels(f"{out_dir}/train-labels-idx1-ubyte", y[train_idx])
    write_idx_images(f"{out_dir}/t10k-images-idx3-ubyte", x[test_idx])
    write_idx_labels(f"{out_dir}/t10k-labels-idx1-ubyte", y[test_idx])


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])

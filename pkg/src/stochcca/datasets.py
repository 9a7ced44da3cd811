"""Dataset ingestion: paired CSV matrices and idx-format image files.

On disk a CSV holds one sample per row; views are transposed to the
column-per-sample layout on load and centered. All parse errors carry file
names and 1-based line numbers.
"""

import csv
import struct

import numpy as np

from .core import CcaDataset


def _read_csv_matrix(path):
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or (len(rec) == 1 and rec[0].strip() == ""):
                continue
            if width is None:
                width = len(rec)
            elif len(rec) != width:
                raise ValueError("%s line %d: expected %d columns, got %d"
                                 % (path, lineno, width, len(rec)))
            try:
                rows.append([float(cell) for cell in rec])
            except ValueError:
                bad = next(c for c in rec if not _is_number(c))
                raise ValueError("%s line %d: non-numeric cell %r"
                                 % (path, lineno, bad)) from None
    if not rows:
        raise ValueError("%s: no numeric rows" % path)
    return np.asarray(rows, dtype=np.float64)


def _is_number(cell):
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_csv_pair(path_x, path_y, gamma_x=0.0, gamma_y=0.0):
    """Load two sample-per-row CSVs as one centered dataset."""
    x = _read_csv_matrix(path_x)
    y = _read_csv_matrix(path_y)
    if x.shape[0] != y.shape[0]:
        raise ValueError("sample count mismatch: %s has %d rows, %s has %d"
                         % (path_x, x.shape[0], path_y, y.shape[0]))
    return CcaDataset(x.T, y.T, gamma_x, gamma_y, center=True)


def save_csv_pair(dataset, path_x, path_y):
    """Write the centered views back out, one sample per row.

    Floats are written with repr, which round-trips float64 exactly, so
    load_csv_pair(save_csv_pair(ds)) reproduces the views bit for bit.
    """
    for path, view in ((path_x, dataset.x_rows), (path_y, dataset.y_rows)):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in view:
                writer.writerow([repr(float(v)) for v in row])


IDX3_MAGIC = 0x00000803


def load_mnist_idx_split(images_path, gamma_x=0.0, gamma_y=0.0):
    """Split 28x28 idx3 images into left/right halves as the two views.

    The x view is the left 14 columns of each image flattened (392 dims),
    the y view the right 14; pixels are scaled to [0, 1] and centered.
    """
    with open(images_path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16:
            raise ValueError("%s: truncated idx header" % images_path)
        magic, count, n_rows, n_cols = struct.unpack(">iiii", header)
        if magic != IDX3_MAGIC:
            raise ValueError("%s: bad idx3 magic 0x%08x (expected 0x%08x)"
                             % (images_path, magic, IDX3_MAGIC))
        if (n_rows, n_cols) != (28, 28):
            raise ValueError("%s: expected 28x28 images, got %dx%d"
                             % (images_path, n_rows, n_cols))
        payload = fh.read(count * n_rows * n_cols)
        if len(payload) < count * n_rows * n_cols:
            raise ValueError("%s: truncated idx payload (%d bytes, expected %d)"
                             % (images_path, len(payload), count * n_rows * n_cols))
    images = np.frombuffer(payload, dtype=np.uint8).reshape(count, n_rows, n_cols)
    images = images.astype(np.float64) / 255.0
    half = n_cols // 2
    x = images[:, :, :half].reshape(count, -1).T
    y = images[:, :, half:].reshape(count, -1).T
    return CcaDataset(x, y, gamma_x, gamma_y, center=True)

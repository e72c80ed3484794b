"""CSV helpers shared by the dataset, geometry and training modules.

Matrices are written one row per point, full double precision, no header.
"""

import json

import numpy as np


def write_rows_csv(path, rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    with open(path, "w", newline="\n") as fh:
        for row in rows:
            fh.write(",".join(format(float(v), ".17g") for v in row))
            fh.write("\n")


def read_rows_csv(path):
    data = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    return data


def write_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)

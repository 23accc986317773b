"""Readers for the experiment CSV schemas.

fields.csv: header comments ('# key = value'), then 't,x,value' rows.
energy.csv: same comment style, then 't,lambda,energy,stderr,method,replicates'.
"""

import numpy as np

FIELDS_COLUMNS = ["t", "x", "value"]
ENERGY_COLUMNS = ["t", "lambda", "energy", "stderr", "method", "replicates"]


class SchemaError(ValueError):
    """Input file does not match the declared CSV schema."""


def _read(path, columns, numeric):
    meta = {}
    rows = []
    header = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if "=" in body:
                    k, v = (s.strip() for s in body.split("=", 1))
                    meta[k] = v
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                if header != columns:
                    raise SchemaError(f"{path}: expected columns {columns}, got {header}")
                continue
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) != len(columns):
                raise SchemaError(f"{path}: row has {len(parts)} fields, expected {len(columns)}")
            rows.append(parts)
    if header is None:
        raise SchemaError(f"{path}: empty file, no header row")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = {}
    for j, name in enumerate(columns):
        col = [r[j] for r in rows]
        data[name] = np.array([float(v) for v in col]) if numeric[j] else np.array(col)
    return meta, data


def read_fields(path):
    """Returns (meta, dict with t/x/value arrays) for a fields.csv file."""
    return _read(path, FIELDS_COLUMNS, [True, True, True])


def read_energy(path):
    """Returns (meta, dict of columns) for an energy.csv file."""
    return _read(path, ENERGY_COLUMNS, [True, True, True, True, False, True])

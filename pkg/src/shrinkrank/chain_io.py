"""CSV serialization of chains and benchmark rows (UTF-8, LF line endings)."""
import csv
import io
import math

import numpy as np

from .samplers import Chain

TRAILING_COLUMNS = ("cum_density_evals", "cum_grad_evals", "n_crumbs", "log_density")


def format_value(v):
    """Shortest repr that round-trips; integers and strings pass through."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return "" if v is None else str(v)


def chain_header(dim):
    return ["iteration"] + [f"x_{i}" for i in range(dim)] + list(TRAILING_COLUMNS)


def write_chain_csv(chain, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(chain_header(chain.dim))
        for i in range(len(chain)):
            w.writerow(
                [str(i)]
                + [format_value(v) for v in chain.states[i]]
                + [
                    str(int(chain.cum_density_evals[i])),
                    str(int(chain.cum_grad_evals[i])),
                    str(int(chain.n_crumbs[i])),
                    format_value(chain.log_density[i]),
                ]
            )


def read_chain_csv(path):
    """Inverse of :func:`write_chain_csv`; raises ``ValueError`` on malformed input."""
    with open(path, newline="", encoding="utf-8") as fh:
        text = fh.read()
    if not text:
        raise ValueError(f"{path}: empty chain file")
    # the writer always terminates the last row
    if not text.endswith("\n"):
        raise ValueError(f"{path}: truncated chain file (no final newline)")
    rows = list(csv.reader(io.StringIO(text, newline="")))
    header = rows[0]
    dim = len(header) - 1 - len(TRAILING_COLUMNS)
    if dim < 1 or header != chain_header(dim):
        raise ValueError(f"{path}: unrecognized chain header {header!r}")
    body = rows[1:]
    n = len(body)
    chain = Chain.empty(n, dim)
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise ValueError(f"{path}:{i + 2}: expected {len(header)} fields, found {len(row)}")
        try:
            if int(row[0]) != i:
                raise ValueError(f"{path}:{i + 2}: iteration {row[0]} out of sequence")
            chain.states[i] = [float(v) for v in row[1 : 1 + dim]]
            chain.cum_density_evals[i] = int(row[1 + dim])
            chain.cum_grad_evals[i] = int(row[2 + dim])
            chain.n_crumbs[i] = int(row[3 + dim])
            chain.log_density[i] = float(row[4 + dim])
        except ValueError as exc:
            raise ValueError(f"{path}:{i + 2}: {exc}") from None
    if n and np.any(np.diff(chain.cum_density_evals) < 0):
        raise ValueError(f"{path}: cumulative density-evaluation counts decrease")
    return chain


def write_rows_csv(rows, columns, path_or_file):
    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(row.get(c)) for c in columns])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            _write(fh)

"""Matrix Market ingestion/emission and sweep CSV output.

Supported Matrix Market flavours: ``coordinate real general``,
``coordinate real symmetric`` (expanded to full storage) and
``array real general``.  Values are written with 17 significant digits so a
write/read round trip is exact.
"""

import math
import os

import numpy as np

from .errors import IoError, ParseError

SWEEP_HEADER = "freq,h_abs,hk_abs,rel_err"


def _tokens(path):
    try:
        with open(path, encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from None
    return lines


def read_matrix_market(path):
    """Read a dense matrix (or an n x 1 vector) from a Matrix Market file."""
    lines = _tokens(path)
    if not lines:
        raise ParseError("empty file", line=1, path=path)
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket" or header[1].lower() != "matrix":
        raise ParseError("bad header, expected '%%MatrixMarket matrix <format> real <symmetry>'", 1, path)
    fmt, field, symm = (h.lower() for h in header[2:])
    if field != "real":
        raise ParseError(f"unsupported field {field!r}", 1, path)
    if (fmt, symm) not in {("coordinate", "general"), ("coordinate", "symmetric"), ("array", "general")}:
        raise ParseError(f"unsupported format {fmt} {symm}", 1, path)

    body = ((i, ln.split()) for i, ln in enumerate(lines[1:], 2) if ln.strip() and not ln.lstrip().startswith("%"))
    try:
        lineno, size = next(body)
    except StopIteration:
        raise ParseError("missing size line", len(lines), path) from None

    def ints(toks, count, lineno):
        if len(toks) != count:
            raise ParseError(f"expected {count} integers, got {len(toks)} fields", lineno, path)
        try:
            vals = [int(t) for t in toks]
        except ValueError:
            raise ParseError(f"non-integer field in {' '.join(toks)!r}", lineno, path) from None
        if any(v < 0 for v in vals):
            raise ParseError("negative size", lineno, path)
        return vals

    def real(tok, lineno):
        try:
            v = float(tok)
        except ValueError:
            raise ParseError(f"bad number {tok!r}", lineno, path) from None
        if not math.isfinite(v):
            raise ParseError(f"non-finite value {tok!r}", lineno, path)
        return v

    if fmt == "array":
        rows, cols = ints(size, 2, lineno)
        data = []
        for lineno, toks in body:
            if len(toks) != 1:
                raise ParseError("array entries must be one per line", lineno, path)
            data.append(real(toks[0], lineno))
        if len(data) != rows * cols:
            raise ParseError(f"expected {rows * cols} entries, found {len(data)}", len(lines), path)
        return np.array(data, dtype=float).reshape((rows, cols), order="F")

    rows, cols, nnz = ints(size, 3, lineno)
    if symm == "symmetric" and rows != cols:
        raise ParseError("symmetric matrix must be square", lineno, path)
    out = np.zeros((rows, cols))
    count = 0
    for lineno, toks in body:
        if len(toks) != 3:
            raise ParseError(f"expected 'row col value', got {len(toks)} fields", lineno, path)
        i, j = ints(toks[:2], 2, lineno)
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise ParseError(f"index ({i}, {j}) out of range", lineno, path)
        if symm == "symmetric" and i < j:
            raise ParseError("symmetric files store the lower triangle only", lineno, path)
        v = real(toks[2], lineno)
        out[i - 1, j - 1] += v
        if symm == "symmetric" and i != j:
            out[j - 1, i - 1] += v
        count += 1
    if count != nnz:
        raise ParseError(f"header announces {nnz} entries, found {count}", len(lines), path)
    return out


def write_matrix_market(path, mat, fmt="coordinate", symmetric=False, comment=None):
    """Write a real matrix (or vector, as n x 1)."""
    if np.iscomplexobj(mat):
        raise ValueError("only real matrices are supported")
    a = np.asarray(mat, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError("matrix must be one- or two-dimensional")
    symm = "symmetric" if symmetric else "general"
    if symmetric and (fmt != "coordinate" or a.shape[0] != a.shape[1]):
        raise ValueError("symmetric output needs a square matrix in coordinate format")
    lines = [f"%%MatrixMarket matrix {fmt} real {symm}"]
    if comment:
        lines += [f"% {c}" for c in comment.splitlines()]
    if fmt == "array":
        lines.append(f"{a.shape[0]} {a.shape[1]}")
        lines += [f"{v:.16e}" for v in a.ravel(order="F")]
    elif fmt == "coordinate":
        mask = a != 0
        if symmetric:
            mask &= np.tril(np.ones(a.shape, dtype=bool))
        j, i = np.nonzero(mask.T)  # column-major entry order
        lines.append(f"{a.shape[0]} {a.shape[1]} {len(i)}")
        lines += [f"{r + 1} {c + 1} {a[r, c]:.16e}" for r, c in zip(i, j)]
    else:
        raise ValueError(f"unknown format {fmt!r}")
    _write(path, "\n".join(lines) + "\n")


def _write(path, text):
    try:
        d = os.path.dirname(os.fspath(path))
        if d:
            os.makedirs(d, exist_ok=True)
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def _csv_value(v):
    return "nan" if math.isnan(v) else f"{v:.15e}"


def format_sweep_csv(table):
    lines = [SWEEP_HEADER]
    for row in table.rows():
        lines.append(",".join(_csv_value(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_sweep_csv(table, path):
    """Write ``freq,h_abs,hk_abs,rel_err`` rows in scientific notation (16 significant digits).

    Pole hits and points with ``h = 0`` carry ``nan``.
    """
    _write(path, format_sweep_csv(table))


def write_text(path, text):
    _write(path, text)

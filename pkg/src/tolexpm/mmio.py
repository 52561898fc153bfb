"""Dense Matrix Market (array format) reading and writing."""
from __future__ import annotations

from pathlib import Path

import numpy as np


class MatrixFileError(ValueError):
    def __init__(self, path, line: int | None, msg: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {msg}")
        self.path, self.line = path, line


def read_matrix(path: str | Path) -> np.ndarray:
    """Read a dense ``array`` Matrix Market file (real, integer or complex, general)."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise MatrixFileError(path, None, f"cannot read file ({exc.strerror})") from exc
    if not lines:
        raise MatrixFileError(path, 1, "empty file")
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket" or head[1].lower() != "matrix":
        raise MatrixFileError(path, 1, "expected '%%MatrixMarket matrix array <field> general'")
    fmt, fld, sym = (h.lower() for h in head[2:])
    if fmt != "array":
        raise MatrixFileError(path, 1, f"only the dense 'array' format is supported, got {fmt!r}")
    if fld not in ("real", "integer", "double", "complex"):
        raise MatrixFileError(path, 1, f"unsupported field {fld!r}")
    if sym != "general":
        raise MatrixFileError(path, 1, f"only 'general' symmetry is supported, got {sym!r}")
    body = [(i + 1, ln.strip()) for i, ln in enumerate(lines) if i > 0 and ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixFileError(path, len(lines), "missing size line")
    lineno, size = body[0]
    try:
        rows, cols = (int(v) for v in size.split())
    except ValueError:
        raise MatrixFileError(path, lineno, f"bad size line {size!r}") from None
    if rows < 0 or cols < 0:
        raise MatrixFileError(path, lineno, "negative dimension")
    width = 2 if fld == "complex" else 1
    entries = body[1:]
    if len(entries) != rows * cols:
        at = entries[-1][0] if entries else lineno
        raise MatrixFileError(path, at, f"expected {rows * cols} entries, found {len(entries)}")
    out = np.empty(rows * cols, dtype=complex if width == 2 else float)
    for k, (ln, text) in enumerate(entries):
        parts = text.split()
        if len(parts) != width:
            raise MatrixFileError(path, ln, f"expected {width} number(s), got {len(parts)}")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise MatrixFileError(path, ln, f"cannot parse {text!r} as a number") from None
        if not all(np.isfinite(vals)):
            raise MatrixFileError(path, ln, "non-finite entry")
        out[k] = complex(*vals) if width == 2 else vals[0]
    # column-major order
    return out.reshape((cols, rows)).T.copy()


def format_matrix(a: np.ndarray, comment: str | None = None) -> str:
    a = np.asarray(a)
    cplx = np.iscomplexobj(a)
    lines = [f"%%MatrixMarket matrix array {'complex' if cplx else 'real'} general"]
    if comment:
        lines += [f"% {c}" for c in comment.splitlines()]
    lines.append(f"{a.shape[0]} {a.shape[1]}")
    for v in a.T.reshape(-1):
        lines.append(f"{v.real:.17e} {v.imag:.17e}" if cplx else f"{v:.17e}")
    return "\n".join(lines) + "\n"


def write_matrix(path: str | Path, a: np.ndarray, comment: str | None = None) -> None:
    Path(path).write_text(format_matrix(a, comment), encoding="utf-8")

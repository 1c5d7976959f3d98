"""Text serialization for complex vectors, matrices and attack instances.

Format: one complex entry per whitespace-separated token, written as
"re+imi" (e.g. "1.5-0.25i"), with a one-line header:

    cvec m          followed by m tokens
    cmat m n        followed by m lines of n tokens (row-major)

Tokens use 17 significant digits so values round-trip exactly through
float64. An attack instance file is a header "instance M n m" followed by
M plaintext cvec records (length n) and then M observation cvec records
(length m).
"""

from __future__ import annotations

import io

import numpy as np

from .core import as_cmat, as_cvec


def format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def parse_complex(token: str) -> complex:
    if not token.endswith("i"):
        raise ValueError(f"bad complex token {token!r}: missing trailing 'i'")
    try:
        return complex(token[:-1] + "j")
    except ValueError as exc:
        raise ValueError(f"bad complex token {token!r}") from exc


def write_cvec(f, v) -> None:
    v = as_cvec(v)
    f.write(f"cvec {v.shape[0]}\n")
    f.write(" ".join(format_complex(z) for z in v) + "\n")


def write_cmat(f, Q) -> None:
    Q = as_cmat(Q)
    m, n = Q.shape
    f.write(f"cmat {m} {n}\n")
    for row in Q:
        f.write(" ".join(format_complex(z) for z in row) + "\n")


class _TokenReader:
    """Reads whitespace-separated tokens across lines."""

    def __init__(self, f):
        self._f = f
        self._buf: list[str] = []

    def next(self) -> str:
        while not self._buf:
            line = self._f.readline()
            if not line:
                raise ValueError("unexpected end of file")
            self._buf = line.split()
        return self._buf.pop(0)

    def take(self, k: int) -> list[str]:
        return [self.next() for _ in range(k)]

    def at_eof(self) -> bool:
        while not self._buf:
            line = self._f.readline()
            if not line:
                return True
            self._buf = line.split()
        return False


def read_cvec(f) -> np.ndarray:
    r = f if isinstance(f, _TokenReader) else _TokenReader(f)
    tag = r.next()
    if tag != "cvec":
        raise ValueError(f"expected 'cvec' header, got {tag!r}")
    m = int(r.next())
    if m < 1:
        raise ValueError("cvec length must be >= 1")
    return as_cvec([parse_complex(t) for t in r.take(m)])


def read_cmat(f) -> np.ndarray:
    r = f if isinstance(f, _TokenReader) else _TokenReader(f)
    tag = r.next()
    if tag != "cmat":
        raise ValueError(f"expected 'cmat' header, got {tag!r}")
    m, n = int(r.next()), int(r.next())
    if m < 1 or n < 1:
        raise ValueError("cmat dimensions must be >= 1")
    flat = [parse_complex(t) for t in r.take(m * n)]
    return as_cmat(np.array(flat, dtype=np.complex128).reshape(m, n))


def save_cvec(path, v) -> None:
    with open(path, "w") as f:
        write_cvec(f, v)


def load_cvec(path) -> np.ndarray:
    with open(path) as f:
        return read_cvec(f)


def save_cmat(path, Q) -> None:
    with open(path, "w") as f:
        write_cmat(f, Q)


def load_cmat(path) -> np.ndarray:
    with open(path) as f:
        return read_cmat(f)


def save_cvecs(path, vectors) -> None:
    """A file of consecutive cvec records (e.g. a plaintext list)."""
    with open(path, "w") as f:
        for v in vectors:
            write_cvec(f, v)


def load_cvecs(path) -> list[np.ndarray]:
    out = []
    with open(path) as f:
        r = _TokenReader(f)
        while not r.at_eof():
            out.append(read_cvec(r))
    if not out:
        raise ValueError(f"no cvec records in {path}")
    return out


def save_instance(path, plaintexts, observations) -> None:
    """Attack instance: M dense plaintexts (length n) and M observations (length m)."""
    plaintexts = [as_cvec(x, "plaintext") for x in plaintexts]
    observations = [as_cvec(b, "observation") for b in observations]
    if len(plaintexts) != len(observations):
        raise ValueError("plaintext and observation counts differ")
    M = len(plaintexts)
    n = plaintexts[0].shape[0]
    m = observations[0].shape[0]
    with open(path, "w") as f:
        f.write(f"instance {M} {n} {m}\n")
        for x in plaintexts:
            write_cvec(f, x)
        for b in observations:
            write_cvec(f, b)


def load_instance(path) -> tuple[list[np.ndarray], list[np.ndarray]]:
    with open(path) as f:
        r = _TokenReader(f)
        tag = r.next()
        if tag != "instance":
            raise ValueError(f"expected 'instance' header, got {tag!r}")
        M, n, m = int(r.next()), int(r.next()), int(r.next())
        plaintexts = [read_cvec(r) for _ in range(M)]
        observations = [read_cvec(r) for _ in range(M)]
    for x in plaintexts:
        if x.shape[0] != n:
            raise ValueError("plaintext length disagrees with instance header")
    for b in observations:
        if b.shape[0] != m:
            raise ValueError("observation length disagrees with instance header")
    return plaintexts, observations


def dumps_cmat(Q) -> str:
    buf = io.StringIO()
    write_cmat(buf, Q)
    return buf.getvalue()


def loads_cmat(text: str) -> np.ndarray:
    return read_cmat(io.StringIO(text))


__all__ = [
    "format_complex",
    "parse_complex",
    "write_cvec",
    "write_cmat",
    "read_cvec",
    "read_cmat",
    "save_cvec",
    "load_cvec",
    "save_cmat",
    "load_cmat",
    "save_cvecs",
    "load_cvecs",
    "save_instance",
    "load_instance",
    "dumps_cmat",
    "loads_cmat",
]

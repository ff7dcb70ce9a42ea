"""CSV and PGM codecs. All writers go through a temp file and ``os.replace``."""
from __future__ import annotations

import os
import re
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class CsvParseError(ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class PgmError(ValueError):
    pass


@contextmanager
def atomic_write(path, mode="w"):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if "b" in mode else {"encoding": "utf-8", "newline": ""})) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(x: float) -> str:
    return "%.17g" % x


def read_csv_rows(path, header: bool = False) -> list[list[float]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if header and lineno == 1:
                continue
            line = line.strip()
            if not line:
                continue
            row = []
            for col, tok in enumerate(line.split(","), start=1):
                tok = tok.strip()
                try:
                    row.append(float(tok))
                except ValueError:
                    raise CsvParseError(f"not a number: {tok!r}", lineno, col) from None
            rows.append(row)
    return rows


def read_csv(path, header: bool = False) -> list[float]:
    """All numbers in the file, in reading order."""
    return [x for row in read_csv_rows(path, header) for x in row]


def write_csv(path, rows) -> None:
    """Write a 1-D sequence one value per line, or a 2-D array as comma rows."""
    arr = np.asarray(rows, dtype=float)
    with atomic_write(path) as fh:
        if arr.ndim <= 1:
            for x in np.atleast_1d(arr):
                fh.write(format_float(x) + "\n")
        else:
            for row in arr:
                fh.write(",".join(format_float(x) for x in row) + "\n")


@dataclass
class ImageBuffer:
    width: int
    height: int
    pixels: np.ndarray
    max_val: int = 255

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=float).ravel()
        if self.pixels.size != self.width * self.height:
            raise ValueError("pixel count does not match width * height")
        if self.pixels.size and (self.pixels.min() < 0 or self.pixels.max() > 1):
            raise ValueError("pixels must lie in [0, 1]")
        if not 1 <= self.max_val <= 65535:
            raise ValueError("max_val must be in [1, 65535]")

    def as_array(self) -> np.ndarray:
        return self.pixels.reshape(self.height, self.width)


_WS = b" \t\r\n\x0b\x0c"


def _header_tokens(data: bytes, count: int):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos] in _WS:
            pos += 1
        if pos >= len(data):
            raise PgmError("malformed header: unexpected end of file")
        if data[pos:pos + 1] == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(data) and data[pos] not in _WS and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(path) -> ImageBuffer:
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic in (b"P3", b"P6", b"P1", b"P4"):
        raise PgmError("grayscale only: got Netpbm type " + magic.decode())
    if magic not in (b"P2", b"P5"):
        raise PgmError("malformed header: not a PGM file")
    tokens, pos = _header_tokens(data[2:], 3)
    try:
        width, height, max_val = (int(t) for t in tokens)
    except ValueError:
        raise PgmError("malformed header: non-integer field") from None
    if width < 1 or height < 1 or not 1 <= max_val <= 65535:
        raise PgmError("malformed header: bad dimensions or max value")
    n = width * height
    body = data[2 + pos:]
    if magic == b"P5":
        if not body or body[0] not in _WS:
            raise PgmError("malformed header: missing separator before raster")
        body = body[1:]
        dtype = np.dtype(">u2") if max_val > 255 else np.dtype("u1")
        if len(body) < n * dtype.itemsize:
            raise PgmError("truncated payload")
        raw = np.frombuffer(body, dtype=dtype, count=n).astype(np.int64)
    else:
        fields = re.sub(rb"#[^\n]*", b"", body).split()
        if len(fields) < n:
            raise PgmError("truncated payload")
        try:
            raw = np.array([int(f) for f in fields[:n]], dtype=np.int64)
        except ValueError:
            raise PgmError("malformed raster: non-integer sample") from None
    if raw.max(initial=0) > max_val:
        raise PgmError("sample exceeds max value")
    return ImageBuffer(width, height, raw / max_val, max_val)


def write_pgm(path, img: ImageBuffer, binary: bool = True) -> None:
    """Store pixels at ``img.max_val`` depth, rounding half up."""
    stored = np.clip(np.floor(img.pixels * img.max_val + 0.5), 0, img.max_val).astype(np.int64)
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n{img.max_val}\n"
    with atomic_write(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if binary:
            dtype = ">u2" if img.max_val > 255 else "u1"
            fh.write(stored.astype(dtype).tobytes())
        else:
            for row in stored.reshape(img.height, img.width):
                fh.write((" ".join(map(str, row)) + "\n").encode("ascii"))

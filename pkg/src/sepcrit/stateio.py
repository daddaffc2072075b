"""Reading and writing density matrices.

Two formats are supported:

* JSON ``{"dims": [..], "data": [[re, im], ..]}`` holding the D*D entries
  row-major as interleaved (re, im) pairs.  This is what the writer emits.
  The reader also accepts split ``{"dims", "re", "im"}`` with row-major
  D x D (or flat D*D) arrays, where ``im`` may be omitted for real matrices.
* packed binary: the 8-byte magic ``SEPCRIT\\x01``, a little-endian uint32
  party count N, N uint32 extents, then D*D complex entries row-major as
  interleaved little-endian float64 (re, im) pairs.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .bloch import DensityMatrix
from .errors import ValidationError

PACKED_MAGIC = b"SEPCRIT\x01"


def _dims_from(obj, where: str) -> tuple[int, ...]:
    if not isinstance(obj, list) or not obj:
        raise ValidationError(f"{where}: 'dims' must be a nonempty list of integers")
    out = []
    for i, d in enumerate(obj):
        if isinstance(d, bool) or not isinstance(d, int) or d < 1:
            raise ValidationError(f"{where}: dims[{i}] = {d!r} is not a positive integer")
        out.append(d)
    return tuple(out)


def _part(obj, D: int, key: str, where: str) -> np.ndarray:
    """Parse one real D x D block, reporting the first bad row/col."""
    if obj is None:
        return np.zeros((D, D))
    if not isinstance(obj, list):
        raise ValidationError(f"{where}: '{key}' must be a list")
    if obj and not isinstance(obj[0], list):
        if len(obj) != D * D:
            r, c = divmod(min(len(obj), D * D), D)
            raise ValidationError(
                f"{where}: '{key}' has {len(obj)} entries, expected {D * D} (first gap at row {r}, col {c})"
            )
        obj = [obj[r * D:(r + 1) * D] for r in range(D)]
    if len(obj) != D:
        raise ValidationError(f"{where}: '{key}' has {len(obj)} rows, expected {D} (row {min(len(obj), D)})")
    out = np.empty((D, D))
    for r, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != D:
            n = len(row) if isinstance(row, list) else "no"
            raise ValidationError(f"{where}: '{key}' row {r} has {n} entries, expected {D}")
        for c, val in enumerate(row):
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not np.isfinite(val):
                raise ValidationError(f"{where}: '{key}' row {r}, col {c} is not a finite number: {val!r}")
            out[r, c] = val
    return out


def _pairs(obj, D: int, where: str) -> np.ndarray:
    """Parse D*D interleaved [re, im] pairs, reporting the first bad row/col."""
    if not isinstance(obj, list):
        raise ValidationError(f"{where}: 'data' must be a list of [re, im] pairs")
    if len(obj) != D * D:
        r, c = divmod(min(len(obj), D * D), D)
        raise ValidationError(
            f"{where}: 'data' has {len(obj)} entries, expected {D * D} (first gap at row {r}, col {c})"
        )
    out = np.empty(D * D, dtype=np.complex128)
    for i, pair in enumerate(obj):
        r, c = divmod(i, D)
        ok = isinstance(pair, list) and len(pair) == 2 and all(
            not isinstance(v, bool) and isinstance(v, (int, float)) and np.isfinite(v) for v in pair
        )
        if not ok:
            raise ValidationError(f"{where}: 'data' row {r}, col {c} is not a finite [re, im] pair: {pair!r}")
        out[i] = complex(pair[0], pair[1])
    return out.reshape(D, D)


def state_from_json_text(text: str, where: str = "<state>") -> DensityMatrix:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{where}: invalid JSON at line {exc.lineno}, col {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected a JSON object with dims and data")
    unknown = set(obj) - {"dims", "data", "re", "im", "schema_version"}
    if unknown:
        raise ValidationError(f"{where}: unknown fields {sorted(unknown)}")
    dims = _dims_from(obj.get("dims"), where)
    D = int(np.prod(dims))
    if "data" in obj:
        if "re" in obj or "im" in obj:
            raise ValidationError(f"{where}: give either 'data' or 're'/'im', not both")
        m = _pairs(obj["data"], D, where)
    elif "re" in obj:
        m = _part(obj["re"], D, "re", where) + 1j * _part(obj.get("im"), D, "im", where)
    else:
        raise ValidationError(f"{where}: missing field 'data'")
    return DensityMatrix(m, dims)


def state_to_json_dict(rho: DensityMatrix) -> dict:
    return {
        "schema_version": 1,
        "dims": list(rho.dims),
        "data": [[float(z.real), float(z.imag)] for z in rho.matrix.ravel()],
    }


def state_to_packed(rho: DensityMatrix) -> bytes:
    head = PACKED_MAGIC + struct.pack(f"<I{len(rho.dims)}I", len(rho.dims), *rho.dims)
    body = np.ascontiguousarray(rho.matrix, dtype="<c16").view("<f8").tobytes()
    return head + body


def state_from_packed(data: bytes, where: str = "<state>") -> DensityMatrix:
    if data[:8] != PACKED_MAGIC:
        raise ValidationError(f"{where}: not a packed state file (bad magic)")
    off = 8
    if len(data) < off + 4:
        raise ValidationError(f"{where}: truncated header")
    (n,) = struct.unpack_from("<I", data, off)
    off += 4
    if n < 1 or len(data) < off + 4 * n:
        raise ValidationError(f"{where}: truncated or invalid party count {n}")
    dims = struct.unpack_from(f"<{n}I", data, off)
    off += 4 * n
    if any(d < 1 for d in dims):
        raise ValidationError(f"{where}: invalid dims {dims}")
    D = int(np.prod(dims))
    payload = data[off:]
    need = 16 * D * D
    if len(payload) != need:
        complete = len(payload) // 16
        r, c = divmod(min(complete, D * D), D)
        raise ValidationError(
            f"{where}: payload holds {len(payload)} bytes, expected {need} "
            f"(first incomplete entry at row {r}, col {c})"
        )
    flat = np.frombuffer(payload, dtype="<f8")
    bad = np.flatnonzero(~np.isfinite(flat))
    if bad.size:
        r, c = divmod(int(bad[0]) // 2, D)
        raise ValidationError(f"{where}: non-finite value at row {r}, col {c}")
    m = flat.view("<c16").reshape(D, D).astype(np.complex128)
    return DensityMatrix(m, dims)


def read_state(path, fmt: str | None = None) -> DensityMatrix:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ValidationError(f"cannot read state file {path}: {exc.strerror}") from None
    if fmt is None:
        fmt = "packed" if data[:8] == PACKED_MAGIC else "json"
    if fmt == "packed":
        return state_from_packed(data, str(path))
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise ValidationError(f"{path}: state file is not UTF-8 JSON") from None
    return state_from_json_text(text, str(path))

"""On-disk cache of kernel tables.

File layout (all integers little-endian)::

    magic      4 bytes   b"EFMK"
    version    uint16    1
    hlen       uint32    length of the JSON header in bytes
    header     hlen      UTF-8 JSON: {"kind", "spec", "arrays": [{"name", "shape"}, ...]}
    payload              float64 little-endian, arrays concatenated in header order,
                         each in C (row-major) order over its stored index layout
    checksum   32 bytes  SHA-256 of everything above

Mode-indexed axes use lexicographic order over ``[-n, n]``; the 3D ``phi``
table is indexed by ``(|l+m|^2, |l-m|^2)``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import struct
import tempfile
import warnings
from pathlib import Path

import numpy as np

from .kernel import KernelFactors2D, KernelSpec, KernelTable3D, build_kernel

__all__ = ["CACHE_ENV", "CacheCorruptError", "cache_path", "default_cache_dir", "load", "load_or_build", "save"]

log = logging.getLogger(__name__)

MAGIC = b"EFMK"
VERSION = 1
CACHE_ENV = "EFM_KERNEL_CACHE"


class CacheCorruptError(IOError):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "entropic_fourier"


def cache_path(spec: KernelSpec, cache_dir=None) -> Path:
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    key = json.dumps(spec.key(), sort_keys=True)
    digest = hashlib.sha256(key.encode()).hexdigest()[:16]
    tag = f"d{spec.d}_N{spec.N}_" + (f"M{spec.M}" if spec.d == 2 else f"Mr{spec.M_r}")
    return cache_dir / f"kernel_{tag}_{digest}.efmk"


def _spec_dict(spec: KernelSpec) -> dict:
    return {"d": spec.d, "N": spec.N, "R": spec.R, "T": spec.T, "model": spec.model, "M": spec.M, "M_r": spec.M_r}


def _encode(kernel) -> bytes:
    kind = "factors2d" if isinstance(kernel, KernelFactors2D) else "table3d"
    arrays = kernel.arrays()
    header = {
        "kind": kind,
        "spec": _spec_dict(kernel.spec),
        "arrays": [{"name": k, "shape": list(v.shape)} for k, v in arrays.items()],
    }
    hbytes = json.dumps(header, sort_keys=True).encode("utf-8")
    body = MAGIC + struct.pack("<HI", VERSION, len(hbytes)) + hbytes
    body += b"".join(np.ascontiguousarray(v, dtype="<f8").tobytes() for v in arrays.values())
    return body + hashlib.sha256(body).digest()


def _decode(blob: bytes):
    if len(blob) < 42 or blob[:4] != MAGIC:
        raise CacheCorruptError("bad magic or truncated file")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CacheCorruptError("checksum mismatch")
    version, hlen = struct.unpack("<HI", body[4:10])
    if version != VERSION:
        raise CacheCorruptError(f"unsupported cache version {version}")
    header = json.loads(body[10 : 10 + hlen].decode("utf-8"))
    offset = 10 + hlen
    arrays = {}
    for item in header["arrays"]:
        count = int(np.prod(item["shape"], dtype=np.int64))
        arr = np.frombuffer(body, dtype="<f8", count=count, offset=offset).reshape(item["shape"])
        arrays[item["name"]] = arr.astype(np.float64)
        offset += 8 * count
    if offset != len(body):
        raise CacheCorruptError("payload length mismatch")
    spec = KernelSpec(**header["spec"])
    if header["kind"] == "factors2d":
        return KernelFactors2D(spec, arrays["theta"], arrays["beta"], arrays["gamma"], arrays["weights"])
    return KernelTable3D(spec, arrays["phi"])


def save(kernel, path) -> Path:
    """Write atomically (temp file in the same directory, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(_encode(kernel))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def load(path):
    return _decode(Path(path).read_bytes())


def load_or_build(spec: KernelSpec, cache_dir=None, *, use_cache: bool = True):
    """Return ``(kernel, status)`` with status ``"hit"``, ``"miss"`` or ``"rebuilt"``.

    A corrupt or mismatching file is rebuilt with a warning.
    """
    if not use_cache:
        return build_kernel(spec), "miss"
    path = cache_path(spec, cache_dir)
    status = "miss"
    if path.exists():
        try:
            kernel = load(path)
            if kernel.spec == spec:
                return kernel, "hit"
            raise CacheCorruptError("stored spec does not match the request")
        except (CacheCorruptError, ValueError, KeyError, json.JSONDecodeError, struct.error) as exc:
            warnings.warn(f"kernel cache {path} unusable ({exc}); rebuilding", RuntimeWarning, stacklevel=2)
            status = "rebuilt"
    kernel = build_kernel(spec)
    save(kernel, path)
    log.debug("kernel cache %s: %s", status, path)
    return kernel, status

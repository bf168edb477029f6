"""Portable Float Map I/O and the plain-text lighting format.

Writes little-endian float32 ("-1.0" scale line) with rows stored bottom to
top, as the format prescribes.  Reads either endianness.
"""
import os

import numpy as np


class PfmError(OSError):
    """Malformed PFM file."""


def write_pfm(path, img):
    img = np.asarray(img)
    if img.ndim == 2:
        tag = b"Pf"
    elif img.ndim == 3 and img.shape[2] == 3:
        tag = b"PF"
    else:
        raise ValueError(f"PFM holds (h, w) or (h, w, 3) arrays, got {img.shape}")
    height, width = img.shape[:2]
    payload = np.ascontiguousarray(np.flipud(img), dtype="<f4")
    with open(path, "wb") as f:
        f.write(tag + b"\n")
        f.write(f"{width} {height}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(payload.tobytes())


def _read_token_line(f):
    line = f.readline()
    if not line:
        raise PfmError("unexpected end of PFM header")
    return line.decode("ascii", errors="replace").strip()


def read_pfm(path):
    """Return a float64 array, (h, w) for "Pf" or (h, w, 3) for "PF"."""
    with open(path, "rb") as f:
        tag = _read_token_line(f)
        if tag == "Pf":
            channels = 1
        elif tag == "PF":
            channels = 3
        else:
            raise PfmError(f"{path}: not a PFM file (tag {tag!r})")
        dims = _read_token_line(f).split()
        try:
            width, height = int(dims[0]), int(dims[1])
            scale = float(_read_token_line(f))
        except (IndexError, ValueError) as e:
            raise PfmError(f"{path}: bad PFM header") from e
        if width <= 0 or height <= 0 or scale == 0:
            raise PfmError(f"{path}: bad PFM header")
        dtype = "<f4" if scale < 0 else ">f4"
        count = width * height * channels
        payload = f.read(4 * count)
    if len(payload) != 4 * count:
        raise PfmError(f"{path}: truncated payload ({len(payload)} of {4 * count} bytes)")
    data = np.frombuffer(payload, dtype=dtype)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return np.flipud(data.reshape(shape)).astype(np.float64)


def read_lights(path):
    """One light per non-blank line: three whitespace-separated reals."""
    rows = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 numbers, got {len(parts)}")
            rows.append([float(p) for p in parts])
    if not rows:
        raise ValueError(f"{path}: no light directions")
    L = np.array(rows)
    return L / np.linalg.norm(L, axis=1, keepdims=True)


def write_lights(path, directions):
    with open(path, "w") as f:
        for d in np.asarray(directions, dtype=np.float64):
            f.write(" ".join(repr(float(v)) for v in d) + "\n")


def read_image_stack(directory):
    """Load every ``*.pfm`` in a directory, sorted by file name."""
    names = sorted(n for n in os.listdir(directory) if n.lower().endswith(".pfm"))
    if not names:
        raise ValueError(f"no .pfm images in {directory}")
    imgs = [read_pfm(os.path.join(directory, n)) for n in names]
    if any(im.ndim != 2 for im in imgs):
        raise ValueError("image stack files must be single-channel PFMs")
    if len({im.shape for im in imgs}) != 1:
        raise ValueError("image stack files differ in size")
    return np.stack(imgs)

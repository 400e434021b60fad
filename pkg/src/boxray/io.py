"""Text and raw file formats for sinograms, images, ray lists and run configs."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .geometry import RaySet
from .xray_ops import Sinogram


class FormatError(ValueError):
    """A file exists but does not follow the expected format."""


class ConfigError(ValueError):
    pass


def write_sinogram(path, sino: Sinogram) -> None:
    lines = [f"SINO1 M={len(sino.values)}"]
    for th, y, v in zip(sino.rayset.thetas, sino.rayset.offsets, sino.values):
        lines.append(f"{th:.17g} {y:.17g} {v:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_sinogram(path, metadata: str = "file") -> Sinogram:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("SINO1 M="):
        raise FormatError(f"{path}: missing SINO1 header")
    try:
        m = int(text[0][len("SINO1 M="):])
        rows = np.array([[float(v) for v in line.split()] for line in text[1:] if line.strip()])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if m == 0:
        return Sinogram(RaySet([], [], metadata), [])
    if rows.shape != (m, 3):
        raise FormatError(f"{path}: expected {m} rows of 'theta y value'")
    return Sinogram(RaySet(rows[:, 0], rows[:, 1], metadata), rows[:, 2])


def write_image(path, image: np.ndarray) -> None:
    """Raw little-endian float64 grid behind an ``IMGF64 rows cols`` header."""
    image = np.asarray(image, dtype="<f8")
    if image.ndim != 2:
        raise ValueError("images are 2D")
    header = f"IMGF64 {image.shape[0]} {image.shape[1]}\n".encode("ascii")
    Path(path).write_bytes(header + np.ascontiguousarray(image).tobytes())


def read_image(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    head, sep, body = raw.partition(b"\n")
    parts = head.split()
    if not sep or len(parts) != 3 or parts[0] != b"IMGF64":
        raise FormatError(f"{path}: missing IMGF64 header")
    rows, cols = int(parts[1]), int(parts[2])
    if len(body) != 8 * rows * cols:
        raise FormatError(f"{path}: expected {rows}x{cols} float64 values")
    return np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(np.float64)


def write_pgm(path, image: np.ndarray) -> None:
    """16-bit binary PGM, linearly stretched to the full range; row 0 is the top."""
    image = np.asarray(image, dtype=np.float64)
    lo, hi = float(image.min()), float(image.max())
    scaled = np.zeros_like(image) if hi == lo else (image - lo) / (hi - lo)
    # image rows run along +y, display rows run downwards
    data = np.round(scaled[::-1] * 65535).astype(">u2")
    header = f"P5\n{image.shape[1]} {image.shape[0]}\n65535\n".encode("ascii")
    Path(path).write_bytes(header + data.tobytes())


def read_rays(path) -> RaySet:
    """Arbitrary geometry: one ``theta y`` pair per line, ``#`` starts a comment."""
    thetas, offsets = [], []
    for num, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"{path}:{num}: expected 'theta y'")
        try:
            thetas.append(float(parts[0]))
            offsets.append(float(parts[1]))
        except ValueError:
            raise FormatError(f"{path}:{num}: not a number") from None
    return RaySet(thetas, offsets, f"file {Path(path).name}")


def write_rays(path, rays: RaySet) -> None:
    lines = [f"{th:.17g} {y:.17g}" for th, y in zip(rays.thetas, rays.offsets)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


@dataclass
class RunConfig:
    """Settings shared by the command-line tools; loadable from ``key=value`` files."""

    generator: str = "pixel"
    grid: int = 64
    geometry: str = "parallel"
    angles: int = 0
    offsets: int = 0
    detectors: int = 64
    pitch: float = 1.0
    source_to_detector: float = 200.0
    source_to_object: float = 100.0
    cor_shift: float = 0.0
    voxel_size: float = 0.0
    rays: str = ""
    phantom: str = "shepp"
    disk_radius: float = 0.0
    iterations: int = 30
    lam: float = 0.0
    tol: float = 0.0
    noise_variance: float = 0.0
    noise_seed: int = 0
    seed: int = 0
    factor: int = 4
    supersample: int = 4
    trials: int = 5
    sizes: str = "64,128,256"
    repeats: int = 5
    warmup: int = 1
    search_start: float = -1.0
    search_stop: float = 1.0
    search_step: float = 0.05
    search_iterations: int = 10
    samples: int = 201
    profile_angles: int = 8
    input: str = ""
    image: str = ""
    out: str = ""

    def update(self, values: dict[str, str]) -> None:
        known = {f.name: f for f in fields(self)}
        for key, raw in values.items():
            name = key.strip().replace("-", "_")
            if name not in known:
                raise ConfigError(f"unknown config key {key!r}")
            kind = type(getattr(self, name))
            try:
                value = kind(raw.strip()) if kind is not str else raw.strip()
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw!r}") from None
            setattr(self, name, value)

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **changes)


def load_config(path) -> dict[str, str]:
    values = {}
    for num, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{num}: expected key=value")
        values[key.strip()] = value
    return values

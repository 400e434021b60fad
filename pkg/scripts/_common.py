"""Shared helpers for the experiment scripts."""

import argparse
import csv
from pathlib import Path

from boxray.geometry import GridSpec, parallel_rayset
from boxray.recon import NoiseSpec, SolverConfig, add_noise, ellipse_sinogram, reconstruction_quality, shepp_logan


def parser(description: str, default_out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default=default_out, help="CSV file to write")
    return p


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path}")


def ellipse_run(gen, n, n_angles, n_offsets, variance=1e-3, seed=1, iterations=30, factor=4, thick=True):
    grid = GridSpec.centered(n)
    ellipses = shepp_logan(grid, thick=thick)
    rays = parallel_rayset(n_angles, n_offsets, grid)
    sino = add_noise(ellipse_sinogram(ellipses, rays), NoiseSpec(variance, seed))
    return reconstruction_quality(gen, grid, ellipses, sino, SolverConfig(iterations=iterations), factor)

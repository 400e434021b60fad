"""Residual curves of the center-of-rotation grid search for several injected shifts."""

import math

import numpy as np
from _common import parser, write_csv

from boxray.geometry import FanBeamConfig, GridSpec, fanbeam_rayset
from boxray.profiles import Generator
from boxray.recon import NoiseSpec, SolverConfig, add_noise, cor_residuals, ellipse_sinogram, search_grid, shepp_logan


def main():
    p = parser(__doc__, "results/cor.csv")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--shifts", default="-0.4,-0.17,0,0.3")
    p.add_argument("--step", type=float, default=0.05)
    args = p.parse_args()
    grid = GridSpec.centered(args.n)
    angles = tuple(np.arange(90) * 2 * math.pi / 90)
    base = FanBeamConfig(200.0, 100.0, 1.5, 2 * args.n, angles, voxel_size=1.0)
    ellipses = shepp_logan(grid, thick=True)
    candidates = search_grid(-0.5, 0.5, args.step)
    rows = []
    for injected in map(float, args.shifts.split(",")):
        sino = add_noise(ellipse_sinogram(ellipses, fanbeam_rayset(base.with_shift(injected), grid)),
                         NoiseSpec(1e-3, 1))
        res = cor_residuals(sino, base, grid, Generator.pixel(), candidates, SolverConfig(iterations=10))
        rows += [(injected, f"{s:.12g}", f"{r:.10g}") for s, r in zip(candidates, res)]
        print(f"injected {injected:+.2f} -> best {candidates[int(np.argmin(res))]:+.2f}")
    write_csv(args.out, ["injected", "candidate", "residual"], rows)


if __name__ == "__main__":
    main()

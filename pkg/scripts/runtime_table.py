"""Forward and adjoint wall time per generator, grid size and geometry."""

from _common import parser, write_csv

from boxray.cli import time_operator
from boxray.geometry import GridSpec, parallel_rayset, random_rayset
from boxray.profiles import Generator
from boxray.xray_ops import XRayOperator


def main():
    p = parser(__doc__, "results/runtime.csv")
    p.add_argument("--sizes", default="64,128,256")
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args()
    rows = []
    for n in map(int, args.sizes.split(",")):
        grid = GridSpec.centered(n)
        geometries = {"parallel": parallel_rayset(2 * n, n, grid), "random": random_rayset(2 * n * n, grid, 0)}
        for geo, rays in geometries.items():
            for name in ("pixel", "box3", "box4", "bspline1", "bspline2"):
                op = XRayOperator(grid, rays, Generator.from_name(name))
                for which in ("forward", "adjoint"):
                    ms = time_operator(op, which, 1, args.repeats, 0)
                    rows.append((which, name, n, geo, f"{ms:.3f}"))
                    print(*rows[-1])
    write_csv(args.out, ["op", "generator", "N", "geometry", "ms"], rows)


if __name__ == "__main__":
    main()

"""Projected profiles of each generator over a fan of angles in [-pi/4, pi/4)."""

from _common import parser, write_csv

from boxray.cli import profile_rows
from boxray.profiles import Generator


def main():
    p = parser(__doc__, "results/profiles.csv")
    p.add_argument("--angles", type=int, default=8)
    p.add_argument("--samples", type=int, default=201)
    args = p.parse_args()
    rows = []
    for name in ("pixel", "box3", "box4", "bspline1", "bspline2"):
        rows += [(name, *r) for r in profile_rows(Generator.from_name(name), args.angles, args.samples)]
    write_csv(args.out, ["generator", "theta", "y", "value"], rows)


if __name__ == "__main__":
    main()

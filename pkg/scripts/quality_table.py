"""PSNR/SSIM of least-squares reconstructions of the ellipse phantom per generator."""

from _common import ellipse_run, parser, write_csv

from boxray.profiles import Generator


def main():
    p = parser(__doc__, "results/quality.csv")
    p.add_argument("--sizes", default="32,64")
    p.add_argument("--variances", default="1e-4,1e-3,1e-2")
    p.add_argument("--thin", action="store_true", help="use the standard thin-skull phantom")
    args = p.parse_args()
    rows = []
    for n in map(int, args.sizes.split(",")):
        for var in map(float, args.variances.split(",")):
            for name in ("pixel", "box3", "box4", "bspline1", "bspline2"):
                q = ellipse_run(Generator.from_name(name), n, 2 * n, n, var, thick=not args.thin)
                rows.append((name, n, var, f"{q.psnr:.4f}", f"{q.ssim:.4f}"))
                print(*rows[-1])
    write_csv(args.out, ["generator", "n", "variance", "psnr", "ssim"], rows)


if __name__ == "__main__":
    main()

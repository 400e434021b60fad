"""Reconstruction PSNR against the number of projection angles."""

from _common import ellipse_run, parser, write_csv

from boxray.profiles import Generator


def main():
    p = parser(__doc__, "results/crowther.csv")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--angles", default="8,16,32,48,64,96,128,192,256")
    p.add_argument("--generators", default="pixel,box3,box4")
    args = p.parse_args()
    rows = []
    for name in args.generators.split(","):
        for a in map(int, args.angles.split(",")):
            q = ellipse_run(Generator.from_name(name), args.n, a, args.n)
            rows.append((name, args.n, a, f"{q.psnr:.4f}", f"{q.ssim:.4f}"))
            print(*rows[-1])
    write_csv(args.out, ["generator", "n", "angles", "psnr", "ssim"], rows)


if __name__ == "__main__":
    main()

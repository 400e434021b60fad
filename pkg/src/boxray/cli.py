"""Command-line interface.

Every subcommand accepts ``--config FILE`` (``key=value`` lines, see
:class:`boxray.io.RunConfig`) and flags that override it. Commands that
write several files treat ``--out`` as a path prefix.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys
import time

import numpy as np

from .geometry import FanBeamConfig, GridSpec, RaySet, fanbeam_rayset, parallel_rayset, random_rayset
from .io import (
    ConfigError,
    FormatError,
    RunConfig,
    load_config,
    read_image,
    read_rays,
    read_sinogram,
    write_image,
    write_pgm,
    write_sinogram,
)
from .profiles import Generator, project_generator
from .recon import (
    NoiseSpec,
    NumericalError,
    SolverConfig,
    add_noise,
    cor_residuals,
    disk,
    ellipse_sinogram,
    rasterize,
    reconstruction_quality,
    search_grid,
    shepp_logan,
)
from .tracer import configure_workers
from .xray_ops import Sinogram, XRayOperator, adjoint_dot_test

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

ADJOINT_LIMIT = 1e-10


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# Building blocks from a run configuration
# ---------------------------------------------------------------------------


def make_grid(cfg: RunConfig) -> GridSpec:
    return GridSpec.centered(cfg.grid)


def make_generator(cfg: RunConfig) -> Generator:
    try:
        return Generator.from_name(cfg.generator)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def make_fanbeam(cfg: RunConfig, grid: GridSpec) -> FanBeamConfig:
    n_angles = cfg.angles or 2 * grid.n
    try:
        return FanBeamConfig(
            source_to_detector=cfg.source_to_detector,
            source_to_object=cfg.source_to_object,
            detector_pitch=cfg.pitch,
            n_detectors=cfg.detectors,
            angles=tuple(np.arange(n_angles) * (2.0 * math.pi / n_angles)),
            cor_shift=cfg.cor_shift,
            voxel_size=cfg.voxel_size or None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def make_rayset(cfg: RunConfig, grid: GridSpec) -> RaySet:
    if cfg.geometry == "parallel":
        return parallel_rayset(cfg.angles or 2 * grid.n, cfg.offsets or grid.n, grid)
    if cfg.geometry == "fanbeam":
        return fanbeam_rayset(make_fanbeam(cfg, grid), grid)
    if cfg.geometry == "random":
        return random_rayset((cfg.angles or 2 * grid.n) * (cfg.offsets or grid.n), grid, cfg.seed)
    if cfg.geometry == "file":
        if not cfg.rays:
            raise ConfigError("geometry 'file' needs --rays")
        return read_rays(cfg.rays)
    raise ConfigError(f"unknown geometry {cfg.geometry!r}")


def make_phantom(cfg: RunConfig, grid: GridSpec):
    if cfg.phantom == "shepp":
        return shepp_logan(grid)
    if cfg.phantom == "shepp-thick":
        return shepp_logan(grid, thick=True)
    if cfg.phantom == "disk":
        return [disk(grid.center, cfg.disk_radius or grid.n / 4)]
    raise ConfigError(f"unknown phantom {cfg.phantom!r}")


def solver_config(cfg: RunConfig) -> SolverConfig:
    try:
        return SolverConfig(cfg.iterations, cfg.lam, cfg.tol, cfg.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _require_out(cfg: RunConfig) -> str:
    if not cfg.out:
        raise ConfigError("--out is required")
    return cfg.out


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_phantom(cfg: RunConfig) -> int:
    prefix = _require_out(cfg)
    grid = make_grid(cfg)
    ellipses = make_phantom(cfg, grid)
    rays = make_rayset(cfg, grid)
    image = rasterize(ellipses, grid, cfg.factor, cfg.supersample)
    sino = add_noise(ellipse_sinogram(ellipses, rays), NoiseSpec(cfg.noise_variance, cfg.noise_seed))
    write_image(prefix + ".img", image)
    write_pgm(prefix + ".pgm", image)
    write_sinogram(prefix + ".sino", sino)
    print(f"phantom={cfg.phantom} N={grid.n} factor={cfg.factor} M={len(rays)}")
    return EXIT_OK


def cmd_project(cfg: RunConfig) -> int:
    out = _require_out(cfg)
    if not cfg.input:
        raise ConfigError("--input coefficient image is required")
    coeffs = read_image(cfg.input)
    grid = make_grid(cfg.replace(grid=coeffs.shape[0]))
    if coeffs.shape != grid.shape:
        raise ConfigError("coefficient image must be square")
    rays = make_rayset(cfg.replace(grid=grid.n), grid)
    values = XRayOperator(grid, rays, make_generator(cfg)).apply(coeffs)
    write_sinogram(out, Sinogram(rays, values))
    return EXIT_OK


def cmd_backproject(cfg: RunConfig) -> int:
    out = _require_out(cfg)
    if not cfg.input:
        raise ConfigError("--input sinogram is required")
    sino = read_sinogram(cfg.input)
    grid = make_grid(cfg)
    image = XRayOperator(grid, sino.rayset, make_generator(cfg)).apply_adjoint(sino.values)
    write_image(out, image)
    return EXIT_OK


def cmd_adjoint_check(cfg: RunConfig) -> int:
    grid = make_grid(cfg)
    gen = make_generator(cfg)
    rays = make_rayset(cfg, grid)
    if len(rays) == 0:
        raise ConfigError("empty ray set")
    worst = adjoint_dot_test(grid, rays, gen, cfg.trials, cfg.seed)
    status = "pass" if worst <= ADJOINT_LIMIT else "FAIL"
    print(f"generator={gen.name} N={grid.n} M={len(rays)} geometry={cfg.geometry} "
          f"trials={cfg.trials} discrepancy={worst:.3e} {status}")
    return EXIT_OK if worst <= ADJOINT_LIMIT else EXIT_NUMERICAL


def cmd_reconstruct(cfg: RunConfig) -> int:
    grid = make_grid(cfg)
    gen = make_generator(cfg)
    ellipses = make_phantom(cfg, grid)
    if cfg.input:
        sino = read_sinogram(cfg.input)
    else:
        rays = make_rayset(cfg, grid)
        sino = add_noise(ellipse_sinogram(ellipses, rays), NoiseSpec(cfg.noise_variance, cfg.noise_seed))
    q = reconstruction_quality(gen, grid, ellipses, sino, solver_config(cfg), cfg.factor, cfg.supersample)
    report = f"generator,n_down,psnr,ssim\n{gen.name},{grid.n},{q.psnr:.6f},{q.ssim:.6f}\n"
    if cfg.out:
        write_image(cfg.out, q.image)
        write_image(cfg.out + ".coef", q.coeffs.data)
        _emit(report, cfg.out + ".csv")
    sys.stdout.write(report)
    return EXIT_OK


def profile_rows(gen: Generator, n_angles: int, samples: int) -> list[tuple[float, float, float]]:
    """Sampled profiles at angles ``-pi/4 + i * pi / (2 n_angles)`` across their support."""
    rows = []
    for i in range(n_angles):
        theta = -math.pi / 4 + i * (math.pi / 2) / n_angles
        prof = project_generator(gen, theta)
        ys = np.linspace(-0.5 * prof.width, 0.5 * prof.width, samples)
        rows.extend((theta, float(y), float(v)) for y, v in zip(ys, prof(ys)))
    return rows


def cmd_profile_dump(cfg: RunConfig) -> int:
    if cfg.samples < 2 or cfg.profile_angles < 1:
        raise ConfigError("need at least 2 samples and 1 angle")
    rows = profile_rows(make_generator(cfg), cfg.profile_angles, cfg.samples)
    text = "theta,y,value\n" + "".join(f"{t:.17g},{y:.17g},{v:.17g}\n" for t, y, v in rows)
    _emit(text, cfg.out or None)
    return EXIT_OK


def time_operator(op: XRayOperator, which: str, warmup: int, repeats: int, seed: int) -> float:
    """Median wall time in milliseconds of one operator application."""
    rng = np.random.default_rng(seed)
    arg = rng.standard_normal(op.grid.shape) if which == "forward" else rng.standard_normal(len(op.rayset))
    run = op.apply if which == "forward" else op.apply_adjoint
    for _ in range(warmup):
        run(arg)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        run(arg)
        times.append(time.perf_counter() - t0)
    return 1e3 * statistics.median(times)


def cmd_benchmark(cfg: RunConfig) -> int:
    try:
        sizes = [int(s) for s in cfg.sizes.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad size list {cfg.sizes!r}") from None
    repeats = max(cfg.repeats, 5)
    lines = ["op,generator,N,geometry,ms"]
    for n in sizes:
        grid = GridSpec.centered(n)
        rays = make_rayset(cfg.replace(grid=n), grid)
        for name in ("pixel", "box3", "box4"):
            op = XRayOperator(grid, rays, Generator.from_name(name))
            for which in ("forward", "adjoint"):
                ms = time_operator(op, which, max(cfg.warmup, 1), repeats, cfg.seed)
                lines.append(f"{which},{name},{n},{cfg.geometry},{ms:.3f}")
    _emit("\n".join(lines) + "\n", cfg.out or None)
    return EXIT_OK


def cmd_calibrate(cfg: RunConfig) -> int:
    grid = make_grid(cfg)
    gen = make_generator(cfg)
    scanner = make_fanbeam(cfg, grid)
    if cfg.input:
        sino = read_sinogram(cfg.input)
    else:
        # synthetic scan taken with the configured shift
        rays = fanbeam_rayset(scanner, grid)
        sino = add_noise(ellipse_sinogram(make_phantom(cfg, grid), rays),
                         NoiseSpec(cfg.noise_variance, cfg.noise_seed))
    try:
        shifts = search_grid(cfg.search_start, cfg.search_stop, cfg.search_step)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    res = cor_residuals(sino, scanner, grid, gen, shifts, SolverConfig(cfg.search_iterations))
    best = min(range(len(shifts)), key=lambda i: (res[i], abs(shifts[i])))
    lines = ["shift,residual"] + [f"{s:.12g},{r:.17g}" for s, r in zip(shifts, res)]
    lines.append(f"best,{shifts[best]:.12g}")
    _emit("\n".join(lines) + "\n", cfg.out or None)
    return EXIT_OK


COMMANDS = {
    "phantom": cmd_phantom,
    "project": cmd_project,
    "backproject": cmd_backproject,
    "adjoint-check": cmd_adjoint_check,
    "reconstruct": cmd_reconstruct,
    "profile-dump": cmd_profile_dump,
    "benchmark": cmd_benchmark,
    "calibrate": cmd_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boxray", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config")
        p.add_argument("--generator", nargs="+", metavar="NAME",
                       help="pixel, box3, box4 or 'bspline <n>'")
        p.add_argument("--grid", type=int)
        p.add_argument("--geometry", choices=("parallel", "fanbeam", "random", "file"))
        p.add_argument("--rays")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--input")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any config key")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg.update(load_config(args.config))
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key] = value
    cfg.update(overrides)
    for key in ("grid", "geometry", "rays", "seed", "out", "input"):
        value = getattr(args, key)
        if value is not None:
            cfg.update({key: str(value)})
    if args.generator:
        cfg.update({"generator": " ".join(args.generator)})
    if cfg.grid < 1:
        raise ConfigError("grid must be positive")
    return cfg


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        configure_workers()
        return COMMANDS[args.command](cfg)
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FormatError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

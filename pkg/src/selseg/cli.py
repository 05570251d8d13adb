"""Command-line entry points: segment, sweep, robustness, fixture, serve.

Exit codes: 0 success, 2 bad arguments, 3 I/O or file-content failure,
4 non-convergence under --strict.
"""

import argparse
import json
import os
import sys

from .fitting import MODELS, FittingSpec
from .geodesic import MarkerInput
from .harness import (
    FIXTURE_KINDS,
    SweepGrid,
    make_fixture,
    robustness_study,
    sweep,
    write_heatmap_csv,
    write_heatmap_json,
    write_heatmap_png,
    write_robustness_csv,
    write_robustness_json,
)
from .image_io import load_image, load_mask, save_mask
from .metrics import tanimoto
from .solver import DISTANCE_MODES, SolverConfig, segment

DEFAULT_PORT = 8765


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    raise SystemExit(code)


def _add_model_flags(p):
    p.add_argument("--model", choices=MODELS, default="pm", help="fitting model")
    p.add_argument(
        "--lambda",
        dest="lambda_tilde",
        type=float,
        default=3.0,
        metavar="L",
        help="data term weight (default 3)",
    )
    p.add_argument("--theta", type=float, default=3.0, help="distance weight (default 3)")
    p.add_argument("--alpha", type=float, default=None, help="penalty weight override")
    p.add_argument("--c1", type=float, default=None, help="foreground constant override")
    p.add_argument("--c2", type=float, default=None, help="background constant override")
    p.add_argument("--gamma1", type=float, default=None, help="PM left width override")
    p.add_argument("--gamma2", type=float, default=None, help="PM right width override")
    p.add_argument("--beta1", type=float, default=1.0, help="GAV exponent 1")
    p.add_argument("--beta2", type=float, default=1.0, help="GAV exponent 2")
    p.add_argument("--sigma", type=float, default=3.0, help="RSF Gaussian width")
    p.add_argument("--window", type=int, default=15, help="LCV/HYB box window (odd)")
    p.add_argument("--tau", type=float, default=1e-2, help="time step")
    p.add_argument("--tol", type=float, default=1e-4, help="relative stopping tolerance")
    p.add_argument("--max-iters", type=int, default=2000, help="iteration cap")
    p.add_argument(
        "--threshold", type=float, default=0.5, help="mask threshold gamma in (0,1)"
    )
    p.add_argument(
        "--distance",
        choices=DISTANCE_MODES,
        default="geodesic",
        help="marker distance mode",
    )


def _fitting_from(args):
    try:
        return FittingSpec(
            model=args.model,
            c1=args.c1,
            c2=args.c2,
            rsf_sigma=args.sigma,
            lcv_window=args.window,
            gav_beta1=args.beta1,
            gav_beta2=args.beta2,
            pm_gamma1=args.gamma1,
            pm_gamma2=args.gamma2,
        )
    except ValueError as exc:
        _fail(2, exc)


def _config_from(args):
    try:
        return SolverConfig(
            lambda_tilde=args.lambda_tilde,
            theta=args.theta,
            alpha=args.alpha,
            tau=args.tau,
            tol=args.tol,
            max_iters=args.max_iters,
            gamma=args.threshold,
            distance=args.distance,
        )
    except ValueError as exc:
        _fail(2, exc)


def _load_points(path, what):
    try:
        with open(path, "r", encoding="ascii") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        _fail(3, f"cannot read {what} from {path}: {exc}")
    if not isinstance(data, list):
        _fail(3, f"{what} file {path} must hold a JSON array of [x, y] pairs")
    points = []
    for item in data:
        if (
            not isinstance(item, (list, tuple))
            or len(item) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in item)
        ):
            _fail(3, f"{what} file {path} must hold integer [x, y] pairs")
        points.append((item[0], item[1]))
    return points


def _print_result(result, gt):
    print(f"iterations={result.iterations}")
    print(f"converged={'true' if result.converged else 'false'}")
    print(f"residual={result.residual!r}")
    if gt is not None:
        score = tanimoto(result.mask, gt)
        print(f"TC={score.tc:.3f}")


def _cmd_segment(args):
    try:
        image = load_image(args.image)
    except (OSError, ValueError) as exc:
        _fail(3, f"cannot load image {args.image}: {exc}")
    markers = _load_points(args.markers, "markers")
    hard = None
    if args.hard_bg:
        hard = _load_points(args.hard_bg, "hard background")
    gt = None
    if args.gt:
        try:
            gt = load_mask(args.gt)
        except (OSError, ValueError) as exc:
            _fail(3, f"cannot load ground truth {args.gt}: {exc}")
    spec = _fitting_from(args)
    cfg = _config_from(args)
    try:
        marker_input = MarkerInput.from_points(
            markers, image.height, image.width, hard_background=hard
        )
    except ValueError as exc:
        _fail(2, exc)
    result = segment(image, marker_input, spec, cfg)
    if args.out:
        try:
            save_mask(result.mask, args.out)
        except (OSError, ValueError) as exc:
            _fail(3, f"cannot write mask to {args.out}: {exc}")
        print(f"mask={args.out}")
    _print_result(result, gt)
    if args.strict and not result.converged:
        _fail(4, f"did not converge within {cfg.max_iters} iterations")
    return 0


def _parse_values(text):
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        _fail(2, f"bad grid values {text!r}: {exc}")
    if not values:
        _fail(2, f"bad grid values {text!r}: empty")
    return values


def _cmd_sweep(args):
    fixture = make_fixture(args.fixture, args.size)
    spec = _fitting_from(args)
    cfg = _config_from(args)
    grid = None
    if args.lambda_values or args.theta_values:
        lam = _parse_values(args.lambda_values) if args.lambda_values else None
        theta = _parse_values(args.theta_values) if args.theta_values else None
        base = SweepGrid()
        grid = SweepGrid(
            lambda_values=lam or base.lambda_values,
            theta_values=theta or base.theta_values,
        )
    report = sweep(fixture, spec, base_config=cfg, grid=grid)
    prefix = args.out_prefix
    try:
        write_heatmap_csv(report, prefix + ".csv")
        write_heatmap_json(report, prefix + ".json")
        write_heatmap_png(report, prefix + ".png")
    except OSError as exc:
        _fail(3, f"cannot write reports to {prefix}.*: {exc}")
    lam, theta, tc = report.best
    print(f"cells={report.tc.size}")
    print(f"best_lambda={lam!r}")
    print(f"best_theta={theta!r}")
    print(f"best_tc={tc:.4f}")
    print(f"fraction_tc_ge_0.9={report.fraction_at_least(0.9):.4f}")
    print(f"csv={prefix}.csv")
    print(f"json={prefix}.json")
    print(f"png={prefix}.png")
    return 0


def _cmd_robustness(args):
    fixture = make_fixture(args.fixture, args.size)
    spec = _fitting_from(args)
    cfg = _config_from(args)
    report = robustness_study(
        fixture,
        spec,
        base_config=cfg,
        trials=args.trials,
        seed=args.seed,
        marker_count=args.count,
    )
    prefix = args.out_prefix
    try:
        write_robustness_csv(report, prefix + ".csv")
        write_robustness_json(report, prefix + ".json")
    except OSError as exc:
        _fail(3, f"cannot write reports to {prefix}.*: {exc}")
    print(f"trials={len(report.tc)}")
    print(f"median={report.median!r}")
    print(f"q1={report.q1!r}")
    print(f"q3={report.q3!r}")
    print(f"non_outlier_min={report.non_outlier_min!r}")
    print(f"outliers={len(report.outliers)}")
    print(f"csv={prefix}.csv")
    print(f"json={prefix}.json")
    return 0


def _cmd_fixture(args):
    fixture = make_fixture(args.kind, args.size)
    try:
        from .image_io import save_image

        save_image(fixture.image, args.out)
        print(f"image={args.out}")
        if args.gt_out:
            save_mask(fixture.ground_truth, args.gt_out)
            print(f"gt={args.gt_out}")
    except (OSError, ValueError) as exc:
        _fail(3, f"cannot write fixture files: {exc}")
    if args.markers_out:
        try:
            with open(args.markers_out, "w", encoding="ascii") as fh:
                json.dump([list(m) for m in fixture.markers], fh)
                fh.write("\n")
        except OSError as exc:
            _fail(3, f"cannot write markers to {args.markers_out}: {exc}")
        print(f"markers={args.markers_out}")
    return 0


def _cmd_serve(args):
    import uvicorn

    from .service import create_app

    port = args.port
    if port is None:
        port = int(os.environ.get("SELSEG_PORT", DEFAULT_PORT))
    uvicorn.run(create_app(), host=args.host, port=port, log_level=args.log_level)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="selseg", description="Marker-driven selective segmentation."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment one image from marker points")
    p.add_argument("--image", required=True, help="input image (PGM or PNG)")
    p.add_argument(
        "--markers", required=True, help="JSON file with [x, y] marker points"
    )
    p.add_argument("--hard-bg", help="JSON file with [x, y] hard background pixels")
    p.add_argument("--gt", help="ground-truth mask; prints TC when given")
    p.add_argument("--out", help="output mask path (PGM or PNG)")
    p.add_argument(
        "--strict", action="store_true", help="exit 4 when not converged"
    )
    _add_model_flags(p)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("sweep", help="parameter heatmap over a synthetic fixture")
    p.add_argument("--fixture", choices=FIXTURE_KINDS, required=True)
    p.add_argument("--size", type=int, default=128, help="fixture side length")
    p.add_argument("--out-prefix", required=True, help="writes PREFIX.{csv,json,png}")
    p.add_argument("--lambda-values", help="comma list overriding the lambda axis")
    p.add_argument("--theta-values", help="comma list overriding the theta axis")
    _add_model_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("robustness", help="random-marker study on a fixture")
    p.add_argument("--fixture", choices=FIXTURE_KINDS, required=True)
    p.add_argument("--size", type=int, default=128, help="fixture side length")
    p.add_argument("--out-prefix", required=True, help="writes PREFIX.{csv,json}")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=3, help="markers per trial")
    _add_model_flags(p)
    p.set_defaults(func=_cmd_robustness)

    p = sub.add_parser("fixture", help="write a synthetic fixture to disk")
    p.add_argument("--kind", choices=FIXTURE_KINDS, required=True)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--out", required=True, help="image output path")
    p.add_argument("--gt-out", help="ground-truth mask output path")
    p.add_argument("--markers-out", help="default marker JSON output path")
    p.set_defaults(func=_cmd_fixture)

    p = sub.add_parser("serve", help="run the local HTTP segmentation service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument(
        "--port",
        type=int,
        default=None,
        help=f"port (default: SELSEG_PORT or {DEFAULT_PORT})",
    )
    p.add_argument("--log-level", default="warning")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

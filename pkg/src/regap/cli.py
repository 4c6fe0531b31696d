"""``regap`` command line: train, verify-bound, gen-data, detect, evaluate, sweep.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O error (also a
partial failure in ``detect``), 3 assumption-check failure, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from regap import config as cfgmod
from regap.dataio import (
    GENERATED,
    ImageFormatError,
    SyntheticSpec,
    TensorFormatError,
    gen_benchmark,
    load_dataset,
    load_image,
    load_tensor,
    save_dataset,
    toy_manifold_dataset,
)
from regap.detector import calibrate_threshold, detect_batch, write_records_csv
from regap.evalharness import AXES, robustness_sweep, run_benchmark
from regap.model import (
    LinearPair,
    ModelFormatError,
    check_assumptions,
    dct_basis_pair,
    load_model,
    pca_pair,
    save_model,
    train_autoencoder,
)
from regap.spectral import bound_sweep, write_bound_csv

logger = logging.getLogger("regap")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_ASSUMPTION, EXIT_VERIFY = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML experiment config")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--tau", type=float, help="fixed decision threshold (overrides calibration)")
    common.add_argument("--output", type=Path, help="output directory (overrides paths.output_dir)")

    parser = _Parser(prog="regap", description="Reconstruction-gap detection and bound verification.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("train", parents=[common], help="train or build an autoencoder and save it")
    sub.add_parser("verify-bound", parents=[common], help="check the reconstruction lower bound")
    sub.add_parser("gen-data", parents=[common], help="write the synthetic benchmark")
    p = sub.add_parser("detect", parents=[common], help="classify individual images")
    p.add_argument("images", nargs="+", type=Path)
    sub.add_parser("evaluate", parents=[common], help="run the benchmark grid")
    p = sub.add_parser("sweep", parents=[common], help="robustness sweep along one axis")
    p.add_argument("--axis", required=True, choices=AXES)
    return parser


def _load(args) -> cfgmod.ExperimentConfig:
    cfg = cfgmod.load_config(args.config) if args.config else cfgmod.ExperimentConfig()
    cfgmod.apply_overrides(cfg, args.seed, args.tau, args.output)
    cfg.validate()
    cfg.require_seed()
    return cfg


def _output_dir(cfg) -> Path:
    out = Path(cfg.paths.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _model(cfg):
    path = cfg.paths.resolved("model")
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    return load_model(path)


def _dataset(cfg):
    return load_dataset(cfg.paths.resolved("dataset"))


def _training_images(cfg):
    if cfg.paths.train_data:
        path = Path(cfg.paths.train_data)
        if not path.exists():
            raise FileNotFoundError(f"training data not found: {path}")
        stack = load_tensor(path)
        if stack.ndim == 3:
            stack = stack[..., None]
        return list(stack)
    return None


def cmd_train(cfg) -> int:
    m = cfg.model
    prior = cfg.prior()
    data = _training_images(cfg)
    if m.kind == "linear":
        model = pca_pair(data, m.latent_dim) if data is not None else dct_basis_pair(
            cfg.image_shape, m.latent_dim, m.scale, m.offset)
    else:
        if data is None:
            data = toy_manifold_dataset(cfg.image_shape, m.latent_dim, m.n_train, cfg.seed)
        model, report = train_autoencoder(data, prior, cfg.train_config())
        print(f"training: recon_mse={report.recon_mse:.3e} latent_mse={report.latent_mse:.3e}")
    path = cfg.paths.resolved("model")
    path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, path)
    a = cfg.assumptions
    rep = check_assumptions(model, prior, a.n_samples, cfg.seed, a.a1_tol, a.a2_tol, a.a3_tol)
    for line in rep.lines():
        print(line)
    print(f"model written to {path}")
    return EXIT_OK if rep.all_pass else EXIT_ASSUMPTION


def cmd_verify_bound(cfg) -> int:
    model = _model(cfg)
    prior = cfg.prior()
    a = cfg.assumptions
    rep = check_assumptions(model, prior, a.n_samples, cfg.seed, a.a1_tol, a.a2_tol, a.a3_tol)
    if not rep.pass_a2:
        print(f"A2 violated: decoder Jacobian is rank deficient (sigma_min = {rep.a2_sigma_min:.3e})",
              file=sys.stderr)
        return EXIT_ASSUMPTION
    v = cfg.verify
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 7]))
    rows = bound_sweep(model, prior, v.magnitudes, v.trials, rng, allowance_constant=v.allowance)
    path = _output_dir(cfg) / "bound_sweep.csv"
    write_bound_csv(rows, path)
    for r in rows:
        print(f"m={r.magnitude:g} mean_error={r.mean_error:.6e} frac_simple={r.frac_simple:.3f} "
              f"frac_stated={r.frac_stated:.3f}")
    print(f"bound sweep written to {path}")
    if isinstance(model, LinearPair) and any(r.frac_simple < 1.0 for r in rows):
        print("simple lower bound failed on a linear pair", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_gen_data(cfg) -> int:
    model = _model(cfg)
    d = cfg.data
    spec = SyntheticSpec(d.n_real, d.n_generated, cfg.offset_distribution(), d.noise_floor, d.split, cfg.seed)
    cal, ev = gen_benchmark(model, cfg.prior(), spec)
    root = cfg.paths.resolved("dataset")
    save_dataset(root, cal, ev)
    print(f"dataset written to {root}: {len(cal)} calibration, {len(ev)} evaluation")
    return EXIT_OK


def _tau_for_detect(cfg, model, metric, edit_set):
    if cfg.detect.tau is not None:
        return cfg.detect.tau
    cal, _ = _dataset(cfg)
    reals = [s.image for s in cal if s.label != GENERATED]
    recs = detect_batch(model, metric, edit_set, cfg.detect.aggregation, None, reals, cfg.seed,
                        prior=cfg.prior())
    return calibrate_threshold([r.delta_star for r in recs if not r.failed], cfg.detect.retention)


def cmd_detect(cfg, image_paths) -> int:
    model = _model(cfg)
    metric = cfg.detect.metrics[0]
    edit_set = cfg.edit_set()
    calibration = _tau_for_detect(cfg, model, metric, edit_set)
    images, ids, failures = [], [], {}
    for p in image_paths:
        try:
            images.append(load_image(p))
            ids.append(str(p))
        except (OSError, ImageFormatError, TensorFormatError) as exc:
            failures[str(p)] = str(exc)
    recs = {r.id: r for r in detect_batch(model, metric, edit_set, cfg.detect.aggregation, calibration,
                                         images, cfg.seed, prior=cfg.prior(), ids=ids)}
    ordered = []
    for p in image_paths:
        key = str(p)
        if key in failures:
            print(f"{key}\tError\t{failures[key]}", file=sys.stderr)
            continue
        r = recs[key]
        if r.failed:
            failures[key] = r.error
            print(f"{key}\tError\t{r.error}", file=sys.stderr)
        else:
            print(f"{key}\t{r.verdict.value}\t{r.delta_star:.6f}")
        ordered.append(r)
    write_records_csv(ordered, _output_dir(cfg) / "detections.csv")
    return EXIT_IO if failures else EXIT_OK


def cmd_evaluate(cfg) -> int:
    model = _model(cfg)
    cal, ev = _dataset(cfg)
    d = cfg.detect
    result = run_benchmark(model, cal, ev, cfg.edit_set(), d.metrics, d.aggregations, cfg.seed,
                           d.retention, d.tau, prior=cfg.prior(), output_dir=_output_dir(cfg))
    print(result.summary(), end="")
    return EXIT_OK


def cmd_sweep(cfg, axis) -> int:
    model = _model(cfg)
    cal, ev = _dataset(cfg)
    s, d = cfg.sweep, cfg.detect
    grid = s.jpeg_quality if axis == "jpeg-quality" else s.crop_ratio
    curve = robustness_sweep(model, cal, ev, cfg.edit_set(), axis, grid, cfg.seed, s.metric, d.aggregation,
                             d.retention, s.tau_mode, d.tau, prior=cfg.prior(), output_dir=_output_dir(cfg))
    for p in curve.points:
        print(f"{axis}={p.parameter:g} ap={p.report.ap:.6f} auroc={p.report.auroc:.6f} tau={p.report.tau:.6f}")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        cfg = _load(args)
    except UsageError as exc:
        print(f"regap: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except cfgmod.ConfigError as exc:
        print(f"regap: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"regap: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "verify-bound":
            return cmd_verify_bound(cfg)
        if args.command == "gen-data":
            return cmd_gen_data(cfg)
        if args.command == "detect":
            return cmd_detect(cfg, args.images)
        if args.command == "evaluate":
            return cmd_evaluate(cfg)
        return cmd_sweep(cfg, args.axis)
    except (OSError, ModelFormatError, ImageFormatError, TensorFormatError) as exc:
        print(f"regap: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # covers ConfigError and constraint violations such as a tube-radius overflow
        print(f"regap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

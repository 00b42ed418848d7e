"""Command-line front end.

Subcommands: describe (mask -> harmonic amplitudes), reconstruct (mask ->
truncated-series masks), train / eval / compare (synthetic desk-scale
experiments). Exit codes: 0 success, 1 usage error, 2 unreadable or
malformed file, 3 domain error such as a degenerate object.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import pnm
from .contour import area_centroid, radial_profile, trace_contour
from .data import make_dataset
from .errors import FourierShapeError, InvalidParams, PnmError
from .fourier import (
    fill_polygon,
    fourier_coefficients,
    reconstruct_boundary,
    write_descriptors_csv,
)
from .loss import MATCH_MODES
from .metrics import write_metrics_csv
from .trainer import (
    LOSS_KINDS,
    TrainConfig,
    evaluate,
    load_model,
    net_predictor,
    save_model,
    train,
)

_USAGE_EXIT = 1
_IO_EXIT = 2
_DOMAIN_EXIT = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage failures raise instead of exiting 2."""

    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="fouriershape", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_desc = sub.add_parser("describe", help="harmonic amplitudes of a mask")
    p_desc.add_argument("mask", help="PBM/PGM mask file")
    p_desc.add_argument("--order", type=int, default=8)
    p_desc.add_argument("--out", help="write the descriptor CSV here")

    p_rec = sub.add_parser("reconstruct", help="truncated-series reconstructions")
    p_rec.add_argument("mask", help="PBM/PGM mask file")
    p_rec.add_argument("--orders", default="1,2,4,8", help="comma-separated orders")
    p_rec.add_argument("--outdir", required=True)

    for name in ("train", "eval", "compare"):
        p = sub.add_parser(name, help=f"{name} on a synthetic dataset")
        _add_dataset_flags(p)
        if name == "train":
            _add_train_flags(p)
            p.add_argument("--outdir", required=True)
            p.add_argument("--config", help="key = value file overriding flags")
        elif name == "eval":
            group = p.add_mutually_exclusive_group(required=True)
            group.add_argument("--model", help="model file from train")
            group.add_argument(
                "--oracle",
                action="store_true",
                help="use the ground truth as the prediction",
            )
            p.add_argument("--split", default="test", choices=("train", "val", "test"))
            p.add_argument("--out", required=True, help="metrics CSV path")
        else:
            _add_train_flags(p)
            p.add_argument("--losses", default="cross-entropy,fourier-adaptive,fourier-fixed")
            p.add_argument("--seeds", default="0,1,2,3,4")
            p.add_argument("--outdir", required=True)
            p.add_argument("--config", help="key = value file overriding flags")
    return parser


def _add_dataset_flags(p) -> None:
    p.add_argument("--data-seed", type=int, default=7)
    p.add_argument("--train-count", type=int, default=200)
    p.add_argument("--val-count", type=int, default=50)
    p.add_argument("--test-count", type=int, default=100)
    p.add_argument("--width", type=int, default=96)
    p.add_argument("--height", type=int, default=96)
    p.add_argument("--contrast", type=float, default=0.05)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--harmonics", type=int, default=4)


def _add_train_flags(p) -> None:
    p.add_argument("--loss", default="fourier-adaptive", choices=LOSS_KINDS)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--omega-init", default="3.0,1.0", help="comma-separated weights")
    p.add_argument("--param-lr", type=float, default=5e-2)
    p.add_argument("--omega-lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--max-epochs", type=int, default=60)
    p.add_argument("--patience", default="10", help="epochs without improvement, or 'none'")
    p.add_argument("--warmup", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--match-mode", default="largest", choices=MATCH_MODES)
    p.add_argument("--alpha", type=float, default=0.2, help="distance exponent")
    p.add_argument("--lambda", dest="ac_lambda", type=float, default=1.0)


_CONFIG_CASTS = {
    "loss": str,
    "order": int,
    "omega_init": str,
    "param_lr": float,
    "omega_lr": float,
    "batch_size": int,
    "max_epochs": int,
    "patience": str,
    "warmup": int,
    "seed": int,
    "match_mode": str,
    "alpha": float,
    "ac_lambda": float,
    "losses": str,
    "seeds": str,
    "data_seed": int,
    "train_count": int,
    "val_count": int,
    "test_count": int,
    "width": int,
    "height": int,
    "contrast": float,
    "noise": float,
    "harmonics": int,
}


def _apply_config_file(args: argparse.Namespace, path: str) -> None:
    """Apply `key = value` lines over parsed flags; unknown keys are errors."""
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise _UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _CONFIG_CASTS or not hasattr(args, key):
                raise _UsageError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                setattr(args, key, _CONFIG_CASTS[key](value))
            except ValueError as exc:
                raise _UsageError(f"{path}:{lineno}: {exc}") from exc


def _parse_patience(text: str) -> int | None:
    if text.strip().lower() == "none":
        return None
    try:
        return int(text)
    except ValueError as exc:
        raise _UsageError(f"patience must be an integer or 'none': {text!r}") from exc


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise _UsageError(f"expected comma-separated numbers: {text!r}") from exc


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise _UsageError(f"expected comma-separated integers: {text!r}") from exc


def _train_config(args: argparse.Namespace, loss=None, seed=None) -> TrainConfig:
    return TrainConfig(
        loss_kind=loss if loss is not None else args.loss,
        order=args.order,
        omega_init=_parse_floats(args.omega_init),
        param_lr=args.param_lr,
        omega_lr=args.omega_lr,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=_parse_patience(args.patience),
        warmup_epochs=args.warmup,
        seed=seed if seed is not None else args.seed,
        match_mode=args.match_mode,
        hausdorff_alpha=args.alpha,
        ac_lambda=args.ac_lambda,
    )


def _dataset_from_args(args: argparse.Namespace):
    return make_dataset(
        args.data_seed,
        (args.train_count, args.val_count, args.test_count),
        width=args.width,
        height=args.height,
        contrast=args.contrast,
        noise_sigma=args.noise,
        harmonics=args.harmonics,
    )


def _describe_mask(path: str, order: int):
    mask = pnm.read_mask(path)
    contour = trace_contour(mask, "largest")
    profile = radial_profile(contour, area_centroid(mask))
    return contour, profile, fourier_coefficients(profile, order)


def cmd_describe(args: argparse.Namespace) -> int:
    if args.order < 1:
        raise _UsageError(f"--order must be at least 1, got {args.order}")
    _, _, desc = _describe_mask(args.mask, args.order)
    print(f"a0 {desc.a0:.6f}  L {desc.total_length:.6f}")
    for n in range(1, desc.order + 1):
        a, b = desc.coeffs[n - 1]
        print(f"n={n} a={a:+.6f} b={b:+.6f} Z={desc.amplitudes[n - 1]:.6f}")
    if args.out:
        write_descriptors_csv(desc, args.out)
    return 0


def cmd_reconstruct(args: argparse.Namespace) -> int:
    orders = _parse_ints(args.orders)
    if not orders or any(n < 1 for n in orders):
        raise _UsageError(f"--orders needs positive integers, got {args.orders!r}")
    mask = pnm.read_mask(args.mask)
    contour = trace_contour(mask, "largest")
    centroid = area_centroid(mask)
    profile = radial_profile(contour, centroid)
    os.makedirs(args.outdir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.mask))[0]
    for order in orders:
        desc = fourier_coefficients(profile, order)
        points = reconstruct_boundary(contour, desc, centroid)
        filled = fill_polygon(points, mask.shape)
        out_path = os.path.join(args.outdir, f"{stem}_order{order}.pbm")
        pnm.write_pbm(out_path, filled)
        print(f"order {order} -> {out_path}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    if args.config:
        _apply_config_file(args, args.config)
    config = _train_config(args)
    dataset = _dataset_from_args(args)
    os.makedirs(args.outdir, exist_ok=True)
    net, log = train(config, dataset)
    save_model(os.path.join(args.outdir, "model.bin"), net, config)
    log.write_jsonl(os.path.join(args.outdir, "runlog.jsonl"))
    with open(os.path.join(args.outdir, "config.json"), "w") as fh:
        json.dump(config.as_dict(), fh, indent=2)
    records, summary = evaluate(dataset.test, net_predictor(net))
    write_metrics_csv(records, os.path.join(args.outdir, "test_metrics.csv"))
    print(
        f"stopped at epoch {log.stopped_epoch} ({log.stop_reason}), "
        f"best epoch {log.best_epoch}"
    )
    print(f"test iou {summary['iou'][0]:.4f} +- {summary['iou'][1]:.4f}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    dataset = _dataset_from_args(args)
    samples = getattr(dataset, args.split)
    if args.oracle:
        predict = lambda sample: sample.mask.astype(np.float64)  # noqa: E731
    else:
        net, _ = load_model(args.model)
        predict = net_predictor(net)
    records, summary = evaluate(samples, predict)
    write_metrics_csv(records, args.out)
    print(f"{args.split} iou {summary['iou'][0]:.4f} +- {summary['iou'][1]:.4f}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    if args.config:
        _apply_config_file(args, args.config)
    losses = [v.strip() for v in args.losses.split(",") if v.strip()]
    unknown = [v for v in losses if v not in LOSS_KINDS]
    if not losses or unknown:
        raise _UsageError(f"--losses must name loss kinds, got {args.losses!r}")
    seeds = _parse_ints(args.seeds)
    if not seeds:
        raise _UsageError(f"--seeds needs at least one integer, got {args.seeds!r}")

    dataset = _dataset_from_args(args)
    os.makedirs(args.outdir, exist_ok=True)
    metric_names = ("precision", "recall", "fscore", "iou", "hausdorff")
    table: dict[str, dict[str, list[float]]] = {}
    for loss_kind in losses:
        cells: dict[str, list[float]] = {name: [] for name in metric_names}
        for seed in seeds:
            config = _train_config(args, loss=loss_kind, seed=seed)
            net, log = train(config, dataset)
            run_dir = os.path.join(args.outdir, "runs", f"{loss_kind}_seed{seed}")
            os.makedirs(run_dir, exist_ok=True)
            save_model(os.path.join(run_dir, "model.bin"), net, config)
            log.write_jsonl(os.path.join(run_dir, "runlog.jsonl"))
            records, summary = evaluate(dataset.test, net_predictor(net))
            write_metrics_csv(records, os.path.join(run_dir, "test_metrics.csv"))
            for name in metric_names:
                cells[name].append(summary[name][0])
            print(
                f"{loss_kind} seed {seed}: test iou {summary['iou'][0]:.4f}, "
                f"stopped {log.stopped_epoch} ({log.stop_reason})"
            )
        table[loss_kind] = cells

    summary_path = os.path.join(args.outdir, "summary.csv")
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["loss"] + list(metric_names))
        for loss_kind in losses:
            row = [loss_kind]
            for name in metric_names:
                values = [v for v in table[loss_kind][name] if not np.isnan(v)]
                if values:
                    row.append(f"{np.mean(values):.4f} ± {np.std(values):.4f}")
                else:
                    row.append("")
            writer.writerow(row)
    print(f"summary -> {summary_path}")
    return 0


_COMMANDS = {
    "describe": cmd_describe,
    "reconstruct": cmd_reconstruct,
    "train": cmd_train,
    "eval": cmd_eval,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except (_UsageError, InvalidParams) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except (FileNotFoundError, IsADirectoryError, PermissionError, PnmError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _IO_EXIT
    except FourierShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _DOMAIN_EXIT


if __name__ == "__main__":
    sys.exit(main())

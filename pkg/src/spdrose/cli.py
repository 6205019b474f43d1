"""Command line interface.

Subcommands cover the full workflow: ``extract`` turns images into
precomputed covariance datasets, ``synth`` augments a dataset with
generated points, ``train``/``eval`` persist and score a projection
model plus classifier, ``run`` and ``degrade`` execute the experiment
protocols over a single labeled dataset (the config holds the split
rule), and ``jl-check`` audits embedding fidelity.  Reports go to
``--out`` when given, otherwise to standard output.

Exit codes: 0 on success, 2 for configuration and usage problems, 3 for
malformed or unusable data.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import classify, pipeline
from .descriptors import (
    ColorImage,
    GrayImage,
    box_downsample,
    DEFAULT_EPS_REL,
    grid_covariances,
)
from .embedding import (
    build_projection_model,
    embed_batch,
    jl_distortion_report,
    load_projection_model,
    save_projection_model,
)
from .errors import ConfigError, SpdRoseError
from .io import read_pgm, read_ppm
from .pipeline import FEATURE_MODES, ExperimentConfig
from .seeding import derive_seed
from .stein import KernelParams
from .synthesis import DIRECTION_MODES, SynthesisConfig, generate_synthetic

_IMAGE_MODES = {name: spec for name, spec in FEATURE_MODES.items() if spec[1]}


def _parse_labels(args, count):
    if args.labels is not None:
        try:
            labels = [int(v) for v in args.labels.split(",")]
        except ValueError as exc:
            raise ConfigError(f"labels must be integers: {args.labels!r}") from exc
        if len(labels) != count:
            raise ConfigError(f"{len(labels)} labels given for {count} image(s)")
        return labels
    return [args.label] * count


def _cmd_extract(args):
    kind, feature_map = _IMAGE_MODES[args.features]
    labels = _parse_labels(args, len(args.images))
    points, point_labels = [], []
    for image_path, label in zip(args.images, labels):
        suffix = os.path.splitext(image_path)[1].lower()
        if kind == "gray-image":
            if suffix != ".pgm":
                raise ConfigError(
                    f"{args.features} features need a .pgm image, got {image_path}"
                )
            image = read_pgm(image_path)
            if args.downsample > 1:
                image = GrayImage(box_downsample(image.pixels, args.downsample))
        else:
            if suffix != ".ppm":
                raise ConfigError(
                    f"{args.features} features need a .ppm image, got {image_path}"
                )
            image = read_ppm(image_path)
            if args.downsample > 1:
                image = ColorImage(box_downsample(image.pixels, args.downsample))
        features = feature_map(image)
        cells = grid_covariances(features, args.rows, args.cols, args.eps_rel)
        points.extend(cells)
        point_labels.extend([label] * len(cells))
    manifest = pipeline.save_dataset(args.out, points, point_labels)
    print(f"wrote {len(points)} descriptor(s) to {manifest}")
    return 0


def _cmd_synth(args):
    points, _ = pipeline.load_dataset(args.data)
    config = SynthesisConfig(
        count=args.count, seed=args.seed, direction_mode=args.direction_mode
    )
    synthetic = generate_synthetic(points, config)
    # Synthetic points are unlabeled; the placeholder label 0 keeps the
    # output manifest well-formed.
    manifest = pipeline.save_dataset(
        args.out, synthetic, [0] * len(synthetic), prefix="synthetic"
    )
    print(f"wrote {len(synthetic)} synthetic point(s) to {manifest}")
    return 0


def _cmd_train(args):
    points, labels = pipeline.load_dataset(args.train)
    params = KernelParams(sigma=args.sigma, psd_policy=args.psd_policy)
    pool = list(points)
    if args.synthetic > 0:
        config = SynthesisConfig(
            count=args.synthetic,
            seed=derive_seed(args.seed, 1),
            direction_mode=args.direction_mode,
        )
        pool.extend(generate_synthetic(pool, config))
    k = args.k if args.k else pipeline.K_POLICIES[args.k_policy] * len(points)
    model = build_projection_model(
        pool,
        k=k,
        params=params,
        t=args.t,
        exponent_mode=args.exponent_mode,
        seed=derive_seed(args.seed, 2),
    )
    embedded = np.array(embed_batch(model, points))
    classifier = classify.train_ova_svm(
        embedded,
        labels,
        regularization=args.regularization,
        epochs=args.epochs,
        seed=derive_seed(args.seed, 3),
    )
    os.makedirs(args.out, exist_ok=True)
    save_projection_model(os.path.join(args.out, "model.json"), model)
    classify.save_classifier(os.path.join(args.out, "classifier.json"), classifier)
    print(
        f"trained on {len(points)} point(s) "
        f"(pool {model.p}, k {model.k}, t {model.t}); wrote {args.out}"
    )
    return 0


def _cmd_eval(args):
    model = load_projection_model(os.path.join(args.model, "model.json"))
    classifier = classify.load_classifier(os.path.join(args.model, "classifier.json"))
    points, labels = pipeline.load_dataset(args.test)
    embedded = np.array(embed_batch(model, points))
    predictions = classify.predict(classifier, embedded)
    result = classify.evaluate_accuracy(labels, predictions)
    print(
        json.dumps(
            {
                "total": result.total,
                "correct": result.correct,
                "accuracy": repr(result.accuracy),
                "per_class": {str(c): repr(a) for c, a in result.by_class},
            },
            indent=1,
            sort_keys=True,
        )
    )
    return 0


def _load_run_config(args):
    config = pipeline.load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    return config


def _emit_report(args, report):
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(report.to_json(include_timing=args.include_timing))
            fh.write("\n")
    else:
        print(report.to_json(include_timing=args.include_timing))


def _cmd_run(args):
    config = _load_run_config(args)
    points, labels = pipeline.load_dataset(args.data)
    report = pipeline.run_experiment(points, labels, config)
    _emit_report(args, report)
    if args.out:
        print(
            f"mean accuracy {report.mean_accuracy:.4f} over {config.reps} rep(s); "
            f"baseline {report.mean_knn_accuracy:.4f}; wrote {args.out}"
        )
    return 0


def _cmd_degrade(args):
    config = _load_run_config(args)
    points, labels = pipeline.load_dataset(args.data)
    counts = None
    if args.counts is not None:
        try:
            counts = [int(v) for v in args.counts.split(",")]
        except ValueError as exc:
            raise ConfigError(f"counts must be integers: {args.counts!r}") from exc
    report = pipeline.degradation_study(
        points, labels, config,
        excluded_class_counts=counts,
        synthetic_budget=args.budget,
    )
    _emit_report(args, report)
    if args.out:
        plain = ", ".join(f"{m:.4f}" for m in report.arm_means(pipeline.MODE_PLAIN))
        augmented = ", ".join(
            f"{m:.4f}" for m in report.arm_means(pipeline.MODE_AUGMENTED)
        )
        print(f"{pipeline.MODE_PLAIN} means: {plain}")
        print(f"{pipeline.MODE_AUGMENTED} means: {augmented}")
    return 0


def _cmd_jl_check(args):
    points, _ = pipeline.load_dataset(args.data)
    try:
        ks = [int(v) for v in str(args.k).split(",")]
    except ValueError as exc:
        raise ConfigError(f"k must be integers: {args.k!r}") from exc
    params = KernelParams(sigma=args.sigma, psd_policy=args.psd_policy)
    records = []
    for k in ks:
        model = build_projection_model(
            points, k=k, params=params,
            exponent_mode=args.exponent_mode, seed=args.seed,
        )
        report = jl_distortion_report(model, points, args.epsilon)
        records.append(
            {
                "pair_count": report.pair_count,
                "fraction_within": report.fraction_within,
                "median_distortion": report.median_distortion,
                "epsilon": report.epsilon,
                "k": report.k,
            }
        )
    payload = records[0] if len(records) == 1 else records
    print(json.dumps(payload, indent=1, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdrose",
        description="Covariance descriptors, log-det kernels, and random "
        "hyperplane embeddings for SPD matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="images to covariance descriptors")
    p.add_argument("images", nargs="+", help="PGM or PPM files")
    p.add_argument("--features", choices=sorted(_IMAGE_MODES), default="intensity5")
    p.add_argument("--rows", type=int, default=2)
    p.add_argument("--cols", type=int, default=2)
    p.add_argument("--eps-rel", type=float, default=DEFAULT_EPS_REL)
    p.add_argument("--downsample", type=int, default=1)
    p.add_argument("--label", type=int, default=0, help="label for every image")
    p.add_argument("--labels", help="comma-separated per-image labels")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("synth", help="generate unlabeled synthetic points")
    p.add_argument("--data", required=True, help="input dataset manifest")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--direction-mode", choices=DIRECTION_MODES,
                   default="tangent_gaussian")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="fit projection model and classifier")
    p.add_argument("--train", required=True, help="training dataset manifest")
    p.add_argument("--out", required=True, help="output model directory")
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--psd-policy", choices=("clamp", "strict"), default="clamp")
    p.add_argument("--k", type=int, default=0,
                   help="hyperplane count (overrides --k-policy)")
    p.add_argument("--k-policy", choices=sorted(pipeline.K_POLICIES), default="2n")
    p.add_argument("--t", type=int, default=None, help="exemplars per hyperplane")
    p.add_argument("--exponent-mode", choices=("whitening", "paper_literal"),
                   default="whitening")
    p.add_argument("--synthetic", type=int, default=0, help="synthetic pool budget")
    p.add_argument("--direction-mode", choices=DIRECTION_MODES,
                   default="tangent_gaussian")
    p.add_argument("--regularization", type=float, default=classify.DEFAULT_LAMBDA)
    p.add_argument("--epochs", type=int, default=classify.DEFAULT_EPOCHS)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="score a trained model on a dataset")
    p.add_argument("--model", required=True, help="directory from `train`")
    p.add_argument("--test", required=True, help="test dataset manifest")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("run", help="full experiment protocol")
    p.add_argument("--data", required=True, help="labeled dataset manifest")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.add_argument("--include-timing", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("degrade", help="class-exclusion robustness study")
    p.add_argument("--data", required=True, help="labeled dataset manifest")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--counts", help="comma-separated exclusion counts")
    p.add_argument("--budget", type=int, default=None, help="augmented-arm budget")
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.add_argument("--include-timing", action="store_true")
    p.set_defaults(func=_cmd_degrade)

    p = sub.add_parser("jl-check", help="embedding distortion report")
    p.add_argument("--data", required=True, help="dataset manifest")
    p.add_argument("--k", required=True, help="hyperplane count or comma list")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--psd-policy", choices=("clamp", "strict"), default="clamp")
    p.add_argument("--exponent-mode", choices=("whitening", "paper_literal"),
                   default="whitening")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_jl_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SpdRoseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

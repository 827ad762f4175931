"""Command-line entry point: ``mmml <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import MMMLError
from ..metric_learning import DEFAULT_DZ, DEFAULT_EPS, DEFAULT_U, classify, fit
from ..set_modeling import DEFAULT_ALPHA, DEFAULT_Q, ImageSet, model_set
from .data import ingest, read_manifest, read_set_file, write_dataset
from .experiment import (SWEEP_AXES, Hyper, SplitConfig, config_echo, format_report,
                         format_sweep, model_all, run_experiment, sweep)
from .persistence import load_model, save_model
from .synth import PRESETS, synth_generate

log = logging.getLogger("mmml")


def _count(value, word):
    if value == word:
        return value
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or {word!r}, got {value!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _add_hyper(p):
    g = p.add_argument_group("model hyperparameters")
    g.add_argument("--q", type=int, default=DEFAULT_Q, help="subspace dimension (default %(default)s)")
    g.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                   help="covariance regularization divisor (default %(default)g)")
    g.add_argument("--u1", type=float, default=DEFAULT_U[0], help="SPD model weight (default %(default)s)")
    g.add_argument("--u2", type=float, default=DEFAULT_U[1], help="Grassmann model weight (default %(default)s)")
    g.add_argument("--dz", type=int, default=DEFAULT_DZ, help="embedding dimension (default %(default)s)")
    g.add_argument("--eps", type=float, default=DEFAULT_EPS,
                   help="within-class scatter regularization (default %(default)g)")
    g.add_argument("--models", default="spd,grassmann",
                   help="comma separated subset of spd,grassmann (default %(default)s)")
    g.add_argument("--normalize-kernels", action="store_true",
                   help="divide each Gram matrix by its mean diagonal")
    g.add_argument("--normalize-pixels", action="store_true", help="divide pixel values by 255 at ingestion")


def _add_split(p):
    g = p.add_argument_group("evaluation protocol")
    g.add_argument("--gallery", type=lambda v: _count(v, "one"), default=5,
                   help="gallery sets per class, or 'one' (default %(default)s)")
    g.add_argument("--probe", type=lambda v: _count(v, "rest"), default="rest",
                   help="probe sets per class, or 'rest' (default %(default)s)")
    g.add_argument("--folds", type=int, default=10, help="random gallery/probe draws (default %(default)s)")
    g.add_argument("--seed", type=int, default=0, help="experiment seed (default %(default)s)")
    g.add_argument("--jobs", type=int, default=1, help="folds evaluated in parallel (default %(default)s)")


def _hyper(args) -> Hyper:
    models = tuple(m.strip() for m in args.models.split(",") if m.strip())
    return Hyper(q=args.q, alpha=args.alpha, u=(args.u1, args.u2), d_z=args.dz, eps=args.eps,
                 models=models, normalize_kernels=args.normalize_kernels)


def _split(args) -> SplitConfig:
    return SplitConfig(args.gallery, args.probe, args.folds, args.seed)


def _load_sets(path, normalize):
    return ingest(read_manifest(path), normalize=normalize)


def _emit(text, output):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_synth(args):
    sets = synth_generate(args.classes, args.sets_per_class, args.images, args.d,
                          args.separation, args.seed, args.preset)
    note = (f"synthetic preset={args.preset} classes={args.classes} sets_per_class={args.sets_per_class} "
            f"images={args.images} d={args.d} separation={args.separation} seed={args.seed}")
    path = write_dataset(args.out, sets, note)
    print(path)


def cmd_ingest_check(args):
    manifest = read_manifest(args.manifest)
    sets = ingest(manifest, normalize=args.normalize_pixels)
    per_class = {}
    for s in sets:
        per_class[s.label] = per_class.get(s.label, 0) + 1
    print(f"sets={len(sets)}")
    print(f"classes={len(per_class)}")
    print(f"d={sets[0].d}")
    print(f"min_images={min(s.n for s in sets)}")
    print("class,sets")
    for label in sorted(per_class, key=str):
        print(f"{label},{per_class[label]}")


def cmd_train(args):
    sets = _load_sets(args.manifest, args.normalize_pixels)
    hyper = _hyper(args)
    points = model_all(sets, hyper.q, hyper.alpha)
    model = fit([p[0] for p in points], [p[1] for p in points], [s.label for s in sets],
                hyper.weights(), hyper.d_z, hyper.eps, kinds=hyper.kinds, q=hyper.q,
                alpha=hyper.alpha, normalize=hyper.normalize_kernels,
                set_ids=[s.set_id for s in sets])
    save_model(model, args.model)
    log.info("trained on %d sets, saved to %s", len(sets), args.model)


def cmd_predict(args):
    model = load_model(args.model)
    if args.manifest:
        probes = _load_sets(args.manifest, args.normalize_pixels)
    else:
        probes = []
        for f in args.sets:
            rows = read_set_file(f)
            samples = rows.T / 255.0 if args.normalize_pixels else rows.T
            probes.append(ImageSet(samples, None, f))
    print("set_id,predicted,distance,label")
    correct = 0
    for s in probes:
        spd, grass = model_set(s, model.q, model.alpha)
        label, neighbors = classify(model, spd, grass)
        truth = "" if s.label is None else s.label
        correct += label == s.label
        print(f"{s.set_id},{label},{neighbors[0].distance!r},{truth}")
    if args.manifest:
        print(f"accuracy={correct / len(probes)!r}")


def cmd_eval(args):
    report = run_experiment(_load_sets(args.manifest, args.normalize_pixels), _split(args),
                            _hyper(args), jobs=args.jobs)
    _emit(format_report(report), args.output)


def cmd_sweep(args):
    grid = [float(v) for v in args.grid.split(",") if v.strip()]
    sets = _load_sets(args.manifest, args.normalize_pixels)
    split, hyper = _split(args), _hyper(args)
    rows = sweep(sets, split, args.axis, grid, hyper, jobs=args.jobs)
    echo = config_echo(split, hyper, len(sets), len({s.label for s in sets}))
    _emit(format_sweep(args.axis, rows, echo), args.output)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmml", description="Multiple-manifold metric learning for image sets")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--sets-per-class", type=int, default=10)
    p.add_argument("--images", type=int, default=30, help="images per set")
    p.add_argument("--d", type=int, default=10, help="feature dimension")
    p.add_argument("--separation", type=float, default=10.0)
    p.add_argument("--preset", choices=PRESETS, default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest-check", help="validate a manifest and its set files")
    p.add_argument("manifest")
    p.add_argument("--normalize-pixels", action="store_true")
    p.set_defaults(func=cmd_ingest_check)

    p = sub.add_parser("train", help="fit on every set in a manifest and save the model")
    p.add_argument("manifest")
    p.add_argument("--model", required=True, help="output model file")
    _add_hyper(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify probe sets with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", help="labeled probe manifest (reports accuracy)")
    p.add_argument("sets", nargs="*", help="probe set files")
    p.add_argument("--normalize-pixels", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="repeated random gallery/probe evaluation")
    p.add_argument("manifest")
    p.add_argument("--output", help="write the report here instead of stdout")
    _add_hyper(p)
    _add_split(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="evaluate a grid of one hyperparameter")
    p.add_argument("manifest")
    p.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p.add_argument("--grid", required=True, help="comma separated values")
    p.add_argument("--output")
    _add_hyper(p)
    _add_split(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "predict" and not args.manifest and not args.sets:
        parser.error("predict needs --manifest or at least one set file")
    try:
        args.func(args)
    except (MMMLError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``ccs {augment,ccs,metrics,compare,simulate}``.

Exit codes: 0 success, 1 input or schema error, 2 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import statistics
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import io, plots, ttda
from .config import (
    KEYS,
    RunConfig,
    build_experiment_config,
    build_run_config,
    load_config,
    parse_values,
)
from .congruence import (
    CongruenceReport,
    DeltaRecord,
    ImageEvaluation,
    Metric,
    congruence_report,
    delta_records,
)
from .consensus import ConfigError, compute_ccs, compute_ccs_many, filter_by_score
from .metrics import GroundTruthSet, f1_score, oc_cost, ppdq_image
from .synthetic import run_congruence_experiment

log = logging.getLogger("ccs")

EXIT_OK, EXIT_INPUT, EXIT_CONFIG = 0, 1, 2
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}


class InputError(Exception):
    """Bad input data; reported with exit code 1."""


# -- shared helpers ----------------------------------------------------------


def _settings(args: argparse.Namespace) -> dict[str, Any]:
    raw: dict[str, str] = {}
    if args.config:
        raw.update(load_config(args.config))
    for key in KEYS:
        value = getattr(args, "cfg:" + key, None)
        if value is not None:
            raw[key] = value
    return parse_values(raw)


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _metric_row(preds, gt: GroundTruthSet, cfg: RunConfig) -> dict[Metric, float]:
    preds = filter_by_score(preds, cfg.ccs.detection_score_threshold)
    f1 = f1_score(preds, gt, cfg.metrics)
    return {
        Metric.F1: f1.f1,
        Metric.PPDQ: ppdq_image(preds, gt, cfg.metrics),
        Metric.OC_COST: oc_cost(preds, gt, cfg.metrics),
    }


def _ccs_table(path: str, cfg: RunConfig, threads: int):
    """Per-image CCS results (or error strings), in input order."""
    images = io.group_by_image(io.read_detections(path))
    rows: list[tuple[str, Any, Optional[str]]] = []
    ready = []
    for image_id, img in images.items():
        try:
            ready.append(img.augmented(cfg.ccs.m))
            rows.append((image_id, None, None))
        except ValueError as exc:
            rows.append((image_id, None, str(exc)))
    results = iter(compute_ccs_many(ready, cfg.ccs, threads))
    out = []
    for image_id, _, err in rows:
        out.append((image_id, None, err) if err else (image_id, next(results), None))
    return images, out


def _write_comparison(
    out: Path,
    evals1: Sequence[ImageEvaluation],
    evals2: Sequence[ImageEvaluation],
    cfg: RunConfig,
) -> dict[Metric, CongruenceReport]:
    io.write_csv(
        out / "evaluations.csv",
        ["image_id", "ccs_1", "ccs_2"] + [f"{m.value}_{k}" for m in Metric for k in (1, 2)],
        (
            [e1.image_id, e1.ccs, e2.ccs] + [e.metrics[m] for m in Metric for e in (e1, e2)]
            for e1, e2 in zip(evals1, evals2)
        ),
    )
    reports = {}
    for metric in Metric:
        records = delta_records(evals1, evals2, metric, cfg.tau, cfg.yellow_rule)
        report = congruence_report(records, metric)
        reports[metric] = report
        _write_metric_outputs(out, metric, records, report, cfg.tau)
    return reports


def _write_metric_outputs(
    out: Path, metric: Metric, records: Sequence[DeltaRecord], report: CongruenceReport, tau: float
) -> None:
    name = metric.value
    io.write_csv(
        out / f"deltas_{name}.csv",
        ["image_id", "delta_metric", "delta_ccs", "dot"],
        ([r.image_id, r.delta_metric, r.delta_ccs, r.dot.value] for r in records),
    )
    io.write_csv(out / f"trend_{name}.csv", ["rank", "delta_metric", "delta_ccs"],
                 ([i, dm, dc] for i, (dm, dc) in enumerate(report.sorted_trend)))
    (out / f"scatter_{name}.svg").write_text(plots.scatter_svg(records, tau, name), encoding="utf-8")
    (out / f"trend_{name}.svg").write_text(plots.trend_svg(report.sorted_trend, name), encoding="utf-8")


def _summary(reports: dict[Metric, CongruenceReport], cfg: RunConfig, **extra: Any) -> dict:
    return {
        "tau": cfg.tau,
        "yellow_rule": cfg.yellow_rule.value,
        "reports": {m.value: r.summary() for m, r in reports.items()},
        **extra,
    }


# -- commands ----------------------------------------------------------------


def cmd_augment(args: argparse.Namespace) -> int:
    from PIL import Image, UnidentifiedImageError

    out = _out_dir(args)
    src = Path(args.input_dir)
    if not src.is_dir():
        raise InputError(f"not a directory: {src}")
    seed = args.seed if args.seed is not None else 0
    failures = 0
    for path in sorted(p for p in src.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES):
        try:
            with Image.open(path) as im:
                img = np.asarray(im.convert("RGB"))
        except (OSError, UnidentifiedImageError) as exc:
            log.error("%s: cannot decode image: %s", path, exc)
            failures += 1
            continue
        batch = ttda.augment_all(img, seed)
        for k, (aug, spec) in enumerate(zip(batch.images, batch.specs)):
            Image.fromarray(aug).save(out / ttda.output_name(path.stem, k, spec.kind), format="PNG")
        io.write_json(out / f"{path.stem}__manifest.json",
                      {"source": path.name, "seed": seed, "augmentations": batch.manifest(path.stem)})
    return EXIT_INPUT if failures else EXIT_OK


def cmd_ccs(args: argparse.Namespace) -> int:
    cfg = build_run_config(_settings(args))
    out = _out_dir(args)
    _, table = _ccs_table(args.detections, cfg, args.threads)
    io.write_csv(out / "ccs.csv", ["image_id", "ccs", "error"],
                 ([i, r.ccs if r else None, err] for i, r, err in table))
    io.write_json(out / "ccs_detail.json", {
        i: {"gamma": [[None if np.isnan(g) else float(g) for g in row] for row in r.gamma],
            "kappa": list(r.kappa)}
        for i, r, err in table if r is not None
    })
    bad = [i for i, _, err in table if err]
    for i, _, err in table:
        if err:
            log.error("image %s: %s", i, err)
    return EXIT_INPUT if bad else EXIT_OK


def _require_known(ids, gts: dict[str, GroundTruthSet], what: str) -> None:
    unknown = [i for i in ids if i not in gts]
    if unknown:
        raise InputError(f"{what}: image ids missing from ground truth: {', '.join(unknown)}")


def cmd_metrics(args: argparse.Namespace) -> int:
    cfg = build_run_config(_settings(args))
    out = _out_dir(args)
    images = io.group_by_image(io.read_detections(args.detections))
    gts = {g.image_id: g for g in io.read_ground_truth(args.ground_truth)}
    with_baseline = [i for i, img in images.items() if io.BASELINE_INDEX in img.views]
    _require_known(with_baseline, gts, args.detections)
    rows = []
    for image_id, gt in gts.items():
        img = images.get(image_id)
        preds = filter_by_score(img.baseline if img else (), cfg.ccs.detection_score_threshold)
        f1 = f1_score(preds, gt, cfg.metrics)
        rows.append([image_id, f1.precision, f1.recall, f1.f1,
                     ppdq_image(preds, gt, cfg.metrics), oc_cost(preds, gt, cfg.metrics)])
    io.write_csv(out / "metrics.csv", ["image_id", "precision", "recall", "f1", "ppdq", "oc_cost"], rows)
    return EXIT_OK


def _evaluations(path: str, gts: dict[str, GroundTruthSet], cfg: RunConfig, threads: int):
    images, table = _ccs_table(path, cfg, threads)
    errors = [f"{i}: {err}" for i, _, err in table if err]
    if errors:
        raise InputError(f"{path}: " + "; ".join(errors))
    evals = {}
    for image_id, result, _ in table:
        evals[image_id] = ImageEvaluation(
            image_id, result.ccs, _metric_row(images[image_id].baseline, gts[image_id], cfg)
        )
    return evals


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = build_run_config(_settings(args))
    out = _out_dir(args)
    gts = {g.image_id: g for g in io.read_ground_truth(args.ground_truth)}
    ids = []
    for path in (args.det_old, args.det_new):
        ids.append(list(io.group_by_image(io.read_detections(path))))
    diff = sorted(set(ids[0]) ^ set(ids[1]))
    if diff:
        raise InputError(f"detection files cover different images: {', '.join(diff)}")
    _require_known(ids[0], gts, "compare")
    e1 = _evaluations(args.det_old, gts, cfg, args.threads)
    e2 = _evaluations(args.det_new, gts, cfg, args.threads)
    order = ids[0]
    reports = _write_comparison(out, [e1[i] for i in order], [e2[i] for i in order], cfg)
    io.write_json(out / "summary.json", _summary(reports, cfg))
    _print_reports(reports)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    values = _settings(args)
    cfg = build_run_config(values)
    exp = build_experiment_config(values)
    out = _out_dir(args)
    seed = args.seed if args.seed is not None else 0

    def run(s: int):
        return run_congruence_experiment(
            exp.n_images, exp.profile_a, exp.profile_b, cfg.ccs, cfg.metrics,
            seed=s, scene=exp.scene, m=exp.m, tau=cfg.tau, yellow_rule=cfg.yellow_rule,
        )

    result = run(seed)
    reports = _write_comparison(out, result.evaluations_a, result.evaluations_b, cfg)
    extra: dict[str, Any] = {"seed": seed, "n_images": exp.n_images, "m": exp.m}
    if args.dump_fixtures:
        for tag, dets in (("1", result.detections_a), ("2", result.detections_b)):
            io.write_detections(out / f"detections_{tag}.ndjson",
                                (r for ad in dets for r in io.records_from_augmented(ad)))
        io.write_ground_truth(out / "ground_truth.ndjson", result.ground_truth)
    if args.seed_sweep:
        rows, rhos = [], {m: [] for m in Metric}
        for s in cfg.seeds:
            rep = run(s).reports
            rows.append([s] + [rep[m].spearman_rho for m in Metric] + [rep[m].congruence_pct for m in Metric])
            for m in Metric:
                rhos[m].append(rep[m].spearman_rho)
        io.write_csv(out / "robustness.csv",
                     ["seed"] + [f"rho_{m.value}" for m in Metric] + [f"congruence_{m.value}" for m in Metric],
                     rows)
        extra["robustness"] = {
            m.value: _mean_std([v for v in rhos[m] if v is not None]) for m in Metric
        }
        extra["robustness_seeds"] = list(cfg.seeds)
    io.write_json(out / "summary.json", _summary(reports, cfg, **extra))
    _print_reports(reports)
    return EXIT_OK


def _mean_std(values: list[float]) -> dict[str, Optional[float]]:
    if not values:
        return {"mean": None, "std": None}
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return {"mean": statistics.fmean(values), "std": std}


def _print_reports(reports: dict[Metric, CongruenceReport]) -> None:
    for m, r in reports.items():
        pct = "n/a" if r.congruence_pct is None else f"{r.congruence_pct:.2f}%"
        rho = "n/a" if r.spearman_rho is None else f"{r.spearman_rho:.4f}"
        print(f"{m.value:8s} total={r.total_images} yellow={r.yellow} considered={r.considered} "
              f"green={r.green} blue={r.blue} red={r.red} congruence={pct} rho={rho}")


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--config", help="key=value config file")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--out-dir", default=".")
    k = common.add_argument_group("config overrides")
    for key in KEYS:
        k.add_argument(f"--{key}", dest="cfg:" + key, metavar="VALUE", default=None)

    parser = argparse.ArgumentParser(prog="ccs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", parents=[common], help="write the nine photometric augmentations")
    p.add_argument("input_dir")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("ccs", parents=[common], help="per-image CCS from a detection file")
    p.add_argument("detections")
    p.set_defaults(func=cmd_ccs)

    p = sub.add_parser("metrics", parents=[common], help="F1, pPDQ and OC-cost against ground truth")
    p.add_argument("detections")
    p.add_argument("ground_truth")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compare", parents=[common], help="congruence of two detectors (first = detector 1)")
    p.add_argument("det_old")
    p.add_argument("det_new")
    p.add_argument("ground_truth")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", parents=[common], help="congruence experiment on simulated detectors")
    p.add_argument("--dump-fixtures", action="store_true", help="also write detection/gt files")
    p.add_argument("--seed-sweep", action="store_true", help="rerun for every robustness.seeds value")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (io.SchemaError, InputError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

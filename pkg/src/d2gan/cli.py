"""Command-line front end: train runs, verify the closed-form identities,
sweep manifests of configs, and emit figure-ready CSV bundles.

Output root resolution order: --out flag, then the D2GAN_OUT environment
variable, then ./runs. All CSV floats are written with repr so files
round-trip to full precision.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .trainer import (
    ConfigError,
    TrainConfig,
    TrainingDivergedError,
    default_run_id,
    load_metric_rows,
    train,
)
from .verify import report_to_json, run_verification

_TRAIN_OVERRIDES = {
    "model": str,
    "alpha1": float,
    "alpha2": float,
    "c1": float,
    "c2": float,
    "lr": float,
    "seed": int,
    "epochs": int,
    "batch_size": int,
    "noise_dim": int,
    "metric_every": int,
    "snapshot_every": int,
    "checkpoint_every": int,
    "hidden": int,
}


def _output_root(value: "str | None") -> Path:
    return Path(value or os.environ.get("D2GAN_OUT") or "runs")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="d2gan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one training configuration")
    p_train.add_argument("--config", help="JSON file of TrainConfig fields")
    for name, typ in _TRAIN_OVERRIDES.items():
        p_train.add_argument(f"--{name.replace('_', '-')}", type=typ, default=None)
    p_train.add_argument("--nonsaturating", action="store_true", default=None)
    p_train.add_argument("--run-id", default=None)
    p_train.add_argument("--out", default=None, help="output root (default $D2GAN_OUT or ./runs)")

    p_verify = sub.add_parser("verify", help="check every closed-form identity numerically")
    p_verify.add_argument("--trials", type=int, default=100)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--report", default="verify_report.json")
    p_verify.add_argument(
        "--inject-bug",
        action="store_true",
        help="fault-injection canary: perturb the closed-form exponent by 1e-3; "
        "the value identity must then fail",
    )

    p_sweep = sub.add_parser("sweep", help="run a manifest of configurations")
    p_sweep.add_argument("manifest")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", default=None)

    p_report = sub.add_parser("report", help="emit aligned metric curves and snapshot scatters")
    p_report.add_argument("run_ids", nargs="+")
    p_report.add_argument("--root", default=None, help="root containing run directories")
    p_report.add_argument("--out", default=None, help="destination directory")
    return parser


# --------------------------------------------------------------------------
# train


def cmd_train(args) -> int:
    fields = {}
    if args.config:
        cfg_path = Path(args.config)
        if not cfg_path.exists():
            print(f"error: config file {cfg_path} does not exist", file=sys.stderr)
            return 2
        fields.update(json.loads(cfg_path.read_text()))
    for name in _TRAIN_OVERRIDES:
        value = getattr(args, name)
        if value is not None:
            fields[name] = value
    if args.nonsaturating:
        fields["nonsaturating"] = True
    try:
        cfg = TrainConfig(**fields)
    except (ConfigError, TypeError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2
    run_id = args.run_id or default_run_id(cfg)
    run_dir = _output_root(args.out) / run_id
    try:
        record = train(cfg, run_dir)
    except TrainingDivergedError as exc:
        print(f"error: training aborted: {exc}", file=sys.stderr)
        return 1
    print(f"run {run_id} finished: {len(record.rows)} metric rows in {record.run_dir}")
    return 0


# --------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    shift = 1e-3 if args.inject_bug else 0.0
    report = run_verification(seed=args.seed, trials=args.trials, fc_exponent_shift=shift)
    text = report_to_json(report)
    Path(args.report).write_text(text)
    print(text)
    failing = [name for name, r in report["identities"].items() if not r["passed"]]
    if failing:
        print(f"FAILED identities: {', '.join(sorted(failing))}", file=sys.stderr)
        return 1
    return 0


# --------------------------------------------------------------------------
# sweep


def _run_one(task) -> dict:
    run_id, cfg_fields, run_dir = task
    summary = {"run_id": run_id, "status": "ok", "error": ""}
    try:
        cfg = TrainConfig(**cfg_fields)
        record = train(cfg, run_dir)
        last = record.rows[-1] if record.rows else None
        summary.update(
            model=cfg.model,
            seed=cfg.seed,
            final_epoch=cfg.epochs,
            final_wasserstein=last.wasserstein if last else float("nan"),
            final_sym_kl=last.sym_kl if last else float("nan"),
            modes_covered=last.modes_covered if last else -1,
            hq_fraction=last.hq_fraction if last else float("nan"),
        )
    except Exception as exc:  # a failed run must not sink the sweep
        summary.update(status="failed", error=str(exc))
    return summary


def _load_manifest(path: Path) -> "tuple[Path, list[tuple[str, dict]]]":
    data = json.loads(path.read_text())
    runs = data.get("runs", [])
    if not runs:
        raise ConfigError("manifest contains no runs")
    seen = set()
    tasks = []
    for entry in runs:
        run_id = entry.get("id")
        if not run_id or run_id in seen:
            raise ConfigError(f"run identifiers must be unique and non-empty, got {run_id!r}")
        seen.add(run_id)
        cfg_fields = entry.get("config", {})
        TrainConfig(**cfg_fields)  # validate eagerly
        tasks.append((run_id, cfg_fields))
    return Path(data.get("output_root", "runs")), tasks


def cmd_sweep(args) -> int:
    try:
        manifest_root, entries = _load_manifest(Path(args.manifest))
    except (ConfigError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: invalid manifest: {exc}", file=sys.stderr)
        return 2
    root = _output_root(args.out) if args.out else _output_root(str(manifest_root))
    tasks = [(run_id, fields, str(root / run_id)) for run_id, fields in entries]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            summaries = list(pool.map(_run_one, tasks))
    else:
        summaries = [_run_one(t) for t in tasks]

    ok = [s for s in summaries if s["status"] == "ok"]
    failed = [s for s in summaries if s["status"] != "ok"]
    ok.sort(key=lambda s: (s["final_wasserstein"], s["final_sym_kl"]))
    root.mkdir(parents=True, exist_ok=True)
    summary_path = root / "summary.csv"
    cols = [
        "run_id", "model", "seed", "status", "final_epoch",
        "final_wasserstein", "final_sym_kl", "modes_covered", "hq_fraction", "error",
    ]
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for s in ok + failed:
            writer.writerow([_csv_cell(s.get(c, "")) for c in cols])
    print(f"sweep finished: {len(ok)} ok, {len(failed)} failed; summary at {summary_path}")
    for s in failed:
        print(f"  failed {s['run_id']}: {s['error']}", file=sys.stderr)
    return 1 if failed else 0


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


# --------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    root = _output_root(args.root)
    out = Path(args.out) if args.out else root / "report"
    runs = {}
    for run_id in args.run_ids:
        run_dir = root / run_id
        if not (run_dir / "metrics.csv").exists():
            print(f"error: run {run_id!r} not found under {root}", file=sys.stderr)
            return 2
        cfg = json.loads((run_dir / "config.json").read_text())
        runs[run_id] = {"dir": run_dir, "model": cfg["model"], "rows": load_metric_rows(run_dir)}

    out.mkdir(parents=True, exist_ok=True)
    epochs = sorted({row.epoch for info in runs.values() for row in info["rows"]})
    for metric, filename in (("sym_kl", "fig1_symkl.csv"), ("wasserstein", "fig1_wasserstein.csv")):
        table = {
            run_id: {row.epoch: getattr(row, metric) for row in info["rows"]}
            for run_id, info in runs.items()
        }
        with open(out / filename, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", *runs.keys()])
            for epoch in epochs:
                cells = [str(epoch)]
                for run_id in runs:
                    v = table[run_id].get(epoch)
                    cells.append("" if v is None else repr(v))  # blank where cadences differ
                writer.writerow(cells)

    used_names = set()
    for run_id, info in runs.items():
        for snap in sorted(info["dir"].glob("samples_epoch_*.csv")):
            epoch = snap.stem.split("_")[-1]
            name = f"fig2_epoch_{epoch}_{info['model']}.csv"
            if name in used_names:  # two runs of one model: disambiguate
                name = f"fig2_epoch_{epoch}_{info['model']}_{run_id}.csv"
            used_names.add(name)
            shutil.copyfile(snap, out / name)
    print(f"report written to {out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "train": cmd_train,
        "verify": cmd_verify,
        "sweep": cmd_sweep,
        "report": cmd_report,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())

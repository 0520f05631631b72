"""Command-line entry point.

Subcommands:
  generate  write a synthetic stream preset to the dataset CSV format
  run       run algorithms over streams (presets or dataset CSVs), write
            per-cell result CSVs plus combined results.csv / summary.csv
  sweep     archive-size sensitivity sweep for dtel on one preset
  report    render a mean +/- std table and rank-sum win/tie/loss lines from
            a results directory

Every command is fully seeded: rerunning with the same spec reproduces the
same result bytes (wall-clock timings are the one exception; disable them
with --no-wall-time for byte-identical reruns).

Exit codes: 0 success, 1 input error, 2 runtime failure.

``run`` accepts a JSON spec file (--spec); any flag given on the command line
overrides the corresponding spec key. Keys and defaults:

  algorithms        ["dtel"]            registered algorithm names
  streams           []                  preset names and/or dataset CSV paths
  seeds             [0]                 one run per (algorithm, stream, seed)
  m                 25                  archive capacity
  epsilon           1e-10               weight denominator guard
  max_depth         null                tree depth cap (null = unbounded)
  min_samples_split 2
  min_impurity_decrease 0.0
  noise_rate        0.1                 training-label noise for presets
  n_steps           120                 steps per generated stream
  protocol          "auto"              auto | synthetic | prequential
  out_dir           "results"
  workers           1                   concurrent (algorithm, stream, seed) cells
  transfer_workers  null                concurrent transfers inside a step
  record_wall_time  true
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .baselines import ALGORITHMS, make_learner
from .cart import StoppingParams
from .datasets import read_stream_csv, write_stream_csv
from .dtel import DtelConfig
from .evaluation import (
    RunResult,
    rank_sum_test,
    read_results_csv,
    run_prequential,
    run_synthetic,
    summarize,
    write_results_csv,
    write_summary_csv,
)
from .streams import PRESETS, ChunkPair, make_stream, preset_config


@dataclass
class RunSpec:
    algorithms: list[str] = field(default_factory=lambda: ["dtel"])
    streams: list[str] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: [0])
    m: int = 25
    epsilon: float = 1e-10
    max_depth: int | None = None
    min_samples_split: int = 2
    min_impurity_decrease: float = 0.0
    noise_rate: float = 0.10
    n_steps: int = 120
    protocol: str = "auto"
    out_dir: str = "results"
    workers: int = 1
    transfer_workers: int | None = None
    record_wall_time: bool = True

    @classmethod
    def from_json(cls, path) -> "RunSpec":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown spec keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    def validate(self) -> None:
        if not self.streams:
            raise ValueError("no streams given")
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise ValueError(
                    f"unknown algorithm {name!r}; registered: {', '.join(sorted(ALGORITHMS))}"
                )
        if not self.seeds:
            raise ValueError("no seeds given")
        if self.protocol not in ("auto", "synthetic", "prequential"):
            raise ValueError("protocol must be auto, synthetic, or prequential")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def learner_config(self) -> DtelConfig:
        return DtelConfig(
            m=self.m,
            epsilon=self.epsilon,
            stopping=StoppingParams(
                max_depth=self.max_depth,
                min_samples_split=self.min_samples_split,
                min_impurity_decrease=self.min_impurity_decrease,
            ),
            transfer_workers=self.transfer_workers,
        )


def _atomic_write(path: Path, write_fn) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _stream_label(name: str) -> str:
    return Path(name).stem if name not in PRESETS else name


def _load_stream(name: str, seed: int, spec: RunSpec):
    """Returns (items, is_paired). Presets regenerate per seed; CSV paths load
    as-is (their seed column is the run seed only)."""
    if name in PRESETS:
        cfg = preset_config(
            name, seed=seed, noise_rate=spec.noise_rate, n_steps=spec.n_steps
        )
        return make_stream(cfg), True
    items = read_stream_csv(name)
    return items, bool(items) and isinstance(items[0], ChunkPair)


def _run_cell(spec: RunSpec, algorithm: str, stream_name: str, seed: int, items, paired) -> RunResult:
    learner = make_learner(algorithm, spec.learner_config())
    label = _stream_label(stream_name)
    protocol = spec.protocol
    if protocol == "auto":
        protocol = "synthetic" if paired else "prequential"
    if protocol == "synthetic":
        if not paired:
            raise ValueError(f"stream {stream_name} has no test chunks for the synthetic protocol")
        return run_synthetic(
            learner, items, stream_id=label, seed=seed, record_wall_time=spec.record_wall_time
        )
    chunks = [p.train for p in items] if paired else items
    return run_prequential(
        learner, chunks, stream_id=label, seed=seed, record_wall_time=spec.record_wall_time
    )


def run_spec(spec: RunSpec) -> list[RunResult]:
    """Execute every (algorithm, stream, seed) cell and write all CSVs."""
    spec.validate()
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    loaded = {}
    for stream_name in spec.streams:
        for seed in spec.seeds:
            key = (stream_name, seed)
            if key not in loaded:
                loaded[key] = _load_stream(stream_name, seed, spec)

    cells = [
        (alg, stream_name, seed)
        for alg in spec.algorithms
        for stream_name in spec.streams
        for seed in spec.seeds
    ]

    def run_one(cell):
        alg, stream_name, seed = cell
        items, paired = loaded[(stream_name, seed)]
        result = _run_cell(spec, alg, stream_name, seed, items, paired)
        cell_path = out_dir / f"{result.run_id}.csv"
        _atomic_write(cell_path, lambda tmp: write_results_csv([result], tmp))
        return result

    if spec.workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(run_one, cells))
    else:
        results = [run_one(c) for c in cells]

    results.sort(key=lambda r: (r.algorithm, r.stream, r.seed))
    _atomic_write(out_dir / "results.csv", lambda tmp: write_results_csv(results, tmp))
    _atomic_write(out_dir / "summary.csv", lambda tmp: write_summary_csv(results, tmp))
    return results


def _cmd_generate(args) -> int:
    cfg = preset_config(
        args.preset,
        seed=args.seed,
        noise_rate=args.noise_rate if args.noise_rate is not None else 0.10,
        n_steps=args.steps,
        **({"chunk_size": args.chunk_size} if args.chunk_size else {}),
    )
    stream = make_stream(cfg)
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    rows = None

    def write(tmp):
        nonlocal rows
        rows = write_stream_csv(stream, tmp)

    _atomic_write(out, write)
    print(f"wrote {rows} rows ({cfg.n_steps} steps x 2 chunks x {cfg.chunk_size}) to {out}")
    return 0


def _apply_overrides(spec: RunSpec, args) -> RunSpec:
    if args.algorithms:
        spec.algorithms = [a for part in args.algorithms for a in part.split(",") if a]
    if args.streams:
        spec.streams = [s for part in args.streams for s in part.split(",") if s]
    if args.seeds:
        spec.seeds = [int(s) for part in args.seeds for s in part.split(",") if s]
    for name in (
        "m",
        "epsilon",
        "max_depth",
        "min_samples_split",
        "min_impurity_decrease",
        "noise_rate",
        "n_steps",
        "protocol",
        "out_dir",
        "workers",
        "transfer_workers",
    ):
        value = getattr(args, name, None)
        if value is not None:
            setattr(spec, name, value)
    if args.no_wall_time:
        spec.record_wall_time = False
    return spec


def _cmd_run(args) -> int:
    spec = RunSpec.from_json(args.spec) if args.spec else RunSpec()
    spec = _apply_overrides(spec, args)
    results = run_spec(spec)
    for res in results:
        s = summarize(res)
        print(f"{res.run_id}: mean={100 * s.mean:.2f}% std={100 * s.std:.2f}%")
    print(f"wrote {len(results)} runs to {spec.out_dir}")
    return 0


def _cmd_sweep(args) -> int:
    m_values = sorted({int(v) for part in args.m_values for v in part.split(",") if v})
    if not m_values:
        raise ValueError("no archive sizes given")
    seeds = [int(s) for part in (args.seeds or ["0"]) for s in part.split(",") if s]
    rows = []
    for m in m_values:
        accs = []
        for seed in seeds:
            cfg = preset_config(args.preset, seed=seed, n_steps=args.steps)
            spec_cfg = DtelConfig(
                m=m, transfer_workers=args.transfer_workers
            )
            learner = make_learner("dtel", spec_cfg)
            result = run_synthetic(
                learner, make_stream(cfg), stream_id=args.preset, seed=seed,
                record_wall_time=False,
            )
            accs.append(float(np.mean(result.per_chunk_accuracy)))
        rows.append((m, float(np.mean(accs))))

    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)

    def write(tmp):
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            fh.write("m,mean_accuracy\n")
            for m, acc in rows:
                fh.write(f"{m},{acc!r}\n")

    _atomic_write(out, write)
    for m, acc in rows:
        print(f"m={m}: mean accuracy {100 * acc:.2f}%")
    print(f"wrote sweep over m={m_values} to {out}")
    print("note: archive sizes above 20 typically sit on the stable plateau")
    return 0


def _cmd_report(args) -> int:
    results_path = Path(args.results) / "results.csv"
    if not results_path.exists():
        results_path = Path(args.results)
    results = read_results_csv(results_path)
    if not results:
        raise ValueError(f"no results found in {args.results}")
    pooled: dict[tuple[str, str], list[float]] = {}
    for res in results:
        pooled.setdefault((res.algorithm, res.stream), []).extend(res.per_chunk_accuracy)
    algorithms = sorted({a for a, _ in pooled})
    reference = args.reference
    if reference in algorithms:
        algorithms = [reference] + [a for a in algorithms if a != reference]
    streams = sorted({s for _, s in pooled})

    width = max(len(a) for a in algorithms) + 18
    print("stream".ljust(12) + "".join(a.ljust(width) for a in algorithms))
    for stream in streams:
        cells = []
        means = {}
        for alg in algorithms:
            accs = pooled.get((alg, stream))
            if accs is None:
                cells.append("-".ljust(width))
                continue
            s = summarize(np.asarray(accs))
            means[alg] = s.mean
            cells.append((alg, f"{100 * s.mean:.2f} +/- {100 * s.std:.2f}"))
        best = max(means, key=means.get) if means else None
        line = stream.ljust(12)
        for cell in cells:
            if isinstance(cell, str):
                line += cell
            else:
                alg, text = cell
                line += (text + (" *" if alg == best else "")).ljust(width)
        print(line)

    if reference in {a for a, _ in pooled}:
        for alg in algorithms:
            if alg == reference:
                continue
            win = tie = loss = 0
            for stream in streams:
                a = pooled.get((reference, stream))
                b = pooled.get((alg, stream))
                if a is None or b is None:
                    continue
                verdict = rank_sum_test(a, b).direction
                if verdict == "a_better":
                    win += 1
                elif verdict == "b_better":
                    loss += 1
                else:
                    tie += 1
            print(f"{reference} vs {alg}: win-tie-loss {win}-{tie}-{loss}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftel", description="concept-drift ensemble benchmark harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a stream preset as a dataset CSV")
    gen.add_argument("--preset", required=True, help=f"one of: {', '.join(sorted(PRESETS))}")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--steps", type=int, default=120)
    gen.add_argument("--chunk-size", type=int, default=None)
    gen.add_argument("--noise-rate", type=float, default=None)
    gen.add_argument("--out", required=True)
    gen.set_defaults(fn=_cmd_generate)

    run = sub.add_parser("run", help="run algorithms over streams")
    run.add_argument("--spec", help="JSON spec file; flags override its keys")
    run.add_argument("--algorithms", action="append", default=None)
    run.add_argument("--streams", action="append", default=None, help="preset names or dataset CSV paths")
    run.add_argument("--seeds", action="append", default=None)
    run.add_argument("--m", type=int, default=None)
    run.add_argument("--epsilon", type=float, default=None)
    run.add_argument("--max-depth", dest="max_depth", type=int, default=None)
    run.add_argument("--min-samples-split", dest="min_samples_split", type=int, default=None)
    run.add_argument("--min-impurity-decrease", dest="min_impurity_decrease", type=float, default=None)
    run.add_argument("--noise-rate", dest="noise_rate", type=float, default=None)
    run.add_argument("--steps", dest="n_steps", type=int, default=None)
    run.add_argument("--protocol", choices=("auto", "synthetic", "prequential"), default=None)
    run.add_argument("--out-dir", dest="out_dir", default=None)
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--transfer-workers", dest="transfer_workers", type=int, default=None)
    run.add_argument("--no-wall-time", action="store_true", help="write zero timings for byte-identical reruns")
    run.set_defaults(fn=_cmd_run)

    sweep = sub.add_parser("sweep", help="archive-size sensitivity sweep for dtel")
    sweep.add_argument("--preset", required=True)
    sweep.add_argument("--m-values", dest="m_values", action="append", required=True)
    sweep.add_argument("--seeds", action="append", default=None)
    sweep.add_argument("--steps", type=int, default=120)
    sweep.add_argument("--transfer-workers", dest="transfer_workers", type=int, default=None)
    sweep.add_argument("--out", required=True)
    sweep.set_defaults(fn=_cmd_sweep)

    rep = sub.add_parser("report", help="summarize a results directory")
    rep.add_argument("--results", required=True, help="results directory or results.csv path")
    rep.add_argument("--reference", default="dtel")
    rep.set_defaults(fn=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

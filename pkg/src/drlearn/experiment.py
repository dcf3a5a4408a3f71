"""Benchmark harness: run method comparisons over seeds, emit CSV traces.

Experiments are described by an INI file with a ``[data]`` section, an
``[experiment]`` section and one ``[method.<label>]`` section per method
(see README for the full key list).  Each (method, seed) run writes
``trace_<label>_s<seed>.csv``; a ``summary.csv`` aggregates final test
misclassification and wall clock with 95% t-intervals over seeds.
"""

from __future__ import annotations

import configparser
import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import stats

from .data import Dataset, SyntheticSpec, make_synthetic, split_train_test
from .erm import CvConfig, kfold_cv
from .io import load_csv, load_libsvm
from .losses import LOGISTIC
from .optim import RUNNERS, OptimizerConfig, RunTrace, StepSchedule, TRACE_COLUMNS
from .rng import RngState

THREADS_ENV_VAR = "DRL_THREADS"

SUMMARY_COLUMNS = ("method", "mean_misclass", "ci95_halfwidth", "mean_wall_s", "mean_cumulative_samples")
PLOT_COLUMNS = ("method", "seed", "iteration", "cumulative_samples", "wall_clock_s", "test_misclassification")


@dataclass
class MethodSpec:
    label: str
    kind: str  # gssg | pssg | fsg | sgd | cv
    optimizer: OptimizerConfig | None = None
    cv: CvConfig | None = None


@dataclass
class ExperimentConfig:
    methods: list
    data_kind: str = "synthetic"
    data_path: str = ""
    label_column: int = -1
    synthetic: SyntheticSpec | None = None
    test_fraction: float = 0.25
    n_seeds: int = 1
    seed: int = 0
    output_dir: str = "runs"

    def __post_init__(self):
        if not self.methods:
            raise ValueError("experiment needs at least one method")
        if self.n_seeds < 1:
            raise ValueError(f"need n_seeds >= 1, got {self.n_seeds}")


def _coerce(value: str, like):
    if isinstance(like, bool):
        return value.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(float(value))
    if isinstance(like, float):
        return float(value)
    return value


def _step_from_section(section) -> StepSchedule | None:
    kind = section.get("step")
    if kind is None:
        return None
    if kind == "diminishing":
        return StepSchedule.diminishing(float(section.get("step_a", 5000.0)), float(section.get("step_b", 5000.0)))
    if kind == "constant":
        return StepSchedule.constant(float(section.get("gamma", 0.1)))
    raise ValueError(f"unknown step schedule {kind!r}")


_STEP_KEYS = {"step", "step_a", "step_b", "gamma", "kind"}


def _method_from_section(label: str, section) -> MethodSpec:
    kind = section.get("kind", label).lower()
    if kind == "cv":
        cfg = CvConfig(step=_step_from_section(section))
        for key, value in section.items():
            if key in _STEP_KEYS:
                continue
            if not hasattr(cfg, key):
                raise ValueError(f"[method.{label}]: unknown cv option {key!r}")
            setattr(cfg, key, _coerce(value, getattr(cfg, key)))
        return MethodSpec(label=label, kind="cv", cv=cfg)
    if kind not in RUNNERS:
        raise ValueError(f"[method.{label}]: unknown method kind {kind!r}")
    cfg = OptimizerConfig(method=kind, step=_step_from_section(section))
    for key, value in section.items():
        if key in _STEP_KEYS:
            continue
        if not hasattr(cfg, key) or key == "method":
            raise ValueError(f"[method.{label}]: unknown option {key!r}")
        setattr(cfg, key, _coerce(value, getattr(cfg, key)))
    return MethodSpec(label=label, kind=kind, optimizer=cfg)


def load_experiment_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(path)
    data = parser["data"] if parser.has_section("data") else {}
    exp = parser["experiment"] if parser.has_section("experiment") else {}
    kind = data.get("kind", "synthetic").lower()
    synthetic = None
    if kind == "synthetic":
        synthetic = SyntheticSpec(
            n=int(data.get("n", 256)),
            d=int(data.get("d", 5)),
            class_sep=float(data.get("class_sep", 2.0)),
            outlier_fraction=float(data.get("outlier_fraction", 0.0)),
            seed=int(data.get("seed", 0)),
        )
    methods = []
    for name in parser.sections():
        if name.startswith("method."):
            methods.append(_method_from_section(name.split(".", 1)[1], parser[name]))
    return ExperimentConfig(
        methods=methods,
        data_kind=kind,
        data_path=data.get("path", ""),
        label_column=int(data.get("label_column", -1)),
        synthetic=synthetic,
        test_fraction=float(data.get("test_fraction", 0.25)),
        n_seeds=int(exp.get("n_seeds", 1)),
        seed=int(exp.get("seed", 0)),
        output_dir=exp.get("output_dir", "runs"),
    )


def load_experiment_dataset(config: ExperimentConfig) -> Dataset:
    if config.data_kind == "synthetic":
        return make_synthetic(config.synthetic)
    if config.data_kind == "libsvm":
        return load_libsvm(config.data_path)
    if config.data_kind == "csv":
        return load_csv(config.data_path, config.label_column)
    raise ValueError(f"unknown data kind {config.data_kind!r}")


@dataclass
class RunResult:
    method: str
    seed: int
    trace_path: str = ""
    final_misclassification: float = math.nan
    wall_clock_s: float = math.nan
    cumulative_samples: int = 0
    error: str = ""


@dataclass
class ExperimentResult:
    output_dir: str
    runs: list = field(default_factory=list)
    summary_path: str = ""

    @property
    def failures(self):
        return [r for r in self.runs if r.error]


def _one_run(method: MethodSpec, seed: int, data: Dataset, config: ExperimentConfig, out: Path) -> RunResult:
    result = RunResult(method=method.label, seed=seed)
    try:
        train, test = split_train_test(data, config.test_fraction, RngState(seed))
        trace_path = out / f"trace_{method.label}_s{seed}.csv"
        if method.kind == "cv":
            cv_cfg = replace(method.cv, seed=seed)
            best_lambda, theta, report = kfold_cv(train, cv_cfg)
            report.write_csv(out / f"cvreport_{method.label}_s{seed}.csv")
            mis = LOGISTIC.misclassification(theta, test)
            trace = RunTrace()
            trace.append(1, report.total_sample_grads, report.total_train_seconds, math.nan, mis)
        else:
            opt_cfg = replace(method.optimizer, seed=seed)
            theta, trace = RUNNERS[method.kind](opt_cfg, train, test)
        trace.write_csv(trace_path)
        final = trace.final
        result.trace_path = str(trace_path)
        result.final_misclassification = final.test_misclassification
        result.wall_clock_s = final.wall_clock_s
        result.cumulative_samples = final.cumulative_samples
    except Exception as exc:  # noqa: BLE001 - per-run failures are recorded, not fatal
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def t_interval_halfwidth(values, confidence: float = 0.95) -> float:
    """Half-width of the t confidence interval for the mean; 0 for n == 1."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n < 2:
        return 0.0
    sd = float(np.std(values, ddof=1))
    if sd == 0.0:
        return 0.0
    quantile = float(stats.t.ppf(0.5 + confidence / 2.0, n - 1))
    return quantile * sd / math.sqrt(n)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    data = load_experiment_dataset(config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [
        (method, config.seed + i)
        for method in config.methods
        for i in range(config.n_seeds)
    ]
    n_threads = int(os.environ.get(THREADS_ENV_VAR, "1"))
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            runs = list(pool.map(lambda job: _one_run(job[0], job[1], data, config, out), jobs))
    else:
        runs = [_one_run(method, seed, data, config, out) for method, seed in jobs]

    result = ExperimentResult(output_dir=str(out), runs=runs)
    summary_path = out / "summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for method in config.methods:
            ok = [r for r in runs if r.method == method.label and not r.error]
            if not ok:
                continue
            mis = [r.final_misclassification for r in ok]
            writer.writerow(
                [
                    method.label,
                    repr(float(np.mean(mis))),
                    repr(t_interval_halfwidth(mis)),
                    repr(float(np.mean([r.wall_clock_s for r in ok]))),
                    repr(float(np.mean([r.cumulative_samples for r in ok]))),
                ]
            )
    result.summary_path = str(summary_path)
    if result.failures:
        failures_path = out / "failures.csv"
        with open(failures_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "seed", "error"])
            for r in result.failures:
                writer.writerow([r.method, r.seed, r.error])
    return result


def _parse_trace_name(path: Path):
    stem = path.stem
    if not stem.startswith("trace_") or "_s" not in stem:
        return None
    body = stem[len("trace_"):]
    label, _, seed = body.rpartition("_s")
    if not label or not seed.isdigit():
        return None
    return label, int(seed)


def emit_plot_data(trace_paths, out_path) -> tuple[int, list]:
    """Merge trace CSVs into one tidy long-format CSV.

    Returns (rows written, list of paths that were missing or unparseable);
    the good traces are still emitted.
    """
    n_rows = 0
    missing = []
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PLOT_COLUMNS)
        for raw in trace_paths:
            path = Path(raw)
            parsed = _parse_trace_name(path)
            if parsed is None or not path.exists():
                missing.append(str(path))
                continue
            label, seed = parsed
            try:
                trace = RunTrace.read_csv(path)
            except (OSError, ValueError):
                missing.append(str(path))
                continue
            for rec in trace.records:
                writer.writerow(
                    [
                        label,
                        seed,
                        rec.iteration,
                        rec.cumulative_samples,
                        repr(rec.wall_clock_s),
                        repr(rec.test_misclassification),
                    ]
                )
                n_rows += 1
    return n_rows, missing

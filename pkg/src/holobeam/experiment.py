"""Seeded Monte-Carlo experiments: SNR sweeps, surface-size sweeps,
convergence traces and per-iteration timing.

Experiment files are JSON documents::

    {
      "system": {"num_users": 3, "num_feeds": 6, "rhs_rows": 5, "rhs_cols": 5},
      "sweep": {"kind": "snr", "snr_db": [0, 10, 20]},
      "num_trials": 50,
      "methods": ["proposed", "random_w"],
      "output_path": "results/snr",
      "master_seed": 2025
    }

Seed derivation (stable across versions): for trial ``t`` the channel seed
is ``SeedSequence([master_seed, t]).generate_state(1, uint64)[0]``; the
optimizer start uses ``[master_seed, t, 1]`` and the random-weight baseline
``[master_seed, t, 2]``.  The grid index is deliberately not mixed in, so
every grid point of a sweep sees the same physical paths for a given trial.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import (
    ConfigError,
    SystemConfig,
    build_geometry,
    build_phase_matrix,
    generate_channels,
)
from .optimizer import OptimizerSettings, run
from .oracles import OracleReport, random_w_baseline
from .updates import SingularSystemError

log = logging.getLogger(__name__)

__all__ = [
    "SWEEP_KINDS",
    "METHODS",
    "RECORD_FIELDS",
    "ExperimentSpec",
    "TrialRecord",
    "ExperimentResult",
    "ExperimentAborted",
    "derive_seed",
    "snr_to_noise_var",
    "rhs_shape",
    "parse_spec",
    "load_spec",
    "run_experiment",
    "write_results",
    "read_records",
    "write_oracle_reports",
]

SWEEP_KINDS = ("snr", "rhs_size", "convergence", "timing")
METHODS = ("proposed", "random_w")
RECORD_FIELDS = (
    "grid_point",
    "grid_value",
    "trial",
    "method",
    "channel_seed",
    "status",
    "sum_rate",
    "iterations",
    "converged",
    "wall_time_ms",
)
MAX_FAILURE_FRACTION = 0.10


class ExperimentAborted(RuntimeError):
    pass


def derive_seed(master_seed: int, *path: int) -> int:
    state = np.random.SeedSequence([int(master_seed), *map(int, path)]).generate_state(
        1, np.uint64
    )
    return int(state[0])


def snr_to_noise_var(snr_db: float, power_budget: float = 1.0) -> float:
    return power_budget * 10.0 ** (-snr_db / 10.0)


def rhs_shape(size) -> tuple[int, int]:
    """``[rows, cols]`` pairs pass through; an integer M becomes the most square grid."""
    if isinstance(size, (list, tuple)):
        if len(size) != 2:
            raise ConfigError("sweep.rhs_sizes", f"expected [rows, cols], got {size!r}")
        return int(size[0]), int(size[1])
    m = int(size)
    if m < 1:
        raise ConfigError("sweep.rhs_sizes", f"surface size must be positive, got {m}")
    rows = max(r for r in range(1, math.isqrt(m) + 1) if m % r == 0)
    return rows, m // rows


@dataclass(frozen=True)
class ExperimentSpec:
    base: SystemConfig
    sweep: str
    grid: tuple  # SNR values (dB) or (rows, cols) pairs
    snr_db: float = 0.0  # fixed SNR for rhs_size / timing sweeps
    num_trials: int = 50
    methods: tuple[str, ...] = METHODS
    output_path: str = "results"
    master_seed: int = 0
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    timing_iterations: int = 5
    timing_repeats: int = 3

    def __post_init__(self):
        if self.sweep not in SWEEP_KINDS:
            raise ConfigError("sweep.kind", f"expected one of {SWEEP_KINDS}, got {self.sweep!r}")
        if len(self.grid) == 0:
            raise ConfigError("sweep", "grid must not be empty")
        if int(self.num_trials) < 1:
            raise ConfigError("num_trials", f"must be >= 1, got {self.num_trials}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigError("methods", f"expected a nonempty subset of {METHODS}, got {self.methods}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError("master_seed", "must fit in an unsigned 64-bit integer")

    def grid_labels(self) -> list[str]:
        if self.sweep in ("snr", "convergence"):
            return [f"snr_db={v:g}" for v in self.grid]
        return [f"M={r * c}" for r, c in self.grid]

    def config_at(self, index: int) -> SystemConfig:
        """Scenario at grid point ``index`` (noise set from the SNR)."""
        base = self.base
        if self.sweep in ("snr", "convergence"):
            snr, rows, cols = self.grid[index], base.rhs_rows, base.rhs_cols
        else:
            snr, (rows, cols) = self.snr_db, self.grid[index]
        noise = (snr_to_noise_var(snr, base.power_budget),) * base.num_users
        try:
            return dataclasses.replace(base, rhs_rows=rows, rhs_cols=cols, noise_vars=noise)
        except ConfigError as exc:
            raise ConfigError(f"sweep[{index}].{exc.field}", str(exc)) from None


@dataclass(frozen=True)
class TrialRecord:
    grid_point: str
    grid_value: float
    trial: int
    method: str
    channel_seed: int
    status: str
    sum_rate: float
    iterations: int
    converged: bool
    wall_time_ms: float

    def row(self) -> list[str]:
        return [
            self.grid_point,
            repr(float(self.grid_value)),
            str(self.trial),
            self.method,
            str(self.channel_seed),
            self.status,
            repr(float(self.sum_rate)),
            str(self.iterations),
            "true" if self.converged else "false",
            repr(float(self.wall_time_ms)),
        ]

    @classmethod
    def from_row(cls, row: dict) -> "TrialRecord":
        return cls(
            grid_point=row["grid_point"],
            grid_value=float(row["grid_value"]),
            trial=int(row["trial"]),
            method=row["method"],
            channel_seed=int(row["channel_seed"]),
            status=row["status"],
            sum_rate=float(row["sum_rate"]),
            iterations=int(row["iterations"]),
            converged=row["converged"] == "true",
            wall_time_ms=float(row["wall_time_ms"]),
        )


@dataclass
class ExperimentResult:
    spec: ExperimentSpec | None
    records: list[TrialRecord] = field(default_factory=list)
    traces: dict = field(default_factory=dict)  # grid label -> list of per-trial rate traces

    def aggregates(self) -> list[dict]:
        groups: dict[tuple, list[TrialRecord]] = {}
        for r in self.records:
            groups.setdefault((r.grid_point, r.grid_value, r.method), []).append(r)
        out = []
        for (label, value, method), recs in groups.items():
            ok = [r for r in recs if r.status == "ok"]
            rates = np.array([r.sum_rate for r in ok])
            se = float(rates.std(ddof=1) / np.sqrt(len(rates))) if len(rates) > 1 else 0.0
            out.append(
                {
                    "grid_point": label,
                    "grid_value": value,
                    "method": method,
                    "n_ok": len(ok),
                    "n_failed": len(recs) - len(ok),
                    "mean_sum_rate": float(rates.mean()) if len(ok) else float("nan"),
                    "stderr_sum_rate": se,
                    "mean_iterations": float(np.mean([r.iterations for r in ok])) if ok else 0.0,
                    "mean_wall_time_ms": float(np.mean([r.wall_time_ms for r in ok])) if ok else 0.0,
                }
            )
        return out


def _system_from_dict(raw: dict) -> SystemConfig:
    known = {f.name for f in dataclasses.fields(SystemConfig)}
    raw = dict(raw)
    spacing_wl = raw.pop("element_spacing_wavelengths", None)
    unknown = set(raw) - known
    if unknown:
        name = sorted(unknown)[0]
        raise ConfigError(f"system.{name}", "unknown field")
    cfg = SystemConfig(**raw)
    if spacing_wl is not None:
        cfg = dataclasses.replace(cfg, element_spacing_m=float(spacing_wl) * cfg.wavelength_m)
    return cfg


def _field(raw, name, default, cast):
    try:
        return cast(raw.get(name, default))
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, str(exc)) from None


def parse_spec(text: str) -> ExperimentSpec:
    """Parse and validate a JSON experiment description."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("<document>", "top level must be an object")
    try:
        base = _system_from_dict(raw.get("system", {}))
    except ConfigError as exc:
        field_name = exc.field if exc.field.startswith("system.") else f"system.{exc.field}"
        raise ConfigError(field_name, str(exc).split(": ", 1)[-1]) from None
    except TypeError as exc:
        raise ConfigError("system", str(exc)) from None

    sweep_raw = raw.get("sweep", {"kind": "snr", "snr_db": [0.0]})
    kind = sweep_raw.get("kind", "snr")
    snr = sweep_raw.get("snr_db", 0.0)
    snr_list = [float(s) for s in (snr if isinstance(snr, list) else [snr])]
    if kind in ("snr", "convergence"):
        grid = tuple(snr_list)
        fixed_snr = snr_list[0] if snr_list else 0.0
    elif kind in ("rhs_size", "timing"):
        default = [256, 512, 1024] if kind == "timing" else [[base.rhs_rows, base.rhs_cols]]
        grid = tuple(rhs_shape(s) for s in sweep_raw.get("rhs_sizes", default))
        fixed_snr = snr_list[0] if snr_list else 0.0
    else:
        raise ConfigError("sweep.kind", f"expected one of {SWEEP_KINDS}, got {kind!r}")

    opt_raw = raw.get("optimizer", {})
    try:
        settings = OptimizerSettings(**opt_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError("optimizer", str(exc)) from None

    spec = ExperimentSpec(
        base=base,
        sweep=kind,
        grid=grid,
        snr_db=fixed_snr,
        num_trials=_field(raw, "num_trials", 50, int),
        methods=tuple(raw.get("methods", list(METHODS))),
        output_path=str(raw.get("output_path", "results")),
        master_seed=_field(raw, "master_seed", 0, int),
        optimizer=settings,
        timing_iterations=_field(sweep_raw, "iterations", 5, int),
        timing_repeats=_field(sweep_raw, "repeats", 3, int),
    )
    for i in range(len(spec.grid)):
        spec.config_at(i)  # surfaces per-grid-point invariant violations now
    return spec


def load_spec(path) -> ExperimentSpec:
    return parse_spec(Path(path).read_text(encoding="utf-8"))


def _trial(spec: ExperimentSpec, index: int, trial: int):
    """All method records (and the proposed trace) for one grid point and trial."""
    cfg = spec.config_at(index)
    label, value = spec.grid_labels()[index], _grid_value(spec, index)
    channel_seed = derive_seed(spec.master_seed, trial)
    geom = build_geometry(cfg)
    phi = build_phase_matrix(geom, cfg.k_surface_mag)
    channels = generate_channels(cfg, geom, seed=channel_seed)
    records, trace = [], None
    for method in spec.methods:
        start = time.perf_counter()
        try:
            if method == "proposed":
                settings = dataclasses.replace(
                    spec.optimizer, seed=derive_seed(spec.master_seed, trial, 1)
                )
                _, tr = run(cfg, channels, phi, settings)
                rate, iters, conv = tr.final_sum_rate, tr.iterations_run, tr.converged
                trace = [float(x) for x in tr.sum_rates]
            else:
                _, rate = random_w_baseline(
                    cfg, channels, phi, derive_seed(spec.master_seed, trial, 2), spec.optimizer
                )
                iters, conv = 0, True
            if not (math.isfinite(rate) and rate >= 0):
                raise FloatingPointError(f"non-finite sum rate {rate}")
            status = "ok"
        except (SingularSystemError, FloatingPointError, ValueError) as exc:
            log.warning("trial %d at %s (%s) failed: %s", trial, label, method, exc)
            rate, iters, conv, status = float("nan"), 0, False, "failed"
        elapsed = (time.perf_counter() - start) * 1e3
        records.append(
            TrialRecord(label, value, trial, method, channel_seed, status, rate, iters, conv, elapsed)
        )
    return records, trace


def _grid_value(spec, index):
    if spec.sweep in ("snr", "convergence"):
        return float(spec.grid[index])
    r, c = spec.grid[index]
    return float(r * c)


def _timing_point(spec: ExperimentSpec, index: int, trial: int) -> TrialRecord:
    cfg = spec.config_at(index)
    channel_seed = derive_seed(spec.master_seed, trial)
    geom = build_geometry(cfg)
    phi = build_phase_matrix(geom, cfg.k_surface_mag)
    channels = generate_channels(cfg, geom, seed=channel_seed)
    iters = max(1, int(spec.timing_iterations))
    settings = dataclasses.replace(
        spec.optimizer, tol=1e-300, max_iters=iters, seed=derive_seed(spec.master_seed, trial, 1)
    )
    samples = []
    for _ in range(max(1, int(spec.timing_repeats))):
        start = time.perf_counter()
        _, tr = run(cfg, channels, phi, settings)
        samples.append((time.perf_counter() - start) * 1e3 / tr.iterations_run)
    return TrialRecord(
        spec.grid_labels()[index], _grid_value(spec, index), trial, "proposed", channel_seed,
        "ok", tr.final_sum_rate, tr.iterations_run, tr.converged, float(np.median(samples)),
    )


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Run every (grid point, trial) pair; records are sorted by their keys."""
    jobs = [(i, t) for i in range(len(spec.grid)) for t in range(int(spec.num_trials))]
    result = ExperimentResult(spec=spec)
    if spec.sweep == "timing":
        result.records = [_timing_point(spec, i, t) for i, t in jobs]
        return result

    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_trial, [spec] * len(jobs), *zip(*jobs)))
    else:
        outputs = [_trial(spec, i, t) for i, t in jobs]

    labels = spec.grid_labels()
    failures = 0
    for (i, t), (records, trace) in zip(jobs, outputs):
        result.records.extend(records)
        failures += sum(r.status != "ok" for r in records)
        if trace is not None:
            result.traces.setdefault(labels[i], []).append(trace)
    total = len(result.records)
    if total and failures / total > MAX_FAILURE_FRACTION:
        raise ExperimentAborted(f"{failures} of {total} trials failed")
    return result


def _write_table(path: Path, header, rows):
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=",", lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_results(result: ExperimentResult, path, *, plot: bool = False) -> dict[str, Path]:
    """Write ``records.csv``, ``summary.json`` and optionally ``plot.svg`` into ``path``."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        table = out / "records.csv"
        _write_table(table, RECORD_FIELDS, (r.row() for r in result.records))
        summary = {
            "sweep": result.spec.sweep if result.spec else None,
            "master_seed": result.spec.master_seed if result.spec else None,
            "num_trials": result.spec.num_trials if result.spec else None,
            "aggregates": result.aggregates(),
        }
        if result.traces:
            summary["mean_traces"] = {
                label: _mean_trace(traces) for label, traces in result.traces.items()
            }
            summary["traces"] = result.traces
        summary_path = out / "summary.json"
        summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
        written = {"table": table, "summary": summary_path}
        if plot:
            written["plot"] = _plot(result, out / "plot.svg")
    except OSError as exc:
        raise OSError(f"could not write results to {out}: {exc}") from exc
    return written


def _mean_trace(traces):
    """Average of per-trial traces, each padded with its final value."""
    n = max(len(t) for t in traces)
    padded = np.array([t + [t[-1]] * (n - len(t)) for t in traces if t])
    return [float(x) for x in padded.mean(axis=0)]


def _plot(result: ExperimentResult, path: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    if result.traces:
        for label, traces in result.traces.items():
            mean = _mean_trace(traces)
            ax.plot(np.arange(1, len(mean) + 1), mean, marker="o", ms=3, label=label)
        ax.set_xlabel("iteration")
    else:
        rows = result.aggregates()
        for method in sorted({r["method"] for r in rows}):
            pts = sorted((r["grid_value"], r["mean_sum_rate"], r["stderr_sum_rate"])
                         for r in rows if r["method"] == method)
            x, y, e = map(np.array, zip(*pts))
            ax.errorbar(x, y, yerr=e, marker="o", ms=3, capsize=2, label=method)
        ax.set_xlabel(result.spec.sweep if result.spec else "grid")
    ax.set_ylabel("sum rate [bit/s/Hz]")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def read_records(path) -> list[TrialRecord]:
    path = Path(path)
    if path.is_dir():
        path = path / "records.csv"
    with path.open(encoding="utf-8", newline="") as fh:
        return [TrialRecord.from_row(row) for row in csv.DictReader(fh)]


def write_oracle_reports(reports: dict[str, OracleReport], path) -> Path:
    """Oracle discrepancies as a table in the same dialect as ``records.csv``."""
    path = Path(path)
    rows = [
        [name, repr(float(r.max_abs_discrepancy)), r.location, str(r.samples_checked)]
        for name, r in reports.items()
    ]
    try:
        _write_table(path, ("check", "max_abs_discrepancy", "location", "samples_checked"), rows)
    except OSError as exc:
        raise OSError(f"could not write oracle report to {path}: {exc}") from exc
    return path

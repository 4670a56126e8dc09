"""Monte Carlo batches of matched pairs, aggregation and CSV/JSON output."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import MatchedResult, SimConfig, run_matched_pair
from .measures import MEASURE_FIELDS, measure_labels
from .seeding import child_seed

log = logging.getLogger(__name__)

CONDITIONS = ("inter", "indep")


class BatchError(RuntimeError):
    pass


@dataclass
class AggregateResult:
    """Per-step means of every measure across replications, per condition.

    ``mean[cond]`` and ``defined[cond]`` have shape ``(n_steps + 1, 8)`` with
    columns in ``MEASURE_FIELDS`` order; means skip undefined values and
    ``defined`` counts the values that went into each mean.
    """

    config: SimConfig
    n_sims: int
    mean: dict[str, np.ndarray]
    defined: dict[str, np.ndarray]
    runs: list[MatchedResult] | None = field(default=None, repr=False, compare=False)

    @property
    def n_steps(self) -> int:
        return self.mean["inter"].shape[0] - 1

    def columns(self) -> list[str]:
        labels = measure_labels(*self.config.percentiles)
        cols = ["step"]
        cols += [f"{labels[f]} ({c})" for f in MEASURE_FIELDS for c in CONDITIONS]
        cols += [f"{labels[f]} ({c}) n" for f in MEASURE_FIELDS for c in CONDITIONS]
        return cols

    def rows(self) -> list[list]:
        out = []
        for t in range(self.n_steps + 1):
            row: list = [t]
            row += [_clean(self.mean[c][t, k]) for k in range(len(MEASURE_FIELDS)) for c in CONDITIONS]
            row += [int(self.defined[c][t, k]) for k in range(len(MEASURE_FIELDS)) for c in CONDITIONS]
            out.append(row)
        return out


def _clean(x: float) -> float | None:
    return None if math.isnan(x) else float(x)


def _records_array(records) -> np.ndarray:
    return np.array([r.as_tuple() for r in records], dtype=np.float64)


def aggregate(results: list[MatchedResult], config: SimConfig, keep_runs: bool = False) -> AggregateResult:
    """Mean over replications, in replication order, ignoring undefined values."""
    if not results:
        raise ValueError("nothing to aggregate")
    mean, defined = {}, {}
    for cond in CONDITIONS:
        stack = np.stack([_records_array(getattr(r, cond)) for r in results])
        ok = ~np.isnan(stack)
        n = ok.sum(axis=0)
        total = np.where(ok, stack, 0.0).sum(axis=0)
        mean[cond] = np.divide(total, n, out=np.full(total.shape, np.nan), where=n > 0)
        defined[cond] = n
    return AggregateResult(config, len(results), mean, defined, results if keep_runs else None)


def _run_one(args: tuple[SimConfig, int, int]) -> MatchedResult:
    config, index, seed = args
    try:
        return run_matched_pair(config, seed)
    except Exception as exc:
        raise BatchError(f"replication {index} (seed {seed}) failed: {exc!r}") from exc


def run_replications(config: SimConfig, n_sims: int, n_workers: int = 1) -> list[MatchedResult]:
    if n_sims < 1:
        raise ValueError("n_sims must be at least 1")
    jobs = [(config, i, child_seed(config.seed, i)) for i in range(n_sims)]
    if n_workers <= 1:
        return [_run_one(j) for j in jobs]
    chunk = max(1, n_sims // (4 * n_workers))
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        # map preserves submission order, so aggregation never sees completion order
        return list(pool.map(_run_one, jobs, chunksize=chunk))


def run_batch(config: SimConfig, n_sims: int, n_workers: int = 1, dump_dir: str | Path | None = None,
              keep_runs: bool = False) -> AggregateResult:
    results = run_replications(config, n_sims, n_workers)
    if dump_dir is not None:
        dump_runs(results, dump_dir)
    return aggregate(results, config, keep_runs)


def run_table(result: MatchedResult) -> tuple[list[str], list[list]]:
    """One run as a merged table: step, then each measure for both conditions."""
    labels = measure_labels(*result.config.percentiles)
    cols = ["step"] + [f"{labels[f]} ({c})" for f in MEASURE_FIELDS for c in CONDITIONS]
    inter, indep = _records_array(result.inter), _records_array(result.indep)
    rows = []
    for t in range(inter.shape[0]):
        row: list = [t]
        for k in range(len(MEASURE_FIELDS)):
            row += [_clean(inter[t, k]), _clean(indep[t, k])]
        rows.append(row)
    return cols, rows


def dump_runs(results: list[MatchedResult], directory: str | Path) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for i, r in enumerate(results):
        cols, rows = run_table(r)
        _write_text(d / f"run_{i:05d}.csv", _csv_text(cols, rows))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.17g}"


def _csv_text(cols: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _config_dict(config: SimConfig) -> dict:
    d = asdict(config)
    d["percentiles"] = list(config.percentiles)
    return d


def to_json(result: AggregateResult) -> str:
    doc = {
        "config": _config_dict(result.config),
        "n_sims": result.n_sims,
        "columns": result.columns(),
        "rows": result.rows(),
    }
    return json.dumps(doc, indent=1) + "\n"


def to_csv(result: AggregateResult) -> str:
    return _csv_text(result.columns(), result.rows())


def _write_text(path: Path, text: str) -> None:
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit(result: AggregateResult, fmt: str, path: str | Path | None) -> str:
    """Serialise to ``fmt`` ('csv' or 'json'); write to ``path`` unless it is None or '-'."""
    if fmt == "csv":
        text = to_csv(result)
    elif fmt == "json":
        text = to_json(result)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None and str(path) != "-":
        _write_text(Path(path), text)
    return text


def from_json(text: str) -> AggregateResult:
    doc = json.loads(text)
    cfg = dict(doc["config"])
    cfg["percentiles"] = tuple(cfg["percentiles"])
    config = SimConfig(**cfg)
    rows = doc["rows"]
    k = len(MEASURE_FIELDS)
    n_cond = len(CONDITIONS)
    means = np.array([[math.nan if v is None else v for v in row[1:1 + k * n_cond]] for row in rows], dtype=np.float64)
    counts = np.array([row[1 + k * n_cond:] for row in rows], dtype=np.int64)
    mean = {c: means[:, i::n_cond] for i, c in enumerate(CONDITIONS)}
    defined = {c: counts[:, i::n_cond] for i, c in enumerate(CONDITIONS)}
    return AggregateResult(config, doc["n_sims"], mean, defined)


def load_json(path: str | Path) -> AggregateResult:
    return from_json(Path(path).read_text(encoding="utf-8"))

"""Monte-Carlo sweep harness: paired-seed scenario batteries over one swept
generation parameter, per-algorithm result rows, CSV/SVG emission.

Row seeds derive from (seed_base, value index, replication) through
SeedSequence, so extending a sweep with more values or replications never
changes the scenarios of existing rows, and every algorithm at a given
(value, replication) sees the identical scenario.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import exact, heuristics
from .generate import generate
from .model import GenerationParams, Scenario

SWEEPABLE = ("num_tasks", "qos_factor", "beta")
ALGORITHMS = ("exact", "exact_qos_less", "local", "global")

#: Row status for heuristic rows (heuristics always produce an assignment).
STATUS_OK = "ok"

CSV_HEADER = ("swept_param,swept_value,replication,seed,algorithm,status,"
              "objective_total,placement_cost,scheduling_cost,drop_fraction,runtime_ms")


@dataclass(frozen=True)
class SweepSpec:
    swept: str
    values: tuple[float, ...]
    base: GenerationParams
    algorithms: tuple[str, ...] = ("exact", "local", "global")
    replications: int = 20
    seed_base: int = 0
    node_limit: Optional[int] = None    # exact-solver budget per row
    time_limit: Optional[float] = None

    def __post_init__(self):
        if self.swept not in SWEEPABLE:
            raise ValueError(f"swept must be one of {SWEEPABLE}, got {self.swept!r}")
        if not self.values:
            raise ValueError("values must be nonempty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("values must be strictly increasing")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}")


@dataclass(frozen=True)
class SweepRow:
    swept_param: str
    swept_value: float
    replication: int
    seed: int
    algorithm: str
    status: str
    objective_total: Optional[float]
    placement_cost: Optional[float]
    scheduling_cost: Optional[float]
    drop_fraction: Optional[float]
    runtime_ms: float


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[SweepRow, ...]


def row_seed(seed_base: int, value_index: int, replication: int) -> int:
    """Deterministic 64-bit scenario seed for one sweep cell."""
    ss = np.random.SeedSequence((seed_base, value_index, replication))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def scenario_for(spec: SweepSpec, value_index: int, replication: int) -> Scenario:
    value = spec.values[value_index]
    if spec.swept == "num_tasks":
        params = dataclasses.replace(spec.base, num_tasks=int(value))
    else:
        params = dataclasses.replace(spec.base, **{spec.swept: float(value)})
    return generate(params, row_seed(spec.seed_base, value_index, replication))


def run_algorithm(scenario: Scenario, algorithm: str,
                  node_limit: Optional[int] = None,
                  time_limit: Optional[float] = None):
    """One (scenario, algorithm) cell: returns (status, report or None, runtime seconds)."""
    start = time.perf_counter()
    if algorithm in ("exact", "exact_qos_less"):
        mode = exact.QOS_AWARE if algorithm == "exact" else exact.QOS_LESS
        outcome = exact.solve(scenario, exact.SolveOptions(
            mode=mode, node_limit=node_limit, time_limit=time_limit))
        return outcome.status, outcome.report, time.perf_counter() - start
    if algorithm == "local":
        assignment = heuristics.local_serving(scenario)
    elif algorithm == "global":
        assignment = heuristics.global_serving(scenario)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    from .model import evaluate_objective
    report = evaluate_objective(scenario, assignment)
    return STATUS_OK, report, time.perf_counter() - start


def _run_cell(args) -> list[SweepRow]:
    spec, value_index, replication = args
    scenario = scenario_for(spec, value_index, replication)
    seed = scenario.seed
    value = spec.values[value_index]
    rows = []
    for algorithm in spec.algorithms:
        status, report, seconds = run_algorithm(
            scenario, algorithm, spec.node_limit, spec.time_limit)
        rows.append(SweepRow(
            swept_param=spec.swept, swept_value=value, replication=replication,
            seed=seed, algorithm=algorithm, status=status,
            objective_total=report.total if report else None,
            placement_cost=report.placement_cost if report else None,
            scheduling_cost=report.scheduling_cost if report else None,
            drop_fraction=report.drop_fraction if report else None,
            runtime_ms=seconds * 1000.0))
    return rows


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run every (value, replication, algorithm) cell. Scenario generation for a
    given (value, replication) is shared across algorithms, so comparisons are
    paired. Rows come back ordered by value, then replication, then the spec's
    algorithm order, regardless of worker scheduling."""
    cells = [(spec, vi, r)
             for vi in range(len(spec.values))
             for r in range(spec.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            nested = list(pool.map(_run_cell, cells))
    else:
        nested = [_run_cell(cell) for cell in cells]
    rows = tuple(row for group in nested for row in group)
    return SweepResult(spec=spec, rows=rows)


@dataclass(frozen=True)
class SummaryRow:
    swept_value: float
    algorithm: str
    samples: int
    mean_objective: Optional[float]
    mean_drop_fraction: Optional[float]
    mean_runtime_ms: Optional[float]
    excluded: int


def summarize(result: SweepResult) -> list[SummaryRow]:
    """Arithmetic means over replications per (value, algorithm). Rows whose
    solver failed or hit a limit are excluded from the means and counted."""
    groups: dict[tuple[float, str], list[SweepRow]] = {}
    for row in result.rows:
        groups.setdefault((row.swept_value, row.algorithm), []).append(row)
    ordered = sorted(groups, key=lambda k: (k[0], _algorithm_rank(result.spec, k[1])))
    out = []
    for key in ordered:
        rows = groups[key]
        good = [r for r in rows if r.status in (STATUS_OK, exact.OPTIMAL)]
        n = len(good)
        out.append(SummaryRow(
            swept_value=key[0], algorithm=key[1], samples=n,
            mean_objective=sum(r.objective_total for r in good) / n if n else None,
            mean_drop_fraction=sum(r.drop_fraction for r in good) / n if n else None,
            mean_runtime_ms=sum(r.runtime_ms for r in good) / n if n else None,
            excluded=len(rows) - n))
    return out


def _algorithm_rank(spec: SweepSpec, algorithm: str) -> int:
    try:
        return spec.algorithms.index(algorithm)
    except ValueError:
        return len(spec.algorithms)


def _fmt_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return repr(value) if isinstance(value, float) else str(value)


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for r in rows:
        writer.writerow([
            r.swept_param, _fmt_value(r.swept_value), r.replication, r.seed,
            r.algorithm, r.status, _fmt_value(r.objective_total),
            _fmt_value(r.placement_cost), _fmt_value(r.scheduling_cost),
            _fmt_value(r.drop_fraction), f"{r.runtime_ms:.3f}",
        ])
    return buf.getvalue()


def write_csv(result: SweepResult, path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(result.rows))


def _parse_opt_float(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def rows_from_csv(text: str) -> list[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_HEADER.split(","):
        raise ValueError(f"unexpected CSV header: {header}")
    rows = []
    for rec in reader:
        rows.append(SweepRow(
            swept_param=rec[0], swept_value=float(rec[1]), replication=int(rec[2]),
            seed=int(rec[3]), algorithm=rec[4], status=rec[5],
            objective_total=_parse_opt_float(rec[6]),
            placement_cost=_parse_opt_float(rec[7]),
            scheduling_cost=_parse_opt_float(rec[8]),
            drop_fraction=_parse_opt_float(rec[9]),
            runtime_ms=float(rec[10])))
    return rows


def render_svg(summary: Sequence[SummaryRow], metric: str = "objective",
               swept_param: str = "") -> str:
    """Minimal line chart: one polyline per algorithm over the swept values.

    metric is "objective" or "drop"; points with no mean (all rows excluded)
    are skipped.
    """
    if metric not in ("objective", "drop"):
        raise ValueError("metric must be 'objective' or 'drop'")
    pick = (lambda s: s.mean_objective) if metric == "objective" else (lambda s: s.mean_drop_fraction)
    series: dict[str, list[tuple[float, float]]] = {}
    for s in summary:
        y = pick(s)
        if y is None:
            continue
        series.setdefault(s.algorithm, []).append((s.swept_value, y))

    width, height, margin = 640, 400, 60
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x_lo, x_hi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y_lo, y_hi = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(x):
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def py(y):
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    y_label = "mean objective" if metric == "objective" else "mean drop fraction"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - margin / 4:.1f}" text-anchor="middle" '
        f'font-size="14">{swept_param}</text>',
        f'<text x="{margin / 3:.1f}" y="{height / 2:.1f}" text-anchor="middle" '
        f'font-size="14" transform="rotate(-90 {margin / 3:.1f} {height / 2:.1f})">'
        f'{y_label}</text>',
        f'<text x="{margin}" y="{height - margin + 16:.1f}" font-size="11">{_fmt_value(x_lo)}</text>',
        f'<text x="{width - margin}" y="{height - margin + 16:.1f}" text-anchor="end" '
        f'font-size="11">{_fmt_value(x_hi)}</text>',
        f'<text x="{margin - 4}" y="{height - margin:.1f}" text-anchor="end" '
        f'font-size="11">{y_lo:.4g}</text>',
        f'<text x="{margin - 4}" y="{margin + 4:.1f}" text-anchor="end" '
        f'font-size="11">{y_hi:.4g}</text>',
    ]
    for k, (name, pts) in enumerate(sorted(series.items())):
        color = palette[k % len(palette)]
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in sorted(pts))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" '
                     f'points="{points}"/>')
        parts.append(f'<text x="{width - margin + 6}" y="{margin + 16 * k + 4:.1f}" '
                     f'font-size="12" fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(summary: Sequence[SummaryRow], path: str | Path,
              metric: str = "objective", swept_param: str = "") -> None:
    Path(path).write_text(render_svg(summary, metric, swept_param))


def spec_to_document(spec: SweepSpec) -> dict:
    from .serialize import params_to_document

    return {
        "swept": spec.swept,
        "values": list(spec.values),
        "base": params_to_document(spec.base),
        "algorithms": list(spec.algorithms),
        "replications": spec.replications,
        "seed_base": spec.seed_base,
        "node_limit": spec.node_limit,
        "time_limit": spec.time_limit,
    }


def spec_from_document(doc) -> SweepSpec:
    from .serialize import ParseError, params_from_document

    known = {"swept", "values", "base", "algorithms", "replications",
             "seed_base", "node_limit", "time_limit"}
    for key in doc:
        if key not in known:
            raise ParseError(f"sweep spec: unknown key {key!r}")
    if "swept" not in doc or "values" not in doc:
        missing = "swept" if "swept" not in doc else "values"
        raise ParseError(f"sweep spec: missing key {missing!r}")
    base = params_from_document(doc.get("base", {}))
    kwargs = dict(
        swept=doc["swept"],
        values=tuple(float(v) for v in doc["values"]),
        base=base,
    )
    if "algorithms" in doc:
        kwargs["algorithms"] = tuple(doc["algorithms"])
    for key in ("replications", "seed_base", "node_limit", "time_limit"):
        if key in doc and doc[key] is not None:
            kwargs[key] = doc[key]
    try:
        return SweepSpec(**kwargs)
    except ValueError as exc:
        raise ParseError(f"sweep spec: {exc}") from exc

"""Experiment harness: fixation-estimate dispatch, grids, and emitters.

A grid is a list of superstar cells (k, leaves, reservoir, r, runs).  Each
cell gets its own master seed derived from the grid seed and the cell
index, so a cell's row depends only on its parameters, its position, and
the grid seed -- never on execution order.  Results serialize to a fixed
CSV schema and to per-k plot-data series for log-log extinction plots.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .engine import FixationEstimate, estimate_fixation_graph
from .fastlumped import estimate_fixation_fast
from .graphs import DirectedGraph, SuperstarSpec, build_superstar
from .lumped import estimate_fixation_lumped

ENGINES = ("naive", "event", "lumped", "leafskip")

CSV_HEADER = ("k,r,leaves,reservoir,runs,fixations,p_hat,ci_lo,ci_hi,"
              "extinction_hat,ref_r_pow_minus_k,engine,seed,wall_s")

GRID_HEADER = "k,leaves,reservoir,r,runs"


def estimate_fixation(target: Union[DirectedGraph, SuperstarSpec], r: float,
                      runs: int, master_seed: int, engine: str = "naive",
                      confidence: float = 0.995) -> FixationEstimate:
    """Estimate the fixation probability of a uniformly placed mutant.

    Graph targets accept the naive and event-driven engines.  Superstar
    specs additionally accept the lumped engines; k = 2 superstars have no
    chain to lump, so they run event-driven on the built graph.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; pick one of {ENGINES}")
    if isinstance(target, SuperstarSpec):
        if engine in ("lumped", "leafskip"):
            if target.k == 2:
                return estimate_fixation_graph(
                    build_superstar(target), r, runs, master_seed,
                    engine="event", confidence=confidence)
            if engine == "lumped":
                return estimate_fixation_lumped(
                    target, r, runs, master_seed, confidence=confidence)
            return estimate_fixation_fast(
                target, r, runs, master_seed, confidence=confidence)
        return estimate_fixation_graph(build_superstar(target), r, runs,
                                       master_seed, engine=engine,
                                       confidence=confidence)
    if engine in ("lumped", "leafskip"):
        raise ValueError(f"engine {engine!r} needs a SuperstarSpec target")
    return estimate_fixation_graph(target, r, runs, master_seed,
                                   engine=engine, confidence=confidence)


@dataclass(frozen=True)
class GridCell:
    """One experiment cell: a superstar and a sampling budget."""
    k: int
    leaves: int
    reservoir: int
    r: float
    runs: int

    def spec(self) -> SuperstarSpec:
        return SuperstarSpec(k=self.k, leaves=self.leaves,
                             reservoir=self.reservoir)


@dataclass(frozen=True)
class ExperimentGrid:
    cells: tuple
    engine: str = "leafskip"
    master_seed: int = 0
    confidence: float = 0.995

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        for cell in self.cells:
            cell.spec()  # raises on invalid parameters
            if cell.runs < 1:
                raise ValueError(f"cell {cell} needs at least one run")


@dataclass
class ResultRow:
    """Outcome of one grid cell; `error` is set when the cell failed."""
    cell: GridCell
    engine: str
    seed: int
    fixations: int = 0
    trials: int = 0
    p_hat: float = float("nan")
    ci_lo: float = float("nan")
    ci_hi: float = float("nan")
    wall_s: float = 0.0
    error: Optional[str] = None

    @property
    def extinction_hat(self) -> float:
        return 1.0 - self.p_hat

    @property
    def extinction_ci(self) -> tuple:
        """Extinction CI is the fixation CI reflected about 1."""
        return (1.0 - self.ci_hi, 1.0 - self.ci_lo)

    @property
    def reference(self) -> float:
        """The classical large-population benchmark r^(-k)."""
        return float(self.cell.r) ** (-self.cell.k)


def cell_seed(master_seed: int, index: int) -> int:
    """Per-cell master seed derived from the grid seed and cell index."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _run_cell(cell: GridCell, engine: str, seed: int,
              confidence: float) -> ResultRow:
    row = ResultRow(cell=cell, engine=engine, seed=seed)
    start = time.perf_counter()
    try:
        est = estimate_fixation(cell.spec(), cell.r, cell.runs, seed,
                                engine=engine, confidence=confidence)
    except Exception as exc:  # mark the cell, keep the grid going
        row.error = f"{type(exc).__name__}: {exc}"
    else:
        row.fixations = est.fixations
        row.trials = est.trials
        row.p_hat = est.p_hat
        row.ci_lo = est.ci.lo
        row.ci_hi = est.ci.hi
        row.engine = est.engine
    row.wall_s = time.perf_counter() - start
    return row


def run_grid(grid: ExperimentGrid, threads: int = 1) -> list:
    """Run every cell; rows come back in grid order regardless of
    scheduling.  Cell failures are recorded on the row, not raised."""
    if threads < 1:
        raise ValueError("threads must be positive")
    jobs = [(i, cell, cell_seed(grid.master_seed, i))
            for i, cell in enumerate(grid.cells)]
    rows: list = [None] * len(jobs)
    if threads == 1:
        for i, cell, seed in jobs:
            rows[i] = _run_cell(cell, grid.engine, seed, grid.confidence)
        return rows
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {pool.submit(_run_cell, cell, grid.engine, seed,
                               grid.confidence): i
                   for i, cell, seed in jobs}
        for fut, i in futures.items():
            rows[i] = fut.result()
    return rows


def _fmt(x: float) -> str:
    return repr(float(x))


def row_to_csv(row: ResultRow) -> str:
    cell = row.cell
    if row.error is not None:
        numeric = [""] * 6
    else:
        numeric = [str(row.fixations), _fmt(row.p_hat), _fmt(row.ci_lo),
                   _fmt(row.ci_hi), _fmt(row.extinction_hat),
                   _fmt(row.reference)]
    fields = [str(cell.k), _fmt(cell.r), str(cell.leaves),
              str(cell.reservoir), str(cell.runs)] + numeric + \
             [row.engine, str(row.seed), f"{row.wall_s:.3f}"]
    return ",".join(fields)


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for row in rows:
        out.write(row_to_csv(row) + "\n")
    return out.getvalue()


def emit_table(rows: Sequence[ResultRow]) -> str:
    """Render the k-by-r grid; each cell shows the estimate with its CI
    beneath, failed cells show the error class."""
    ks = sorted({row.cell.k for row in rows})
    rs = sorted({row.cell.r for row in rows})
    by_key = {(row.cell.k, row.cell.r): row for row in rows}
    width = 18
    lines = ["".join(["k \\ r".ljust(8)] + [f"r={r:g}".ljust(width)
                                            for r in rs])]
    for k in ks:
        top, bottom = [f"k={k}".ljust(8)], ["".ljust(8)]
        for r in rs:
            row = by_key.get((k, r))
            if row is None:
                top.append("-".ljust(width))
                bottom.append("".ljust(width))
            elif row.error is not None:
                top.append("failed".ljust(width))
                bottom.append(row.error.split(":")[0].ljust(width))
            else:
                top.append(f"{row.p_hat:.3f}".ljust(width))
                ci = f"[{row.ci_lo:.3f}, {row.ci_hi:.3f}]"
                bottom.append(ci.ljust(width))
        lines.append("".join(top))
        lines.append("".join(bottom))
    return "\n".join(lines) + "\n"


def emit_plot_data(rows: Sequence[ResultRow]) -> dict:
    """Per-k CSV series of extinction estimates against the r^(-k)
    reference, ordered by r, suitable for log-log plotting."""
    series: dict = {}
    for k in sorted({row.cell.k for row in rows}):
        out = io.StringIO()
        out.write("r,extinction_hat,ci_lo_ext,ci_hi_ext,ref_r_pow_minus_k\n")
        krows = sorted((row for row in rows
                        if row.cell.k == k and row.error is None),
                       key=lambda row: row.cell.r)
        for row in krows:
            lo, hi = row.extinction_ci
            out.write(",".join([_fmt(row.cell.r), _fmt(row.extinction_hat),
                                _fmt(lo), _fmt(hi),
                                _fmt(row.reference)]) + "\n")
        series[k] = out.getvalue()
    return series


def parse_grid_file(text: str) -> list:
    """Parse a grid description: a header line `k,leaves,reservoir,r,runs`
    followed by one cell per line."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0].replace(" ", "") != GRID_HEADER:
        raise ValueError(f"grid file must start with header {GRID_HEADER!r}")
    cells = []
    for ln in lines[1:]:
        if ln.replace(" ", "") == GRID_HEADER:
            raise ValueError("duplicate header line in grid file")
        parts = [p.strip() for p in ln.split(",")]
        if len(parts) != 5:
            raise ValueError(f"grid line needs 5 fields: {ln!r}")
        try:
            cells.append(GridCell(k=int(parts[0]), leaves=int(parts[1]),
                                  reservoir=int(parts[2]), r=float(parts[3]),
                                  runs=int(parts[4])))
        except ValueError as exc:
            raise ValueError(f"bad grid line {ln!r}: {exc}") from None
    return cells

"""Batch runs over random qubit channels: capacities, gaps, CSV and SVG output."""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .capacity import capacity_report
from .channel import QChannel, channel_rank
from .decompose import decompose_channel
from .optimize import OptimizerConfig
from .sampling import channel_rng, random_channel

log = logging.getLogger(__name__)

CSV_VERSION = "capgaps-results v1"


class CsvParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    ranks: tuple = (2, 3, 4)
    count: int = 200
    seed: int = 0
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    decompose: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        bad = [r for r in self.ranks if r not in (1, 2, 3, 4)]
        if bad:
            raise ValueError(f"invalid ranks {bad}")


@dataclass
class ResultRow:
    index: int
    rank: int
    seed: int
    t_norm: float
    t_frob: float
    q1: float
    q2: float
    q5: float
    q4: float
    q3_ub: float | None = None
    dq15: float = 0.0
    dq25: float = 0.0
    dq24: float = 0.0
    dq23: float | None = None
    dq34: float | None = None
    residual: float | None = None
    q5_converged: bool = True
    q4_converged: bool = True
    decomposed: bool = False

    def __post_init__(self):
        self.refresh_gaps()

    def refresh_gaps(self) -> None:
        self.dq15 = self.q5 - self.q1
        self.dq25 = self.q2 - self.q5
        self.dq24 = self.q4 - self.q2
        if self.q3_ub is None:
            self.dq23 = self.dq34 = None
        else:
            self.dq23 = self.q3_ub - self.q2
            self.dq34 = self.q4 - self.q3_ub


COLUMNS = tuple(f.name for f in fields(ResultRow))
_INT_COLUMNS = {"index", "rank", "seed"}
_BOOL_COLUMNS = {"q5_converged", "q4_converged", "decomposed"}
_OPTIONAL = {"q3_ub", "dq23", "dq34", "residual"}


def derived_seed(seed: int, rank: int, index: int, stream: int) -> int:
    """Deterministic 32-bit seed for one (channel, purpose) pair."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(rank), int(index), int(stream)))
    return int(ss.generate_state(1)[0])


def evaluate_channel(ch: QChannel, index: int, rank: int, seed: int, opt: OptimizerConfig,
                     decompose: bool = False) -> ResultRow:
    rep = capacity_report(ch, opt.with_seed(derived_seed(seed, rank, index, 1)))
    row = ResultRow(
        index=index,
        rank=rank,
        seed=seed,
        t_norm=rep.t_norm,
        t_frob=rep.t_frob,
        q1=rep.q1,
        q2=rep.q2,
        q5=rep.q5,
        q4=rep.q4,
        q5_converged=rep.diagnostics["q5"].converged,
        q4_converged=rep.diagnostics["q4"].converged,
    )
    if decompose:
        add_decomposition(row, ch, opt)
    return row


def add_decomposition(row: ResultRow, ch: QChannel, opt: OptimizerConfig) -> ResultRow:
    """Fill the Q_III bound columns in place; failures leave them blank."""
    res = decompose_channel(ch, opt.with_seed(derived_seed(row.seed, row.rank, row.index, 2)))
    row.decomposed = res.success
    row.residual = res.residual
    row.q3_ub = max(0.0, res.bound) if res.success else None
    if not res.success:
        log.warning("rank %d index %d: decomposition failed (residual %.2e)", row.rank, row.index, res.residual)
    row.refresh_gaps()
    return row


def _work_item(args) -> ResultRow:
    rank, index, seed, opt, decompose = args
    ch, _ = random_channel(rank, channel_rng(seed, rank, index))
    return evaluate_channel(ch, index, rank, seed, opt, decompose)


def _run_items(func, items, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * threads))))


def run_scatter(cfg: RunConfig) -> list[ResultRow]:
    """One row per sampled channel, ordered by (rank, index)."""
    items = [
        (rank, index, cfg.seed, cfg.optimizer, cfg.decompose)
        for rank in sorted(set(cfg.ranks))
        for index in range(cfg.count)
    ]
    return _run_items(_work_item, items, cfg.threads)


def _evaluate_given(args) -> ResultRow:
    ch, index, seed, opt = args
    return evaluate_channel(ch, index, channel_rank(ch), seed, opt)


def evaluate_channels(channels, seed: int, opt: OptimizerConfig, threads: int = 1) -> list[ResultRow]:
    items = [(ch, i, seed, opt) for i, ch in enumerate(channels)]
    return _run_items(_evaluate_given, items, threads)


def _decompose_given(args) -> ResultRow:
    row, ch, opt = args
    return add_decomposition(row, ch, opt)


def decompose_rows(rows, channels, opt: OptimizerConfig, threads: int = 1) -> list[ResultRow]:
    """Attach Q_III bounds to rows, matching channels by row index."""
    items = []
    for row in rows:
        if not 0 <= row.index < len(channels):
            raise IndexError(f"row index {row.index} has no channel in the batch")
        items.append((replace(row), channels[row.index], opt))
    return _run_items(_decompose_given, items, threads)


# -- CSV ----------------------------------------------------------------------


def _fmt(name: str, value) -> str:
    if value is None:
        return ""
    if name in _BOOL_COLUMNS:
        return "1" if value else "0"
    if name in _INT_COLUMNS:
        return str(int(value))
    return format(float(value), ".17g")


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        d = asdict(row)
        w.writerow([_fmt(c, d[c]) for c in COLUMNS])
    return buf.getvalue()


def write_csv(rows, path) -> None:
    Path(path).write_text(rows_to_csv(rows))


def _parse(name: str, text: str, line: int):
    if text == "":
        if name in _OPTIONAL:
            return None
        raise CsvParseError(line, f"column {name!r} is empty")
    try:
        if name in _BOOL_COLUMNS:
            if text not in ("0", "1"):
                raise ValueError(text)
            return text == "1"
        if name in _INT_COLUMNS:
            return int(text)
        return float(text)
    except ValueError:
        raise CsvParseError(line, f"bad value {text!r} in column {name!r}") from None


def csv_to_rows(text: str) -> list[ResultRow]:
    lines = text.splitlines()
    start = 0
    if lines and lines[0].startswith("#"):
        tag = lines[0][1:].strip()
        if tag != CSV_VERSION:
            raise CsvParseError(1, f"unsupported format {tag!r}, expected {CSV_VERSION!r}")
        start = 1
    reader = csv.reader(lines[start:])
    try:
        header = next(reader)
    except StopIteration:
        raise CsvParseError(start + 1, "missing header") from None
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise CsvParseError(start + 1, f"missing columns {missing}")
    pos = {name: header.index(name) for name in COLUMNS}
    rows = []
    for offset, record in enumerate(reader):
        line = start + 2 + offset
        if not record:
            continue
        if len(record) != len(header):
            raise CsvParseError(line, f"expected {len(header)} fields, found {len(record)}")
        values = {name: _parse(name, record[pos[name]], line) for name in COLUMNS}
        gaps = {k: values.pop(k) for k in ("dq15", "dq25", "dq24", "dq23", "dq34")}
        row = ResultRow(**values)
        # stored gaps must agree with the capacities they derive from
        for k, v in gaps.items():
            stored, recomputed = v, getattr(row, k)
            if (stored is None) != (recomputed is None) or (
                stored is not None and abs(stored - recomputed) > 1e-12
            ):
                raise CsvParseError(line, f"gap column {k!r} disagrees with capacity columns")
            setattr(row, k, stored)
        rows.append(row)
    return rows


def read_csv(path) -> list[ResultRow]:
    return csv_to_rows(Path(path).read_text())


# -- statistics ---------------------------------------------------------------


def _select(rows, rank=None, lo=-math.inf, hi=math.inf):
    return [r for r in rows if (rank is None or r.rank in rank) and lo <= r.t_norm <= hi]


def positive_fraction(rows, threshold: float = 1e-3) -> float:
    return float(np.mean([r.q5 > threshold for r in rows])) if rows else float("nan")


def transition_gap(rows) -> float:
    """median q5 over rank-2 rows with |t| in [0, 0.4] minus the median over [0.6, 1]."""
    low = [r.q5 for r in _select(rows, {2}, 0.0, 0.4)]
    high = [r.q5 for r in _select(rows, {2}, 0.6, 1.0)]
    if not low or not high:
        return float("nan")
    return float(np.median(low) - np.median(high))


def sign_statistics(rows) -> tuple[float, float]:
    """(fraction dq34 > 0, fraction dq23 < 0) over rows with a Q_III bound."""
    done = [r for r in rows if r.q3_ub is not None]
    if not done:
        return float("nan"), float("nan")
    return (float(np.mean([r.dq34 > 0 for r in done])), float(np.mean([r.dq23 < 0 for r in done])))


# -- SVG ----------------------------------------------------------------------

RANK_COLORS = {1: "#7f7f7f", 2: "#d62728", 3: "#1f77b4", 4: "#2ca02c"}
_W, _H = 800, 600
_LEFT, _RIGHT, _TOP, _BOTTOM = 80, 30, 30, 70


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    return [lo + (hi - lo) * i / n for i in range(n + 1)]


def _range(values) -> tuple[float, float]:
    if not values:
        return 0.0, 1.0
    lo, hi = min(values), max(values)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def plot_scatter(rows, x_field: str, y_field: str, group_by_rank: bool = True, path=None) -> str:
    """Scatter plot as a standalone SVG string; also written to ``path`` if given."""
    for name in (x_field, y_field):
        if name not in COLUMNS:
            raise KeyError(f"unknown field {name!r}")
    pts = []
    for r in rows:
        x, y = getattr(r, x_field), getattr(r, y_field)
        if x is None or y is None:
            continue
        pts.append((float(x), float(y), r.rank))
    xlo, xhi = _range([p[0] for p in pts])
    ylo, yhi = _range([p[1] for p in pts])
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def sx(x):
        return _LEFT + (x - xlo) / (xhi - xlo) * pw

    def sy(y):
        return _TOP + (1 - (y - ylo) / (yhi - ylo)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_W} {_H}" width="{_W}" height="{_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<g id="axes" stroke="black" stroke-width="1" fill="none">',
        f'<line x1="{_LEFT}" y1="{_TOP + ph}" x2="{_LEFT + pw}" y2="{_TOP + ph}"/>',
        f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_TOP + ph}"/>',
        "</g>",
        '<g id="ticks" font-family="sans-serif" font-size="12" fill="black">',
    ]
    for v in _ticks(xlo, xhi):
        out.append(f'<line x1="{sx(v):.2f}" y1="{_TOP + ph}" x2="{sx(v):.2f}" y2="{_TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(v):.2f}" y="{_TOP + ph + 20}" text-anchor="middle">{v:.3g}</text>')
    for v in _ticks(ylo, yhi):
        out.append(f'<line x1="{_LEFT - 5}" y1="{sy(v):.2f}" x2="{_LEFT}" y2="{sy(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 8}" y="{sy(v) + 4:.2f}" text-anchor="end">{v:.3g}</text>')
    out.append("</g>")
    out.append(
        f'<text id="xlabel" x="{_LEFT + pw / 2:.1f}" y="{_H - 20}" font-family="sans-serif" '
        f'font-size="14" text-anchor="middle">{x_field}</text>'
    )
    out.append(
        f'<text id="ylabel" x="20" y="{_TOP + ph / 2:.1f}" font-family="sans-serif" font-size="14" '
        f'text-anchor="middle" transform="rotate(-90 20 {_TOP + ph / 2:.1f})">{y_field}</text>'
    )
    out.append('<g id="points" stroke="none" fill-opacity="0.7">')
    for x, y, rank in pts:
        color = RANK_COLORS.get(rank, "black") if group_by_rank else "black"
        out.append(f'<circle class="rank{rank}" cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
    out.append("</g>")
    if group_by_rank:
        out.append('<g id="legend" font-family="sans-serif" font-size="12">')
        for i, rank in enumerate(sorted({p[2] for p in pts})):
            y = _TOP + 10 + 18 * i
            out.append(f'<circle cx="{_LEFT + pw - 70}" cy="{y}" r="4" fill="{RANK_COLORS.get(rank, "black")}"/>')
            out.append(f'<text x="{_LEFT + pw - 60}" y="{y + 4}">rank {rank}</text>')
        out.append("</g>")
    out.append("</svg>")
    svg = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(svg)
    return svg

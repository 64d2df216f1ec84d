"""Benchmark runner: synthesize every netlist of a suite and tabulate the results.

Times exclude parsing and include the final verification.  ``mtc`` is the
longest time spent on a single leaf task, ``size`` the gate count and
``rds`` the random count of the emitted circuit.  A failing file becomes an
error row; the suite always runs to the end.
"""

from __future__ import annotations

import csv
import io
import json
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

from .netlist import load
from .pipeline import SynthConfig, synth_report

COLUMNS = ("name", "order", "time", "mtc", "size", "rds", "status")


@dataclass
class BenchRow:
    name: str
    order: int
    time: float | None = None
    mtc: float | None = None
    size: int | None = None
    rds: int | None = None
    status: str = "ok"  # ok, unverified, error: ...


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"columns": list(COLUMNS), "rows": [asdict(r) for r in self.rows]}

    def to_tsv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
        return buf.getvalue()

    def to_text(self) -> str:
        cells = [list(COLUMNS)] + [[_fmt(getattr(r, c)) for c in COLUMNS] for r in self.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(COLUMNS))]
        lines = []
        for k, row in enumerate(cells):
            lines.append("  ".join(v.ljust(w) if i in (0, 6) else v.rjust(w)
                                   for i, (v, w) in enumerate(zip(row, widths))).rstrip())
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


def default_suite() -> Path:
    return Path(str(resources.files("maskforge") / "data" / "bench"))


def suite_files(suite: str | Path) -> list[Path]:
    p = Path(suite)
    if p.is_file():
        return [p]
    return sorted(p.glob("*.mfc"))


def bench(suite: str | Path, orders: Sequence[int] = (1,), cfg: SynthConfig | None = None) -> BenchReport:
    cfg = cfg or SynthConfig()
    report = BenchReport()
    for path in suite_files(suite):
        try:
            c = load(path)
        except Exception as e:  # one bad file must not abort the suite
            for n in orders:
                report.rows.append(BenchRow(path.stem, n, status=f"error: {e}"))
            continue
        for n in orders:
            report.rows.append(_run_one(c, replace(cfg, order=n)))
    return report


def _run_one(c, cfg: SynthConfig) -> BenchRow:
    row = BenchRow(c.name, cfg.order)
    t0 = time.monotonic()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = synth_report(c, cfg)
    except Exception as e:
        row.status = f"error: {e}"
        return row
    row.time = time.monotonic() - t0
    row.mtc = res.mtc
    row.size = res.circuit.size()
    row.rds = len(res.circuit.randoms)
    row.status = "ok" if res.verified else "unverified"
    return row


def write_report(report: BenchReport, out_dir: str | Path, plots: bool = True) -> list[Path]:
    """JSON, TSV and aligned text next to each other, plus PNG figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "bench.json", out / "bench.tsv", out / "bench.txt"]
    written[0].write_text(json.dumps(report.to_json(), indent=2) + "\n")
    written[1].write_text(report.to_tsv())
    written[2].write_text(report.to_text())
    if plots and report.rows:
        written += plot_report(report, out)
    return written


def plot_report(report: BenchReport, out_dir: str | Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    names = sorted({r.name for r in report.rows}, key=[r.name for r in report.rows].index)
    orders = sorted({r.order for r in report.rows})
    paths = []
    for metric, label in (("time", "time (s)"), ("size", "gates"), ("rds", "randoms")):
        fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(names)), 3.2))
        width = 0.8 / len(orders)
        for j, n in enumerate(orders):
            vals = []
            for name in names:
                r = next((r for r in report.rows if r.name == name and r.order == n), None)
                v = getattr(r, metric) if r is not None else None
                vals.append(0 if v is None else v)
            xs = [i + (j - (len(orders) - 1) / 2) * width for i in range(len(names))]
            ax.bar(xs, vals, width, label=f"n={n}")
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=30, ha="right")
        ax.set_ylabel(label)
        ax.legend(frameon=False)
        ax.spines[["top", "right"]].set_visible(False)
        fig.tight_layout()
        path = out / f"bench_{metric}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths

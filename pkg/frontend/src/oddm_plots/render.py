"""Render BER figures from the simulator's CSV contracts.

Reads only the documented column schemas; rows are never altered or
reordered, and --dump-table echoes exactly the rows that feed the figure.
"""

import csv
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGURE_KINDS = ("ber-vs-alpha", "ber-vs-snr", "bounds-overlay")

BOUND_COLUMNS = ("bound_pl", "bound_mnl", "bound_msl", "bound_max")
BOUND_STYLES = {
    "bound_pl": dict(linestyle="--", color="tab:green"),
    "bound_mnl": dict(linestyle="--", color="tab:orange"),
    "bound_msl": dict(linestyle="--", color="tab:red"),
    "bound_max": dict(linestyle="-", color="black", linewidth=1.6),
}

_REQUIRED = {
    "ber-vs-alpha": ("alpha", "ber") + BOUND_COLUMNS,
    "ber-vs-snr": ("snr_db", "ber", "scheme"),
    "bounds-overlay": ("alpha",) + BOUND_COLUMNS,
}


class RenderError(Exception):
    """Bad inputs: unknown kind, missing columns, or no data rows."""


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    output: str
    log_y: bool = True
    dump_table: bool = False


@dataclass
class Table:
    header: list
    rows: list = field(default_factory=list)  # raw string cells, input order

    def column(self, name):
        idx = self.header.index(name)
        return [row[idx] for row in self.rows]

    def floats(self, name):
        return [float(v) for v in self.column(name)]


def load_tables(paths) -> Table:
    header = None
    merged = None
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                this_header = next(reader)
            except StopIteration:
                raise RenderError(f"{path}: empty file") from None
            if header is None:
                header = this_header
                merged = Table(header=header)
            elif this_header != header:
                raise RenderError(f"{path}: header differs from the first input")
            merged.rows.extend([row for row in reader if row])
    if not merged or not merged.rows:
        raise RenderError("no data rows in the input CSVs")
    return merged


def check_columns(table: Table, kind: str):
    if kind not in _REQUIRED:
        raise RenderError(f"unknown figure kind {kind!r}; choose from {FIGURE_KINDS}")
    for name in _REQUIRED[kind]:
        if name not in table.header:
            raise RenderError(f"missing required column {name!r}")


def _series_keys(table: Table, group_cols):
    present = [c for c in group_cols if c in table.header]
    keys = []
    for row in table.rows:
        key = tuple(row[table.header.index(c)] for c in present)
        if key not in keys:
            keys.append(key)
    return present, keys


def _finite_pairs(xs, ys):
    pts = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y)]
    return [p[0] for p in pts], [p[1] for p in pts]


def _plot_ber_vs_alpha(table: Table, ax):
    cols, keys = _series_keys(table, ("scheme", "channel", "mod_order", "snr_db"))
    for key in keys:
        mask = [tuple(r[table.header.index(c)] for c in cols) == key for r in table.rows]
        alphas = [v for v, m in zip(table.floats("alpha"), mask) if m]
        bers = [v for v, m in zip(table.floats("ber"), mask) if m]
        label = " ".join(f"{c}={v}" for c, v in zip(cols, key))
        ax.plot(alphas, bers, marker="o", linestyle="none", label=f"ber {label}")
        for bound in BOUND_COLUMNS:
            vals = [v for v, m in zip(table.floats(bound), mask) if m]
            xs, ys = _finite_pairs(alphas, vals)
            if ys:
                ax.plot(xs, ys, label=bound, **BOUND_STYLES[bound])
    ax.set_xlabel("alpha")
    ax.set_ylabel("BER")


def _plot_ber_vs_snr(table: Table, ax):
    cols, keys = _series_keys(table, ("scheme", "channel", "mod_order", "alpha"))
    for key in keys:
        mask = [tuple(r[table.header.index(c)] for c in cols) == key for r in table.rows]
        snrs = [v for v, m in zip(table.floats("snr_db"), mask) if m]
        bers = [v for v, m in zip(table.floats("ber"), mask) if m]
        label = " ".join(f"{c}={v}" for c, v in zip(cols, key))
        ax.plot(snrs, bers, marker="o", label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")


def _plot_bounds_overlay(table: Table, ax):
    cols, keys = _series_keys(table, ("mod_order", "snr_db", "sigma_h1_sq"))
    for key in keys:
        mask = [tuple(r[table.header.index(c)] for c in cols) == key for r in table.rows]
        alphas = [v for v, m in zip(table.floats("alpha"), mask) if m]
        suffix = " ".join(f"{c}={v}" for c, v in zip(cols, key)) if len(keys) > 1 else ""
        for bound in BOUND_COLUMNS:
            vals = [v for v, m in zip(table.floats(bound), mask) if m]
            xs, ys = _finite_pairs(alphas, vals)
            if ys:
                ax.plot(xs, ys, label=(bound + (" " + suffix if suffix else "")),
                        **BOUND_STYLES[bound])
    ax.set_xlabel("alpha")
    ax.set_ylabel("BER bound")


_PLOTTERS = {
    "ber-vs-alpha": _plot_ber_vs_alpha,
    "ber-vs-snr": _plot_ber_vs_snr,
    "bounds-overlay": _plot_bounds_overlay,
}


def dump_table(table: Table) -> str:
    lines = [",".join(table.header)]
    lines.extend(",".join(row) for row in table.rows)
    return "\n".join(lines)


def render(spec: FigureSpec) -> str:
    """Render the figure, returning the dump-table text (echoed by the CLI)."""
    table = load_tables(spec.inputs)
    check_columns(table, spec.kind)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    _PLOTTERS[spec.kind](table, ax)
    if spec.log_y:
        ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)
    return dump_table(table)

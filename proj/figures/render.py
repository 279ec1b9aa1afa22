"""Render the paper's figures from ubsim CSVs. The CSV files are the only input."""

import argparse
import csv
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SCHEMA_VERSION = 1
HEADER_RE = re.compile(r"^# ubsim-csv schema=(\d+) experiment=(\S+) seed=(\d+)$")


class MissingInput(Exception):
    pass


class SchemaMismatch(Exception):
    pass


@dataclass
class FigureSpec:
    name: str
    inputs: list
    kind: str  # line, cdf, stacked-bar, log-log, bar
    xlabel: str
    ylabel: str
    # Columns each input must carry.
    columns: dict


def load_csv(path, experiment, columns):
    if not path.exists():
        raise MissingInput(f"missing {path}")
    with path.open(newline="") as f:
        first = f.readline().rstrip("\n")
        m = HEADER_RE.match(first)
        if not m or int(m.group(1)) != SCHEMA_VERSION or m.group(2) != experiment:
            raise SchemaMismatch(f"{path}: bad header {first!r}")
        reader = csv.DictReader(f)
        missing = set(columns) - set(reader.fieldnames or [])
        if missing:
            raise SchemaMismatch(f"{path}: missing columns {sorted(missing)}")
        rows = list(reader)
    for r in rows:
        if None in r or None in r.values():
            raise SchemaMismatch(f"{path}: ragged row {r}")
    return rows


def series(rows, key, x, y, where=None):
    out = {}
    for r in rows:
        if where and any(r[k] != v for k, v in where.items()):
            continue
        out.setdefault(r[key], []).append((float(r[x]), float(r[y])))
    return {k: sorted(v) for k, v in out.items()}


def plot_lines(ax, groups, log=False, marker="o"):
    for label, pts in groups.items():
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=marker, label=label)
    if log:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.legend(fontsize=7)


def draw_state_scaling(ax, data):
    plot_lines(ax, series(data["state_scaling"], "variant", "n", "bytes"), log=True)


def draw_spill(ax, data):
    plot_lines(ax, series(data["sram_spill"], "stack", "endpoints", "latency_ns"))
    ax.set_xscale("log")


def draw_breakdown(ax, data):
    rows = [r for r in data["per_side_table"] if r["kind"] != "total" and r["row"] != "sched"]
    stacks = list(dict.fromkeys(r["stack"] for r in rows))
    kinds = list(dict.fromkeys(r["kind"] for r in rows))
    bottom = [0.0] * len(stacks)
    for k in kinds:
        vals = [sum(float(r["ns"]) for r in rows if r["stack"] == s and r["kind"] == k) for s in stacks]
        ax.bar(stacks, vals, bottom=bottom, label=k)
        bottom = [b + v for b, v in zip(bottom, vals)]
    ax.legend(fontsize=7)


def draw_jitter(ax, data):
    order = ["p1", "p10", "p25", "p50", "p75", "p90", "p99", "p99.9"]
    quant = [0.01, 0.10, 0.25, 0.50, 0.75, 0.90, 0.99, 0.999]
    rows = [r for r in data["jitter_cdf"] if r["factor"] != "0" and r["statistic"] in order]
    for s in dict.fromkeys(r["stack"] for r in rows):
        lat = {r["statistic"]: float(r["latency_ns"]) for r in rows if r["stack"] == s}
        ax.plot([lat[o] for o in order], quant, marker=".", label=s)
    ax.legend(fontsize=7)


def draw_loss(ax, data):
    rows = data["loss_goodput"]
    groups = {}
    for r in rows:
        groups.setdefault(r["stack"], {}).setdefault(float(r["loss_rate"]), []).append(float(r["goodput_mops"]))
    for s, by_rate in groups.items():
        xs = sorted(by_rate)
        ax.plot(xs, [sum(by_rate[x]) / len(by_rate[x]) for x in xs], marker="o", label=s)
    ax.legend(fontsize=7)


def draw_congestion(ax, data):
    rows = [r for r in data["congestion"] if r["utilisation"]]
    ax.bar([f'{r["family"]} {r["mark_threshold"]}' for r in rows], [float(r["utilisation"]) for r in rows])
    ax.tick_params(axis="x", labelsize=6)


def draw_envelope(ax, data):
    plot_lines(ax, series(data["envelope"], "stack", "offered_mops", "p99_ns", {"knee": "0"}))


def draw_swap(ax, data):
    rows = data["swap_compare"]
    labels = [f'{r["system"]}\n{r["pattern"]}' for r in rows]
    ax.bar(labels, [float(r["mean_ns"]) for r in rows])
    ax.tick_params(axis="x", labelsize=6)


def draw_ycsb(ax, data):
    rows = data["ycsb"]
    ax.bar([r["stack"] for r in rows], [float(r["mops"]) for r in rows])


def draw_cas(ax, data):
    plot_lines(ax, series(data["cas_contention"], "stack", "contenders", "time_to_acquire_us"), log=True)


def draw_payload(ax, data):
    plot_lines(ax, series(data["payload_scaling"], "stack", "payload", "latency_ns"), log=True)


FIGURES = {
    "state_scaling": (FigureSpec("state_scaling", ["state_scaling"], "log-log", "endpoints", "bytes",
                                 {"state_scaling": ["variant", "n", "bytes"]}), draw_state_scaling),
    "spill_cliff": (FigureSpec("spill_cliff", ["sram_spill"], "line", "endpoints", "latency (ns)",
                               {"sram_spill": ["endpoints", "latency_ns"]}), draw_spill),
    "latency_breakdown": (FigureSpec("latency_breakdown", ["per_side_table"], "stacked-bar", "stack", "ns",
                                     {"per_side_table": ["row", "kind", "ns"]}), draw_breakdown),
    "jitter_cdf": (FigureSpec("jitter_cdf", ["jitter_cdf"], "cdf", "latency (ns)", "quantile",
                              {"jitter_cdf": ["factor", "statistic", "latency_ns"]}), draw_jitter),
    "loss_goodput": (FigureSpec("loss_goodput", ["loss_goodput"], "line", "loss rate", "goodput (Mops/s)",
                                {"loss_goodput": ["loss_rate", "goodput_mops"]}), draw_loss),
    "congestion": (FigureSpec("congestion", ["congestion"], "bar", "controller", "utilisation",
                              {"congestion": ["family", "mark_threshold", "utilisation"]}), draw_congestion),
    "envelope": (FigureSpec("envelope", ["envelope"], "line", "offered (Mops/s)", "p99 (ns)",
                            {"envelope": ["offered_mops", "p99_ns", "knee"]}), draw_envelope),
    "swap": (FigureSpec("swap", ["swap_compare"], "bar", "system", "mean (ns)",
                        {"swap_compare": ["system", "pattern", "mean_ns"]}), draw_swap),
    "ycsb": (FigureSpec("ycsb", ["ycsb"], "bar", "stack", "Mops/s", {"ycsb": ["mops"]}), draw_ycsb),
    "cas_contention": (FigureSpec("cas_contention", ["cas_contention"], "log-log", "contenders",
                                  "time to acquire (us)",
                                  {"cas_contention": ["contenders", "time_to_acquire_us"]}), draw_cas),
    "payload_scaling": (FigureSpec("payload_scaling", ["payload_scaling"], "log-log", "payload (B)",
                                   "latency (ns)", {"payload_scaling": ["payload", "latency_ns"]}), draw_payload),
}


def render(name, csv_dir, out_dir):
    spec, draw = FIGURES[name]
    data = {e: load_csv(Path(csv_dir) / f"{e}.csv", e, spec.columns.get(e, [])) for e in spec.inputs}
    fig, ax = plt.subplots(figsize=(5, 3.5))
    draw(ax, data)
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    ax.set_title(spec.name)
    fig.tight_layout()
    out = Path(out_dir) / f"{name}.svg"
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    plt.close(fig)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(prog="render")
    ap.add_argument("--figure", default="all", help="figure name or 'all'")
    ap.add_argument("--csv-dir", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    names = list(FIGURES) if args.figure == "all" else [args.figure]
    for n in names:
        if n not in FIGURES:
            print(f"error: unknown figure {n}", file=sys.stderr)
            return 2
        try:
            print(render(n, args.csv_dir, args.out))
        except (MissingInput, SchemaMismatch) as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

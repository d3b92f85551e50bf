"""Generated plot scripts: standalone matplotlib programs that read the sweep
CSVs, so the simulator itself needs no plotting dependency."""

import os

_COMMON = '''\
#!/usr/bin/env python3
"""Generated plot script; reads {csv} written by the sweep runner."""
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    rows = []
    with open(os.path.join(HERE, name)) as fh:
        for row in csv.DictReader(fh):
            rows.append(row)
    return rows


def series(rows, metric):
    out = {{}}
    for r in rows:
        key = f"{{r['protocol']}}/{{r['security_mode']}}"
        out.setdefault(key, []).append((int(r["N"]), float(r[metric])))
    for key in out:
        out[key].sort()
    return out


def main():
    rows = load("{csv}")
    data = series(rows, "{metric}")
    plt.figure(figsize=(7, 4.5))
    for key in sorted(data):
        ns = [n for n, _ in data[key]]
        vs = [v for _, v in data[key]]
        plt.plot(ns, vs, marker="o", label=key)
    plt.xlabel("network size (nodes)")
    plt.ylabel("{ylabel}")
    plt.title("{title}")
    plt.grid(True, alpha=0.3)
    plt.legend()
    out = os.path.join(HERE, "{outfile}")
    plt.savefig(out, dpi=150, bbox_inches="tight")
    print(out)


if __name__ == "__main__":
    main()
'''

FIGURES = [
    ("plot_delay.py", "means.csv", "avg_delay_s",
     "mean end-to-end delay (s)", "Packet end-to-end delay vs network size",
     "fig_delay.png"),
    ("plot_cumulative_delay.py", "cumulative.csv", "cum_delay_s",
     "cumulative delay (s)", "Cumulative end-to-end delay vs network size",
     "fig_cumulative_delay.png"),
    ("plot_cumulative_jitter.py", "cumulative.csv", "cum_jitter_s",
     "cumulative jitter (s)", "Cumulative packet jitter vs network size",
     "fig_cumulative_jitter.png"),
    ("plot_routing_load.py", "means.csv", "ctl_bytes",
     "routing load (bytes)", "Total routing load vs network size",
     "fig_routing_load.png"),
    ("plot_cumulative_delay_security.py", "cumulative.csv", "cum_delay_s",
     "cumulative delay (s)", "Cumulative delay overhead by security mode",
     "fig_security_delay.png"),
    ("plot_cumulative_load_security.py", "cumulative.csv", "cum_ctl_bytes",
     "cumulative control bytes", "Cumulative control load by security mode",
     "fig_security_load.png"),
    ("plot_cumulative_goodput.py", "cumulative.csv", "cum_goodput_ratio",
     "cumulative goodput ratio", "Cumulative data/control ratio",
     "fig_goodput.png"),
]


def write_plot_scripts(out_dir):
    paths = []
    for name, csv_name, metric, ylabel, title, outfile in FIGURES:
        path = os.path.join(out_dir, name)
        with open(path, "w") as fh:
            fh.write(_COMMON.format(csv=csv_name, metric=metric, ylabel=ylabel,
                                    title=title, outfile=outfile))
        paths.append(path)
    return paths

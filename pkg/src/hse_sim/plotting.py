"""Static log-log figures of trace-distance curves.

Figures are drawn on a bare :class:`matplotlib.figure.Figure` (no pyplot
state) and saved as SVG with a fixed hash salt and no timestamp, so the same
input always produces the same bytes.
"""

import matplotlib

matplotlib.use("Agg")

from matplotlib.figure import Figure  # noqa: E402

from . import seriesio  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 11,
    "legend.fontsize": 8,
    "lines.linewidth": 1.4,
    "svg.hashsalt": "hse-sim",
    "svg.fonttype": "path",
}


def _label(header, k, n_blocks):
    if n_blocks == 1:
        return f"k={k}"
    tag = header.get("source") or header.get("block") or ""
    bits = [f"k={k}"]
    if tag:
        bits.insert(0, str(tag))
    for key in ("theta_x", "theta_z"):
        if key in header and "block" in header:
            bits.append(f"{key}={float(header[key]) / 3.141592653589793:.3g}pi")
    return " ".join(bits)


def plot_blocks(blocks, out_path, title=None):
    """Draw one polyline per (block, k); returns the number of polylines."""
    n_lines = 0
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(6, 4.2))
        ax = fig.add_subplot()
        for b, (header, rows) in enumerate(blocks):
            for k in sorted({k for _, k, _ in rows}):
                pts = sorted((T, d) for T, kk, d in rows if kk == k and d > 0)
                if not pts:
                    continue
                T, d = zip(*pts)
                (line,) = ax.plot(T, d, marker=".", markersize=3, label=_label(header, k, len(blocks)))
                line.set_gid(f"delta-b{b}-k{k}")
                n_lines += 1
        if n_lines == 0:
            raise ValueError("nothing to plot: no positive trace distances")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("T")
        ax.set_ylabel(r"$\Delta^{(k)}(T)$")
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    return n_lines


def plot_series_file(csv_path, out_path):
    blocks = seriesio.read_blocks(csv_path)
    first = blocks[0][0]
    title = first.get("drive")
    return plot_blocks(blocks, out_path, title=title)

"""CSV, metadata, figure and plot-script emission.

The CSV is the canonical record and is byte-deterministic: fixed column
order, ``%.16e`` floats, ``\\n`` line ends, UTF-8.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict
from pathlib import Path

from .config import Experiment
from .experiments import ExperimentResult, Row

__all__ = ["DIVERGED", "HEADER", "format_csv", "write_outputs", "render_figure", "plot_script", "OutputPaths"]

DIVERGED = "diverged"
HEADER = "scheme,n_q,k,param,value"


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def format_csv(rows: list[Row]) -> str:
    if not rows:
        raise ValueError("cannot write an empty table")
    lines = [HEADER]
    for r in rows:
        value = DIVERGED if r.value is None else _fmt(r.value)
        lines.append(f"{r.scheme},{r.n_q},{_fmt(r.k)},{_fmt(r.param)},{value}")
    return "\n".join(lines) + "\n"


class OutputPaths(dict):
    """Mapping from artefact kind (``csv``, ``json``, ``png``, ``plot``) to path."""


def _metadata(result: ExperimentResult) -> dict:
    cfg = asdict(result.config)
    cfg["experiment"] = result.config.experiment.value
    cfg["n_q"] = [min(result.config.n_q), max(result.config.n_q), len(result.config.n_q)]
    return {"config": cfg, "results": result.metadata}


def _x_label(experiment: Experiment) -> str:
    return "lambda" if experiment is Experiment.POLE_MAP else "N_q"


def render_figure(result: ExperimentResult, path: Path) -> None:
    """Semilog-y plot of the table, one curve per scheme (and per lambda for sweeps)."""
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    e = result.config.experiment
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    try:
        if e is Experiment.LAMBDA_SWEEP:
            for s in result.config.schemes:
                for lam in sorted({r.param for r in result.rows if r.scheme == s}):
                    n, _, v = result.series(s, lam)
                    ax.semilogy(n, v, marker=".", ms=3, label=f"{s}, lambda={lam:.0e}")
            ax.set_ylabel("relative error")
        elif e is Experiment.POLE_MAP:
            for s in sorted({r.scheme for r in result.rows}):
                sel = [r for r in result.rows if r.scheme == s and r.value is not None]
                ax.loglog([r.param for r in sel], [r.value for r in sel], marker="o", label=s)
            ax.set_ylabel("min |Im y|")
        else:
            for s in result.config.schemes:
                n, _, v = result.series(s)
                ax.semilogy(n, v, marker=".", ms=3, label=s)
            ax.set_ylabel("error")
        ax.set_xlabel(_x_label(e))
        ax.set_title(result.config.name)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7)
        fig.tight_layout()
        # no timestamps or version strings, so reruns give identical files
        fig.savefig(path, dpi=120, metadata={"Software": None})
    finally:
        plt.close(fig)


_SCRIPT = '''"""Plot {name}: error against N_q (semilog-y)."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
series = {{}}
with open(here / {csv!r}, encoding="utf-8") as fh:
    for row in csv.DictReader(fh):
        if row["value"] == "diverged":
            continue
        key = row["scheme"] if {split!r} == "" else f"{{row['scheme']}} {split}={{float(row['param']):.0e}}"
        series.setdefault(key, ([], []))
        series[key][0].append(float(row[{xcol!r}]))
        series[key][1].append(float(row["value"]))

fig, ax = plt.subplots()
for key, (x, y) in series.items():
    ax.semilogy(x, y, marker=".", label=key)
ax.set_xlabel({xlabel!r})
ax.set_ylabel("error")
ax.legend()
fig.savefig(here / {png!r})
plt.show()
'''


def plot_script(result: ExperimentResult, csv_path: Path, script_path: Path) -> str:
    e = result.config.experiment
    rel = os.path.relpath(csv_path, script_path.parent)
    return _SCRIPT.format(
        name=result.config.name,
        csv=rel,
        split="lambda" if e is Experiment.LAMBDA_SWEEP else "",
        xcol="param" if e is Experiment.POLE_MAP else "n_q",
        xlabel=_x_label(e),
        png=Path(rel).with_suffix(".script.png").as_posix(),
    )


def write_outputs(result: ExperimentResult, csv_path, *, figure: bool = True,
                  emit_plot: bool = False) -> OutputPaths:
    """Write the CSV plus ``.json`` metadata, an optional ``.png`` figure and ``.plot.py`` script."""
    text = format_csv(result.rows)  # validates before touching the file system
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    out = OutputPaths(csv=csv_path)
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    meta_path = csv_path.with_suffix(".json")
    with open(meta_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_metadata(result), fh, indent=2, sort_keys=True)
        fh.write("\n")
    out["json"] = meta_path
    if figure:
        png = csv_path.with_suffix(".png")
        render_figure(result, png)
        out["png"] = png
    if emit_plot:
        script = csv_path.with_suffix(".plot.py")
        with open(script, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(plot_script(result, csv_path, script))
        out["plot"] = script
    return out

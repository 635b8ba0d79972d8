"""CSV writers for simulation results.

Numbers are written with ``repr`` so reruns are byte-identical; undefined
entries are written as ``NA``.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import tomli_w

from . import __version__
from .chanmgmt import ChannelLists
from .config import to_dict
from .simulator import TRACE_COLUMNS, SimulationResult

METRICS = ("nwcf", "p_sd", "p_md", "p_fa", "chi2")

# column order of the list-snapshot table
LIST_COLUMNS = ("ocl", "dcl", "bcl", "pcl", "ccl")


def fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NA"
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def list_cell(channels: Sequence[int]) -> str:
    """``{CH4 CH6}`` style rendering; ``{}`` for an empty list."""
    return "{" + " ".join(f"CH{c}" for c in channels) + "}"


def write_lists(path: Path, lists: Sequence[ChannelLists]) -> None:
    """One row per cell with its five channel lists."""
    rows = [[f"WRAN{j + 1}", *(list_cell(getattr(cl, n)) for n in LIST_COLUMNS)]
            for j, cl in enumerate(lists)]
    write_rows(path, ["cell", *(n.upper() for n in LIST_COLUMNS)], rows)


def write_matrix(path: Path, values: np.ndarray, defined: np.ndarray) -> None:
    """(cell, channel) matrix; entries outside ``defined`` are NA."""
    J, K = values.shape
    rows = [[f"WRAN{j + 1}", *(fmt(values[j, k]) if defined[j, k] else "NA" for k in range(K))]
            for j in range(J)]
    write_rows(path, ["cell", *(f"CH{k + 1}" for k in range(K))], rows)


def write_trace(path: Path, trace: dict[str, np.ndarray], rules: Sequence[str],
                keep: Sequence[str]) -> None:
    keep_idx = {rules.index(r) for r in keep}
    cols = [trace[c] for c in TRACE_COLUMNS]
    ri = TRACE_COLUMNS.index("rule")
    rows = []
    for i in range(len(cols[0])):
        r = int(cols[ri][i])
        if r not in keep_idx:
            continue
        row = [fmt(c[i]) for c in cols]
        row[ri] = rules[r]
        rows.append(row)
    write_rows(path, TRACE_COLUMNS, rows)


def write_result(out: Path, result: SimulationResult, rules: Sequence[str],
                 trace: bool = True) -> list[Path]:
    """Write the full CSV set of one run into ``out``; returns the written paths."""
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name: str) -> Path:
        p = out / name
        written.append(p)
        return p

    idx = [result.rule_index(r) for r in rules]
    write_rows(emit("summary.csv"), ["rule", *METRICS],
               [[r, *result.summary[i]] for r, i in zip(rules, idx)])
    ts_rows = [[int(sf), r, *result.network[n, i]]
               for n, sf in enumerate(result.snapshot_superframes) for r, i in zip(rules, idx)]
    write_rows(emit("timeseries.csv"), ["superframe", "rule", *METRICS], ts_rows)
    for r, i in zip(rules, idx):
        for m, name in enumerate(METRICS):
            write_matrix(emit(f"matrix_{r}_{name}.csv"), result.final_perf[i, :, :, m],
                         result.ever_operating)
    write_lists(emit("lists.csv"), result.final_lists)
    write_rows(emit("transitions.csv"), ["time", "cell", "channel", "source", "target"],
               [[t.time, t.cell + 1, t.channel, t.source, t.target] for t in result.transitions])
    if trace and result.trace is not None:
        write_trace(emit("trace.csv"), result.trace, result.rules, rules)
    return written


def write_metadata(path: Path, config, **extra) -> None:
    """Sidecar with the resolved config and the package version."""
    meta = {"artifact": {"package": "mclds", "version": __version__, **extra},
            "config": to_dict(config)}
    path.write_text(tomli_w.dumps(meta))


__all__ = ["METRICS", "fmt", "write_lists", "write_matrix", "write_metadata",
           "write_result", "write_rows", "write_trace"]

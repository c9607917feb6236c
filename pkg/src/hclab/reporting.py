"""Report emission: canonical JSON documents, delimited scan tables, and
matplotlib figures rendered to files alongside them.

JSON output is canonical (sorted keys, fixed float formatting via ``repr``)
so that a fixed seed reproduces byte-identical reports.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

__all__ = [
    "write_json",
    "load_json",
    "write_csv",
    "scan_csv_rows",
    "residual_csv_rows",
    "battery_csv_rows",
    "render_scan_figure",
    "render_residual_figure",
    "render_battery_figure",
    "render_witness_figure",
]


def write_json(path: str | Path, doc: dict) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def scan_csv_rows(result_doc: dict) -> tuple[list[str], list[list]]:
    """Scanned-distance table of an oracle result document."""
    scanned = result_doc.get("scanned", [])
    keys: list[str] = []
    for row in scanned:
        for key in row:
            if key not in keys:
                keys.append(key)
    return keys, [[row.get(k, "") for k in keys] for row in scanned]


def residual_csv_rows(report_doc: dict) -> tuple[list[str], list[list]]:
    """Per-step residual table of a criterion report document."""
    header = ["k", "n", "family", "generator", "residual"]
    rows = []
    seq = report_doc["seq"]
    for family, table in (
        ("t", report_doc["t_residuals"]),
        ("s", report_doc["s_residuals"]),
        ("ts", report_doc["ts_residuals"]),
    ):
        for g_idx, series in enumerate(table):
            for k_idx, value in enumerate(series):
                rows.append([k_idx + 1, seq[k_idx], family, g_idx + 1, value])
    return header, rows


def battery_csv_rows(report_doc: dict) -> tuple[list[str], list[list]]:
    header = ["condition", "verdict", "pair", "feasible", "n", "dist"]
    rows = []
    for name, cond in report_doc["conditions"].items():
        verdict = cond["verdict"]
        records = cond.get("records")
        if not records:
            rows.append([name, verdict, "", "", "", ""])
            continue
        for rec in records:
            rows.append(
                [
                    name,
                    verdict,
                    rec.get("pair", rec.get("subsequence", "")),
                    rec.get("feasible", ""),
                    rec.get("n", ""),
                    rec.get("dist", ""),
                ]
            )
    return header, rows


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


_FLOOR = 1e-17  # display floor so exact zeros survive the log axis


def render_scan_figure(result_doc: dict, path: str | Path) -> None:
    """Scanned distances against the exponent, with the target radius line."""
    plt = _plt()
    scanned = result_doc.get("scanned", [])
    fig, ax = plt.subplots(figsize=(7, 4))
    ns = [row.get("n", row.get("k")) for row in scanned]
    dist_keys = [k for k in (scanned[0] if scanned else {}) if k.startswith("dist")]
    for key in dist_keys:
        ys = [max(row.get(key, float("nan")) or _FLOOR, _FLOOR) for row in scanned]
        ax.semilogy(ns, ys, marker="o", label=key)
    radius = result_doc.get("query", {}).get("V", {}).get("radius")
    if radius:
        ax.axhline(radius, color="crimson", linestyle="--", label="target radius")
    if result_doc.get("n") is not None:
        ax.axvline(result_doc["n"], color="seagreen", linestyle=":", label=f"hit n={result_doc['n']}")
    ax.set_xlabel("exponent n")
    ax.set_ylabel("distance")
    ax.set_title(f"{result_doc.get('operator', '')}: {result_doc.get('kind', 'scan')}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_residual_figure(report_doc: dict, path: str | Path) -> None:
    """Residual families against k on a log scale, with the tolerance line."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    ks = list(range(1, report_doc["K"] + 1))
    styles = {"t": "-o", "s": "-s", "ts": "-^"}
    labels = {
        "t": "||T^{n_k} y||",
        "s": "||S_{n_k} z||",
        "ts": "||T^{n_k} S_{n_k} z - z||",
    }
    for family in ("t", "s", "ts"):
        table = report_doc[f"{family}_residuals"]
        worst = [max(max(series[k], _FLOOR) for series in table) for k in range(len(ks))]
        ax.semilogy(ks, worst, styles[family], label=f"max {labels[family]}")
    ax.axhline(report_doc["tol"], color="crimson", linestyle="--", label="tolerance")
    ax.set_xlabel("k")
    ax.set_ylabel("residual")
    ax.set_title(f"{report_doc.get('operator', '')}: certificate residuals "
                 f"({report_doc['verdict']})")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_battery_figure(report_doc: dict, path: str | Path) -> None:
    """Condition verdict strip for a battery report."""
    plt = _plt()
    verdicts = report_doc["verdicts"]
    names = list(verdicts)
    colors = {"pass": "seagreen", "fail": "crimson", "not_evaluated": "lightgray"}
    fig, ax = plt.subplots(figsize=(7, 2.4))
    ax.barh(range(len(names)), [1] * len(names),
            color=[colors[verdicts[n]] for n in names], edgecolor="black")
    for i, name in enumerate(names):
        ax.text(0.5, i, f"{name}: {verdicts[name]}", ha="center", va="center", fontsize=9)
    ax.set_xlim(0, 1)
    ax.set_xticks([])
    ax.set_yticks([])
    consistent = "consistent" if report_doc["consistent"] else "INCONSISTENT"
    ax.set_title(f"{report_doc['operator']}: {report_doc['overall']} ({consistent})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_witness_figure(report_doc: dict, path: str | Path) -> None:
    """Per-column bounds against the per-ball radius, plus the two residuals."""
    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    bounds_a = report_doc.get("column_bounds_a", [])
    bounds_b = report_doc.get("column_bounds_b", [])
    idx = list(range(1, len(bounds_a) + 1))
    width = 0.35
    ax1.bar([i - width / 2 for i in idx], [max(v, _FLOOR) for v in bounds_a],
            width=width, label="A-side column bound")
    ax1.bar([i + width / 2 for i in idx], [max(v, _FLOOR) for v in bounds_b],
            width=width, label="B-side column bound")
    ax1.axhline(report_doc["ball_radius"], color="crimson", linestyle="--",
                label="per-ball radius")
    ax1.set_yscale("log")
    ax1.set_xlabel("column i")
    ax1.legend(fontsize=8)
    residuals = [report_doc.get("residual_a") or _FLOOR, report_doc.get("residual_b") or _FLOOR]
    ax2.bar(["||S-A||", "||T^n S-B||"], [max(v, _FLOOR) for v in residuals], color="steelblue")
    ax2.axhline(report_doc["eps"], color="crimson", linestyle="--", label="eps")
    ax2.set_yscale("log")
    ax2.legend(fontsize=8)
    status = "success" if report_doc["success"] else "failure"
    fig.suptitle(f"{report_doc['operator']}: witness {status} (mode {report_doc['mode']})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

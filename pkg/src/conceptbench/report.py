"""Analysis reports: delimited term/artifact tables plus rendered figures.

The report path writes CSV files next to one PNG per artifact: a layered
lattice drawing (client layout uses the same layer indices), the U-matrix
terrain with projected markers, the probability-labelled state graph, and
the EM log-likelihood trace when present.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _layered_positions(data: dict) -> dict[int, tuple[float, float]]:
    layers: dict[int, list[int]] = {}
    for node in data["nodes"]:
        layers.setdefault(node["layer"], []).append(node["index"])
    positions = {}
    for layer, members in layers.items():
        members.sort()
        for k, index in enumerate(members):
            x = (k + 1) / (len(members) + 1)
            positions[index] = (x, -layer)
    return positions


def render_lattice_figure(data: dict, path: Path) -> None:
    positions = _layered_positions(data)
    fig, ax = plt.subplots(figsize=(8, 6))
    for lower, upper in data["edges"]:
        (x1, y1), (x2, y2) = positions[lower], positions[upper]
        ax.plot([x1, x2], [y1, y2], color="0.6", lw=0.8, zorder=1)
    xs = [positions[n["index"]][0] for n in data["nodes"]]
    ys = [positions[n["index"]][1] for n in data["nodes"]]
    ax.scatter(xs, ys, s=160, c="white", edgecolors="black", zorder=2)
    for node in data["nodes"]:
        x, y = positions[node["index"]]
        above = ", ".join(node["own_attributes"])
        below = ", ".join(node["own_objects"])
        if above:
            ax.annotate(above, (x, y), textcoords="offset points",
                        xytext=(0, 10), ha="center", fontsize=7,
                        color="darkblue")
        if below:
            ax.annotate(below, (x, y), textcoords="offset points",
                        xytext=(0, -14), ha="center", fontsize=7,
                        color="darkred")
    ax.set_axis_off()
    ax.set_title("concept lattice")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_tracks_figure(data: dict, path: Path) -> None:
    positions = _layered_positions(data)
    fig, ax = plt.subplots(figsize=(8, 6))
    for lower, upper in data["edges"]:
        (x1, y1), (x2, y2) = positions[lower], positions[upper]
        ax.plot([x1, x2], [y1, y2], color="0.8", lw=0.8, zorder=1)
    xs = [positions[n["index"]][0] for n in data["nodes"]]
    ys = [positions[n["index"]][1] for n in data["nodes"]]
    ax.scatter(xs, ys, s=120, c="white", edgecolors="black", zorder=2)
    cmap = plt.get_cmap("tab10")
    for k, track in enumerate(data.get("trackList", [])):
        color = cmap(k % 10)
        for step in track["steps"]:
            (x1, y1) = positions[step["from_concept"]]
            (x2, y2) = positions[step["to_concept"]]
            ax.annotate("", xy=(x2, y2), xytext=(x1, y1),
                        arrowprops=dict(arrowstyle="->", color=color,
                                        lw=1.6), zorder=3)
        ax.plot([], [], color=color, label=track["entity"])
    if data.get("trackList"):
        ax.legend(fontsize=7, loc="lower right")
    ax.set_axis_off()
    ax.set_title("life tracks")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_esom_figure(data: dict, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(8, 5))
    image = ax.imshow(data["umatrix"], cmap="viridis", origin="upper")
    fig.colorbar(image, ax=ax, label="mean neighbor distance")
    for placement in data.get("projections", []):
        ax.plot(placement["col"], placement["row"], marker="o",
                color="white", markersize=4, markeredgecolor="black")
        ax.annotate(placement["id"], (placement["col"], placement["row"]),
                    textcoords="offset points", xytext=(3, 3), fontsize=6,
                    color="white")
    ax.set_title(f"U-matrix {data['rows']}x{data['cols']} "
                 f"({data['topology']})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_hmm_figure(data: dict, path: Path) -> None:
    graph = data["graph"] if "graph" in data else data
    nodes = graph["nodes"]
    n = len(nodes)
    fig, ax = plt.subplots(figsize=(7, 7))
    positions = {}
    for node in nodes:
        angle = 2 * math.pi * node["state"] / max(n, 1)
        positions[node["state"]] = (math.cos(angle), math.sin(angle))
    for edge in graph["edges"]:
        (x1, y1) = positions[edge["from"]]
        (x2, y2) = positions[edge["to"]]
        if edge["from"] == edge["to"]:
            ax.annotate(f"{edge['p']:.2f}", (x1 * 1.25, y1 * 1.25),
                        ha="center", fontsize=7, color="gray")
            continue
        ax.annotate("", xy=(x2, y2), xytext=(x1, y1),
                    arrowprops=dict(arrowstyle="->", color="0.4",
                                    shrinkA=16, shrinkB=16))
        ax.annotate(f"{edge['p']:.2f}",
                    ((x1 + x2) / 2, (y1 + y2) / 2), fontsize=7,
                    color="darkgreen")
    for node in nodes:
        x, y = positions[node["state"]]
        ax.plot(x, y, marker="o", markersize=26, color="lightsteelblue",
                markeredgecolor="black")
        top = node["emissions"][0]["symbol"] if node["emissions"] else "?"
        ax.annotate(f"{node['state']}:{top}", (x, y), ha="center",
                    va="center", fontsize=7)
    ax.set_xlim(-1.5, 1.5)
    ax.set_ylim(-1.5, 1.5)
    ax.set_aspect("equal")
    ax.set_axis_off()
    ax.set_title("process model")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_trace_figure(trace: list[float], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(range(len(trace)), trace, marker="o", ms=3)
    ax.set_xlabel("iteration")
    ax.set_ylabel("total log-likelihood")
    ax.set_title("EM trace")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(manager, session_id: str, out_dir,
                 top_terms: int = 20) -> list[str]:
    """Write the delimited tables and one figure per artifact; returns the
    relative names of everything written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    session = manager.get_session(session_id)
    written: list[str] = []

    frequencies = session.index.term_frequencies()
    ranked = sorted(frequencies.items(), key=lambda kv: (-kv[1], kv[0]))
    with open(out / "term_frequencies.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["term", "count"])
        writer.writerows(ranked[:top_terms])
    written.append("term_frequencies.csv")

    with open(out / "artifacts.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "kind", "summary"])
        for name, entry in sorted(session.artifacts.items()):
            summary = summarize_artifact(entry)
            writer.writerow([name, entry["kind"],
                             json.dumps(summary, sort_keys=True)])
    written.append("artifacts.csv")

    for name, entry in sorted(session.artifacts.items()):
        data = json.loads(entry["payload"])
        figure = out / f"{name}.png"
        if entry["kind"] == "lattice":
            render_lattice_figure(data, figure)
        elif entry["kind"] == "tracks":
            render_tracks_figure(data, figure)
        elif entry["kind"] == "esom":
            render_esom_figure(data, figure)
        elif entry["kind"] == "hmm":
            render_hmm_figure(data, figure)
            trace = data.get("model", {}).get("trace")
            if trace:
                render_trace_figure(trace, out / f"{name}-trace.png")
                written.append(f"{name}-trace.png")
        else:
            continue
        written.append(figure.name)
    return written


def summarize_artifact(entry: dict) -> dict:
    data = json.loads(entry["payload"])
    kind = entry["kind"]
    if kind == "context":
        return {"objects": len(data["objects"]),
                "attributes": len(data["attributes"]),
                "density": round(sum(row.count("X") for row in data["rows"])
                                 / max(len(data["objects"])
                                       * len(data["attributes"]), 1), 4)}
    if kind == "lattice":
        return {"concepts": len(data["nodes"]),
                "covers": len(data["edges"]),
                "layers": data["layer_count"]}
    if kind == "tracks":
        return {"concepts": len(data["nodes"]),
                "tracks": len(data["trackList"]),
                "transitions": sum(len(t["steps"])
                                   for t in data["trackList"])}
    if kind == "esom":
        flat = [x for row in data["umatrix"] for x in row]
        return {"units": data["rows"] * data["cols"],
                "topology": data["topology"],
                "mean_distance": round(sum(flat) / len(flat), 6)}
    if kind == "hmm":
        return {"states": data["model"]["n_states"],
                "symbols": data["model"]["n_symbols"],
                "edges": len(data["graph"]["edges"])}
    if kind == "report":
        return {"terms": len(data["term_frequencies"])}
    if kind == "bundle":
        return {"artifacts": len(data["artifacts"])}
    return {}

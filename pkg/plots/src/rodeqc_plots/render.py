"""Render rode-qctl CSV artifacts into figures.

Three figure kinds are supported:

* ``violin`` -- paired error distributions (noise-blind vs noise-aware)
  from ``fig2_errors.csv``, with dashed lines at the per-mode means;
* ``sweep``  -- mean error against the signal-to-noise ratio from
  ``fig3_sweep.csv`` (aware: orange circles, blind: blue triangles);
* ``bloch``  -- state-trajectory bundles on the Bloch sphere from
  ``states.csv`` (Bloch coordinates are computed here, not upstream).

The renderer never alters numbers: alongside each image it writes a sidecar
JSON whose summary statistics are plain aggregations of the parsed CSV.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

KINDS = ("violin", "sweep", "bloch")

_SCHEMAS = {
    "violin": ["control_index", "mode", "sample_index", "err_op", "err_fro"],
    "sweep": ["eta", "mode", "mean_err_op", "ci_lo", "ci_hi"],
    "bloch": ["t", "sample_index", "re_a0", "im_a0", "re_a1", "im_a1"],
}


class SchemaError(ValueError):
    """CSV header or contents do not match the declared schema."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input_csv: str
    output_image: str
    title: str | None = None
    show_means: bool = True
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}, expected {KINDS}")


def _read_rows(spec: FigureSpec) -> list[dict]:
    expected = _SCHEMAS[spec.kind]
    try:
        with open(spec.input_csv, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            if header != expected:
                missing = [c for c in expected if c not in header]
                extra = [c for c in header if c not in expected]
                raise SchemaError(
                    f"{spec.input_csv}: header mismatch for kind {spec.kind!r} "
                    f"(missing columns: {missing or 'none'}, "
                    f"unexpected columns: {extra or 'none'})"
                )
            rows = list(reader)
    except OSError as exc:
        raise SchemaError(f"cannot read {spec.input_csv}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{spec.input_csv}: zero data rows")
    return rows


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _render_violin(spec: FigureSpec, rows: list[dict]) -> dict:
    by_mode: dict[str, list[float]] = {}
    for row in rows:
        by_mode.setdefault(row["mode"], []).append(float(row["err_op"]))
    modes = [m for m in ("blind", "aware") if m in by_mode]
    modes += sorted(set(by_mode) - set(modes))
    if not modes:
        raise SchemaError(f"{spec.input_csv}: no mode column values")

    fig, ax = plt.subplots(figsize=(6, 4.5))
    parts = ax.violinplot(
        [by_mode[m] for m in modes], showmeans=False, showextrema=True
    )
    for body in parts["bodies"]:
        body.set_alpha(0.6)
    if spec.show_means:
        for i, m in enumerate(modes):
            ax.hlines(
                _mean(by_mode[m]), i + 0.75, i + 1.25,
                linestyles="dashed", colors="black",
            )
    ax.set_xticks(range(1, len(modes) + 1), modes)
    ax.set_ylabel("operator-norm error at horizon")
    ax.set_title(spec.title or "noise-aware vs noise-blind control error")
    fig.tight_layout()
    fig.savefig(spec.output_image, dpi=150)
    plt.close(fig)

    return {
        "modes": {
            m: {"mean": _mean(by_mode[m]), "n": len(by_mode[m])} for m in modes
        }
    }


def _render_sweep(spec: FigureSpec, rows: list[dict]) -> dict:
    series: dict[str, list[tuple[float, float, float, float]]] = {}
    for row in rows:
        series.setdefault(row["mode"], []).append(
            (
                float(row["eta"]),
                float(row["mean_err_op"]),
                float(row["ci_lo"]),
                float(row["ci_hi"]),
            )
        )
    styles = {
        "aware": {"color": "tab:orange", "marker": "o"},
        "blind": {"color": "tab:blue", "marker": "^"},
    }
    fig, ax = plt.subplots(figsize=(6, 4.5))
    out: dict[str, dict] = {}
    for mode, pts in series.items():
        pts = sorted(pts)
        etas = [p[0] for p in pts]
        means = [p[1] for p in pts]
        los = [p[1] - p[2] for p in pts]
        his = [p[3] - p[1] for p in pts]
        style = styles.get(mode, {"marker": "s"})
        ax.errorbar(
            etas, means, yerr=[los, his], label=mode, linestyle="-",
            capsize=2, **style,
        )
        out[mode] = {"eta": etas, "mean_err_op": means, "mean": _mean(means)}
    ax.set_xlabel("signal-to-noise ratio")
    ax.set_ylabel("mean operator-norm error")
    ax.legend()
    ax.set_title(spec.title or "error against signal-to-noise ratio")
    fig.tight_layout()
    fig.savefig(spec.output_image, dpi=150)
    plt.close(fig)
    return {"series": out}


def _bloch_coordinates(rows: list[dict]) -> dict[int, list[tuple[float, float, float]]]:
    curves: dict[int, list[tuple[float, float, float, float]]] = {}
    for row in rows:
        a0 = complex(float(row["re_a0"]), float(row["im_a0"]))
        a1 = complex(float(row["re_a1"]), float(row["im_a1"]))
        z = a0.conjugate() * a1
        point = (
            float(row["t"]),
            2.0 * z.real,
            2.0 * z.imag,
            abs(a0) ** 2 - abs(a1) ** 2,
        )
        curves.setdefault(int(row["sample_index"]), []).append(point)
    return {
        idx: [(x, y, zc) for _, x, y, zc in sorted(pts)]
        for idx, pts in sorted(curves.items())
    }


def _render_bloch(spec: FigureSpec, rows: list[dict]) -> dict:
    curves = _bloch_coordinates(rows)
    fig = plt.figure(figsize=(5.5, 5.5))
    ax = fig.add_subplot(projection="3d")
    import numpy as np

    u = np.linspace(0, 2 * np.pi, 24)
    v = np.linspace(0, np.pi, 12)
    ax.plot_wireframe(
        np.outer(np.cos(u), np.sin(v)),
        np.outer(np.sin(u), np.sin(v)),
        np.outer(np.ones_like(u), np.cos(v)),
        color="lightgray", linewidth=0.4,
    )
    radius_err = 0.0
    for idx, pts in curves.items():
        xs, ys, zs = zip(*pts)
        ax.plot(xs, ys, zs, linewidth=1.0)
        for x, y, zc in pts:
            radius_err = max(radius_err, abs((x * x + y * y + zc * zc) ** 0.5 - 1.0))
    ax.set_box_aspect((1, 1, 1))
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    ax.set_title(spec.title or "state trajectories on the Bloch sphere")
    fig.tight_layout()
    fig.savefig(spec.output_image, dpi=150)
    plt.close(fig)
    return {
        "n_trajectories": len(curves),
        "n_points": sum(len(p) for p in curves.values()),
        "max_radius_deviation": radius_err,
    }


_RENDERERS = {
    "violin": _render_violin,
    "sweep": _render_sweep,
    "bloch": _render_bloch,
}


def render(spec: FigureSpec) -> dict:
    """Render the figure and write the sidecar JSON next to the image.

    Returns the sidecar payload (also written to ``<output>.stats.json``).
    """
    rows = _read_rows(spec)
    stats = _RENDERERS[spec.kind](spec, rows)
    payload = {
        "kind": spec.kind,
        "input_csv": spec.input_csv,
        "rows": len(rows),
        **stats,
    }
    with open(spec.output_image + ".stats.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return payload

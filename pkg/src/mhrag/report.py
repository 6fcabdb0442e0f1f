"""Reporting over evaluation results.

The results CSV is the single source of truth; aggregates and plots are
renderings of it, never a second computation path. Plotting needs
matplotlib and is therefore optional and flag-gated in the CLI.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .evaluation import AggregateRow, EvalResult, aggregate, aggregates_csv, read_results_csv


def build_aggregates(results_path: str | Path) -> list[AggregateRow]:
    return aggregate(read_results_csv(results_path))


def write_aggregates(results_path: str | Path, out_path: str | Path) -> int:
    rows = build_aggregates(results_path)
    Path(out_path).write_text(aggregates_csv(rows), encoding="utf-8")
    return len(rows)


def _metric_values(rows: Sequence[EvalResult], tag: str, aspects: int, k: int, metric: str) -> list[float]:
    return [getattr(r, metric) for r in rows if r.strategy_tag == tag and r.aspects == aspects and r.k == k]


def write_plots(
    results_path: str | Path,
    out_dir: str | Path,
    metric: str = "xi_w",
    baseline: str = "standard",
) -> list[Path]:
    """Boxplots per aspect count plus relative-improvement curves.

    One boxplot figure per aspect count shows the metric distribution over
    queries for every (strategy, k); one extra figure charts each
    strategy's mean improvement over the baseline strategy per k.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_results_csv(results_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tags = sorted({r.strategy_tag for r in rows})
    aspect_counts = sorted({r.aspects for r in rows})
    k_values = sorted({r.k for r in rows})
    written: list[Path] = []

    for aspects in aspect_counts:
        fig, axes = plt.subplots(1, len(tags), figsize=(4 * len(tags), 3.2), sharey=True)
        if len(tags) == 1:
            axes = [axes]
        for ax, tag in zip(axes, tags):
            data = [_metric_values(rows, tag, aspects, k, metric) for k in k_values]
            ax.boxplot(data, tick_labels=[str(k) for k in k_values])
            ax.set_title(tag)
            ax.set_xlabel("documents fetched")
        axes[0].set_ylabel(metric)
        fig.suptitle(f"{metric} distribution, {aspects} aspects")
        fig.tight_layout()
        path = out_dir / f"box_aspects{aspects}_{metric}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    others = [t for t in tags if t != baseline]
    if baseline in tags and others:
        fig, axes = plt.subplots(
            1, len(aspect_counts), figsize=(3.2 * len(aspect_counts), 3.2), sharey=True
        )
        if len(aspect_counts) == 1:
            axes = [axes]
        for ax, aspects in zip(axes, aspect_counts):
            for tag in others:
                rel = []
                for k in k_values:
                    base_vals = _metric_values(rows, baseline, aspects, k, metric)
                    tag_vals = _metric_values(rows, tag, aspects, k, metric)
                    base_mean = sum(base_vals) / len(base_vals) if base_vals else 0.0
                    tag_mean = sum(tag_vals) / len(tag_vals) if tag_vals else 0.0
                    rel.append(
                        100.0 * (tag_mean - base_mean) / base_mean if base_mean else 0.0
                    )
                ax.plot(k_values, rel, marker="o", label=tag)
            ax.axhline(0.0, color="gray", linewidth=0.8)
            ax.set_title(f"{aspects} aspects")
            ax.set_xlabel("documents fetched")
        axes[0].set_ylabel(f"mean {metric} improvement over {baseline} [%]")
        axes[-1].legend()
        fig.tight_layout()
        path = out_dir / f"relative_{metric}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written

"""PNG figures rendered next to bench reports."""

from __future__ import annotations

from . import harness

_VERDICT_KINDS = ("Valid", "Invalid", "UnknownParse", "UnknownBound")


def render_figures(summary: harness.RunSummary, out_base: str) -> list[str]:
    """Write <out_base>_verdicts.png and <out_base>_metrics.png."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths: list[str] = []

    counts = {k: 0 for k in _VERDICT_KINDS}
    for _, kind in summary.verdicts:
        counts[kind] += 1
    labels = list(_VERDICT_KINDS) + ["Errored"]
    values = [counts[k] for k in _VERDICT_KINDS] + [len(summary.errored)]
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    ax.bar(labels, values, color="#4878a8")
    ax.set_ylabel("cases")
    ax.set_title(f"Verdicts ({summary.mode}, policy={summary.policy})")
    plt.setp(ax.get_xticklabels(), rotation=20, ha="right")
    fig.tight_layout()
    path = out_base + "_verdicts.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)

    r = summary.report
    metric_values = [
        ("Accuracy", r.accuracy),
        ("Precision", r.precision),
        ("Recall", r.recall),
        ("F1", r.f1),
    ]
    present = [(n, v) for n, v in metric_values if v is not None]
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    if present:
        ax.bar([n for n, _ in present], [v for _, v in present], color="#5a9a68")
    ax.set_ylim(0, 100)
    ax.set_ylabel("percent")
    ax.set_title(f"Metrics ({summary.mode}, policy={summary.policy})")
    fig.tight_layout()
    path = out_base + "_metrics.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)
    return paths

"""Line charts for evaluation reports and training logs."""

import csv
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_report(report_json_path, out_path) -> None:
    """BLER vs Eb/sigma^2, one curve per list-prefix size."""
    with open(report_json_path) as fh:
        report = json.load(fh)
    by_prefix = {}
    for row in report["rows"]:
        by_prefix.setdefault(row["prefix_L"], []).append((row["eb_db"], row["bler"]))
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for prefix in sorted(by_prefix):
        pts = sorted(by_prefix[prefix])
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"L'={prefix}")
    ax.set_xlabel(r"$E_b/\sigma^2$ (dB)")
    ax.set_ylabel("BLER")
    ax.set_title(f"{report['mode']} decoding, rate {report['rate']:.4g}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_training_log(log_csv_path, out_path) -> None:
    """Train/test loss trajectories over epochs (decoder-phase rows)."""
    epochs, train_loss, test_loss = [], [], []
    with open(log_csv_path) as fh:
        for row in csv.DictReader(fh):
            if row["phase"] != "dec":
                continue
            epochs.append(int(row["epoch"]))
            train_loss.append(float(row["train_loss"]))
            test_loss.append(float(row["test_loss"]))
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.semilogy(epochs, train_loss, label="train loss (dec phase)")
    ax.semilogy(epochs, test_loss, label="test loss")
    ax.set_xlabel("epoch")
    ax.set_ylabel("min-over-list BCE")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)

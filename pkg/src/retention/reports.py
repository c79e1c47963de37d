"""Report rendering: matplotlib figures plus the delimited/JSON artifacts
each CLI subcommand writes next to them.

All JSON artifacts are serialized with sorted keys so that reruns with the
same seed are byte-identical.
"""

from __future__ import annotations

import csv
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .planner import EpisodeRecord, Plan


def write_json(payload: dict, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_plan_csv(plan: Plan, path):
    """Delimited per-step view: step, action, state before, state after."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "action", "state_before", "state_after"])
        for i, (name, (before, after)) in enumerate(zip(plan.actions, plan.trajectory), 1):
            writer.writerow([i, name, repr(before), repr(after)])


def write_episode_log(records: list[EpisodeRecord], path):
    """Append-friendly line-delimited training log."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["episode", "steps", "final_state"])
        for r in records:
            writer.writerow([r.episode, r.steps, repr(r.final_state)])


def save_loss_figure(epoch_losses: list[float], path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(range(1, len(epoch_losses) + 1, 1), epoch_losses, lw=1.2)
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    ax.set_title("Cross-entropy over training")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_confusion_figure(confusion: np.ndarray, path):
    labels = ["leave", "stay"]
    fig, ax = plt.subplots(figsize=(4.5, 4))
    ax.imshow(confusion, cmap="Blues")
    for i in range(2):
        for j in range(2):
            ax.text(j, i, str(int(confusion[i, j])), ha="center", va="center")
    ax.set_xticks([0, 1], labels)
    ax.set_yticks([0, 1], labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("actual")
    ax.set_title("Confusion matrix")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trajectory_figure(plan: Plan, start_state: float, target: float, path):
    states = [start_state] + [after for _, after in plan.trajectory]
    fig, ax = plt.subplots(figsize=(6.5, 4))
    ax.step(range(len(states)), states, where="post", marker="o", ms=3, lw=1.2)
    ax.axhline(target, color="tab:red", ls="--", lw=1, label=f"target {target:.2f}")
    ax.set_xlabel("actions applied")
    ax.set_ylabel("stay probability")
    ax.set_ylim(0, 1)
    ax.legend(loc="lower right")
    ax.set_title("Plan trajectory")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_episode_figure(records: list[EpisodeRecord], path):
    fig, ax = plt.subplots(figsize=(6.5, 4))
    ax.plot([r.episode for r in records], [r.steps for r in records], lw=1.0)
    ax.set_xlabel("episode")
    ax.set_ylabel("steps to target")
    ax.set_title("Planner training progress")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def format_plan_table(plan: Plan, start_state: float, target: float) -> str:
    """Human-readable plan report."""
    lines = [
        f"initial stay probability : {start_state:.4f}",
        f"target stay probability  : {target:.4f}",
    ]
    if plan.actions:
        width = max(len(a) for a in plan.actions)
        for i, (name, (before, after)) in enumerate(zip(plan.actions, plan.trajectory), 1):
            lines.append(f"  {i:>3}. {name:<{width}}  {before:.4f} -> {after:.4f}")
    else:
        lines.append("  (no actions needed)")
    lines.append(f"actions    : {len(plan)}")
    lines.append(f"total cost : {plan.total_cost:g}")
    lines.append(f"reached    : {'yes' if plan.reached else 'no'}")
    return "\n".join(lines)

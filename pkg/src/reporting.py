import csv
from typing import Iterable, Sequence

from learner import StepReport
from sequences import AccuracySeries, SweepCell

ACCURACY_HEADER = (
    "step",
    "input",
    "predicted",
    "correct",
    "burst",
    "window_accuracy",
    "new_links",
    "evicted_links",
)
SWEEP_HEADER = ("m", "k", "final_accuracy", "ceiling")


def _open(path):
    return open(path, "w", newline="", encoding="utf-8")


def write_accuracy_csv(reports: Sequence[StepReport], series: AccuracySeries, path) -> None:
    """
    One row per step. ``predicted`` is empty when the model abstained and
    ``window_accuracy`` is empty until the window has filled.
    """
    by_step = dict(series.points)
    with _open(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(ACCURACY_HEADER)
        for report in reports:
            accuracy = by_step.get(report.step_index)
            writer.writerow(
                [
                    report.step_index,
                    report.input,
                    report.predicted or "",
                    int(report.correct),
                    int(report.burst),
                    "" if accuracy is None else f"{accuracy:.6f}",
                    report.new_links,
                    report.evicted_links,
                ]
            )


def write_sweep_csv(cells: Iterable[SweepCell], path) -> None:
    with _open(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for cell in cells:
            writer.writerow([cell.m, cell.k, f"{cell.final_accuracy:.6f}", f"{cell.ceiling:.6f}"])


def write_dot(text: str, path) -> None:
    with _open(path) as f:
        f.write(text)

"""Per-phrase IoU, recall-vs-threshold curves, and Average Recall reporting.

Average Recall (AR) is the trapezoidal area under the recall curve computed
over an IoU threshold grid (default 0.00..1.00 step 0.01, with a `>=`
comparison), reported as a percentage.  Reports carry five splits: overall,
singular, plural, thing, stuff; a split with no members reports AR as
absent, never zero.
"""

import json
from dataclasses import dataclass

import numpy as np

SPLITS = ("overall", "singular", "plural", "thing", "stuff")


@dataclass(frozen=True)
class EvalRecord:
    phrase_id: str
    iou: float
    is_plural: bool
    is_thing: bool


@dataclass(frozen=True)
class EvalReport:
    average_recall: dict  # split -> percentage or None
    counts: dict  # split -> number of records
    grid_step: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "grid_step": self.grid_step,
                "average_recall": {s: self.average_recall[s] for s in SPLITS},
                "counts": {s: self.counts[s] for s in SPLITS},
            },
            indent=2,
        )

    def to_table(self) -> str:
        """Aligned plain-text table, one column per split."""
        header = [s.capitalize() for s in SPLITS]
        ar_row = [
            "-" if self.average_recall[s] is None else f"{self.average_recall[s]:.2f}"
            for s in SPLITS
        ]
        n_row = [str(self.counts[s]) for s in SPLITS]
        widths = [max(len(a), len(b), len(c)) for a, b, c in zip(header, ar_row, n_row)]
        fmt = lambda row: "  ".join(v.rjust(w) for v, w in zip(row, widths))
        lines = [
            f"Average Recall (%) over IoU grid step {self.grid_step}",
            fmt(header),
            fmt(ar_row),
            fmt(n_row) + "  (phrase counts)",
        ]
        return "\n".join(lines)


def iou(a, b) -> float:
    """Intersection over union of two binary masks; 0 when both are empty."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"resolution mismatch: {a.shape} vs {b.shape}")
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 0.0
    return int(np.count_nonzero(a & b)) / union


def threshold_grid(step=0.01) -> np.ndarray:
    """Ascending IoU thresholds 0..1 inclusive at the given step."""
    if not 0.0 < step <= 1.0:
        raise ValueError(f"grid step must be in (0, 1], got {step}")
    n = int(round(1.0 / step))
    return np.arange(n + 1) / n


def recall_curve(records, thresholds):
    """Recall at each threshold: fraction of records with IoU >= t."""
    if len(records) == 0:
        raise ValueError("recall_curve: no records")
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if (np.diff(thresholds) < 0).any():
        raise ValueError("recall_curve: thresholds must be sorted ascending")
    ious = np.array([r.iou for r in records], dtype=np.float64)
    return [(float(t), float(np.mean(ious >= t))) for t in thresholds]


def average_recall(curve) -> float:
    """Trapezoidal area under a recall curve, as a percentage."""
    if len(curve) < 2:
        raise ValueError("average_recall: need at least two curve points")
    ts = np.array([t for t, _ in curve])
    rs = np.array([r for _, r in curve])
    return float(np.trapezoid(rs, ts) * 100.0)


def build_report(records, grid_step=0.01) -> EvalReport:
    """Per-split Average Recall over the default threshold grid."""
    if len(records) == 0:
        raise ValueError("build_report: no records")
    grid = threshold_grid(grid_step)
    subsets = {
        "overall": list(records),
        "singular": [r for r in records if not r.is_plural],
        "plural": [r for r in records if r.is_plural],
        "thing": [r for r in records if r.is_thing],
        "stuff": [r for r in records if not r.is_thing],
    }
    ar = {
        split: (average_recall(recall_curve(rs, grid)) if rs else None)
        for split, rs in subsets.items()
    }
    counts = {split: len(rs) for split, rs in subsets.items()}
    return EvalReport(average_recall=ar, counts=counts, grid_step=grid_step)

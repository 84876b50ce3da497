"""Unsupervised spike-count labelling and order-weighted inference.

Labels never influence learning; they are attached afterwards. During the
training pass each population's spikes are counted per true label, and the
population is assigned the label it spiked most for. At inference the
sample's spikes are ranked by arrival and each contributes a decaying
weight (1/rank by default) to its population's label score.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

UNASSIGNED = -1

RankWeight = Callable[[int], float]


def harmonic_weight(rank: int) -> float:
    """Default order weighting: the r-th arriving spike counts 1/r."""
    return 1.0 / rank


@dataclass
class SpikeCountTable:
    """Per-(population, label) spike counts accumulated during training."""

    labels: tuple[int, ...]
    counts: np.ndarray = field(init=False)
    n_populations: int = 0

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels) or not self.labels:
            raise ValueError(f"labels must be unique and non-empty, got {self.labels}")
        self.counts = np.zeros((self.n_populations, len(self.labels)), dtype=np.int64)

    def record(self, populations: np.ndarray, label: int) -> None:
        """Add one sample's spike populations under its true label."""
        col = self.labels.index(label)
        np.add.at(self.counts[:, col], populations, 1)


@dataclass(frozen=True)
class LabelMap:
    """Label per population; UNASSIGNED marks populations that never spiked."""

    labels: tuple[int, ...]
    assignments: tuple[int, ...]

    def assigned_labels(self) -> list[int]:
        return sorted({a for a in self.assignments if a != UNASSIGNED})


def assign_labels(table: SpikeCountTable) -> LabelMap:
    """Give each population the label it spiked most for.

    Count ties break toward the lower label id; populations with all-zero
    rows are marked unassigned and excluded from inference.
    """
    if table.counts.size == 0:
        raise ValueError("empty spike-count table")
    order = np.argsort(table.labels)  # scan label columns in ascending label id
    assignments = []
    for row in table.counts:
        if not row.any():
            assignments.append(UNASSIGNED)
            continue
        best_label, best_count = None, -1
        for col in order:
            if row[col] > best_count:
                best_label, best_count = table.labels[col], int(row[col])
        assignments.append(best_label)
    return LabelMap(labels=table.labels, assignments=tuple(assignments))


def infer(
    spike_populations: Sequence[int],
    spike_steps: Sequence[int],
    label_map: LabelMap,
    rank_weight: RankWeight = harmonic_weight,
) -> int:
    """Predict a label from one sample's spike log.

    Spikes are ranked by arrival (ties within a step by population index);
    the r-th spike adds rank_weight(r) to its population's label score.
    Unassigned populations contribute nothing but still consume their
    rank. Score ties, and the empty log, resolve to the lowest assigned
    label id.
    """
    assigned = label_map.assigned_labels()
    if not assigned:
        raise ValueError("no assigned populations to infer from")
    order = sorted(range(len(spike_populations)), key=lambda i: (spike_steps[i], spike_populations[i]))
    scores = {label: 0.0 for label in assigned}
    for rank, i in enumerate(order, start=1):
        label = label_map.assignments[spike_populations[i]]
        if label != UNASSIGNED:
            scores[label] += rank_weight(rank)
    return max(assigned, key=lambda lbl: (scores[lbl], -lbl))


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary confusion totals."""

    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @classmethod
    def from_pairs(
        cls, true_labels: Sequence[int], predicted: Sequence[int], positive: int
    ) -> "ConfusionCounts":
        tp = tn = fp = fn = 0
        for t, p in zip(true_labels, predicted):
            if t == positive:
                if p == positive:
                    tp += 1
                else:
                    fn += 1
            else:
                if p == positive:
                    fp += 1
                else:
                    tn += 1
        return cls(tp, tn, fp, fn)


def accuracy(c: ConfusionCounts) -> float:
    """(TP + TN) / (TP + TN + FP + FN)."""
    total = c.tp + c.tn + c.fp + c.fn
    if total <= 0:
        raise ValueError("confusion counts are all zero")
    return (c.tp + c.tn) / total

"""Spike-count label assignment, order-weighted inference, and accuracy."""

import numpy as np
import pytest

from evspike.classifier import (
    ConfusionCounts,
    LabelMap,
    SpikeCountTable,
    UNASSIGNED,
    accuracy,
    assign_labels,
    infer,
)


def table_from(counts, labels=(0, 1)):
    counts = np.asarray(counts)
    t = SpikeCountTable(labels=labels, n_populations=counts.shape[0])
    t.counts[:] = counts
    return t


class TestAssignLabels:
    def test_argmax(self):
        m = assign_labels(table_from([[10, 3]]))
        assert m.assignments == (0,)

    def test_tie_breaks_to_lower_label(self):
        m = assign_labels(table_from([[4, 4]]))
        assert m.assignments == (0,)

    def test_all_zero_row_unassigned(self):
        m = assign_labels(table_from([[0, 0], [1, 5]]))
        assert m.assignments == (UNASSIGNED, 1)
        assert m.assigned_labels() == [1]

    def test_tie_break_respects_label_ids_not_columns(self):
        # columns ordered (9, 2): the tie must go to label 2, not column 0
        m = assign_labels(table_from([[7, 7]], labels=(9, 2)))
        assert m.assignments == (2,)

    def test_empty_table_rejected(self):
        with pytest.raises(ValueError):
            assign_labels(SpikeCountTable(labels=(0, 1), n_populations=0))

    def test_accumulation_order_invariant(self):
        rng = np.random.default_rng(0)
        spikes = [(int(rng.integers(4)), int(rng.integers(2))) for _ in range(300)]
        t1 = SpikeCountTable(labels=(0, 1), n_populations=4)
        t2 = SpikeCountTable(labels=(0, 1), n_populations=4)
        for pop, label in spikes:
            t1.record(np.array([pop]), label)
        for pop, label in reversed(spikes):
            t2.record(np.array([pop]), label)
        assert np.array_equal(t1.counts, t2.counts)
        assert assign_labels(t1) == assign_labels(t2)


class TestInfer:
    def map_of(self, assignments, labels=(0, 1)):
        return LabelMap(labels=labels, assignments=tuple(assignments))

    def test_single_spike(self):
        m = self.map_of([1, 0])
        assert infer([0], [0], m) == 1

    def test_harmonic_order_weighting(self):
        # A(label 0) then B(label 1) twice: 1 vs 1/2 + 1/3
        m = self.map_of([0, 1])
        assert infer([0, 1, 1], [0, 1, 2], m) == 0

    def test_empty_log_lowest_assigned(self):
        m = self.map_of([1, 0])
        assert infer([], [], m) == 0

    def test_unassigned_consumes_rank(self):
        # rank 1 goes to an unassigned population; label 1's first spike
        # lands at rank 2 with weight 1/2
        m = self.map_of([UNASSIGNED, 0, 1])
        assert infer([0, 2, 1], [0, 1, 2], m) == 1  # 1/2 > 1/3

    def test_ties_within_step_ordered_by_population(self):
        # same step: lower population index takes the earlier rank, so pop 0
        # (label 1) gets weight 1 and pop 1 (label 0) gets 1/2
        m = self.map_of([1, 0])
        assert infer([1, 0], [5, 5], m) == 1

    def test_rank_weight_scale_invariance(self):
        m = self.map_of([0, 1, 1])
        pops, steps = [1, 0, 2, 2], [0, 1, 2, 3]
        base = infer(pops, steps, m)
        scaled = infer(pops, steps, m, rank_weight=lambda r: 7.5 / r)
        assert base == scaled

    def test_no_assigned_populations(self):
        m = self.map_of([UNASSIGNED, UNASSIGNED])
        with pytest.raises(ValueError):
            infer([0], [0], m)

    def test_relabeling_symmetry(self):
        pops, steps = [0, 1, 1, 2, 0], [0, 0, 1, 2, 3]
        m = self.map_of([0, 1, 0])
        swapped = self.map_of([1, 0, 1], labels=(0, 1))
        p1 = infer(pops, steps, m)
        p2 = infer(pops, steps, swapped)
        assert p2 == 1 - p1


class TestAccuracy:
    def test_perfect(self):
        assert accuracy(ConfusionCounts(tp=5, tn=5, fp=0, fn=0)) == 1.0

    def test_half(self):
        assert accuracy(ConfusionCounts(tp=3, tn=2, fp=1, fn=4)) == 0.5

    def test_zero(self):
        assert accuracy(ConfusionCounts(tp=0, tn=0, fp=7, fn=3)) == 0.0

    def test_empty_counts_rejected(self):
        with pytest.raises(ValueError):
            accuracy(ConfusionCounts())

    def test_bounds_random(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            tp, tn, fp, fn = (int(v) for v in rng.integers(0, 20, 4))
            if tp + tn + fp + fn == 0:
                continue
            a = accuracy(ConfusionCounts(tp, tn, fp, fn))
            assert 0.0 <= a <= 1.0

    def test_from_pairs_and_swap_symmetry(self):
        true_labels = [0, 0, 1, 1, 0, 1]
        predicted = [0, 1, 1, 0, 0, 1]
        c = ConfusionCounts.from_pairs(true_labels, predicted, positive=0)
        assert (c.tp, c.tn, c.fp, c.fn) == (2, 2, 1, 1)
        swapped = ConfusionCounts.from_pairs(
            [1 - t for t in true_labels], [1 - p for p in predicted], positive=1
        )
        assert accuracy(c) == accuracy(swapped)

import math

import numpy as np
import pytest
import torch

from listae.loss import batch_list_loss, bce_avg, list_loss

from oracles import bce_oracle, list_loss_oracle


class TestBceAvg:
    def test_uniform_probability_gives_ln2(self):
        value = bce_avg(np.array([0.5, 0.5]), np.array([1, 0]))
        assert float(value) == pytest.approx(math.log(2), rel=1e-12)

    def test_perfect_prediction_is_clamped_near_zero(self):
        u = np.array([1, 0, 1, 1, 0])
        assert float(bce_avg(u.astype(float), u)) <= 1e-11

    def test_matches_naive_summation_oracle(self, rng):
        for _ in range(300):
            k = int(rng.integers(2, 64))
            candidate = rng.uniform(1e-6, 1 - 1e-6, size=k)
            target = rng.integers(0, 2, size=k)
            expected = bce_oracle(candidate, target)
            assert float(bce_avg(candidate, target)) == pytest.approx(expected, abs=1e-9)

    def test_nonnegative(self, rng):
        for _ in range(50):
            c = rng.uniform(0, 1, size=16)
            t = rng.integers(0, 2, size=16)
            assert float(bce_avg(c, t)) >= 0.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            bce_avg(np.array([0.5, 0.5]), np.array([1]))


class TestListLoss:
    def test_picks_minimum_row_and_index(self, rng):
        target = rng.integers(0, 2, size=12)
        rows = np.stack([
            np.full(12, 0.5),                         # ln 2
            np.clip(target + (1 - 2 * target) * 0.02, 0, 1),  # near-perfect
            rng.uniform(0.3, 0.7, size=12),
        ])
        value, idx = list_loss(rows, target)
        assert idx == 1
        assert float(value) == pytest.approx(
            float(bce_avg(rows[1], target)), rel=1e-12
        )

    def test_duplicated_rows_leave_loss_unchanged(self, rng):
        row = rng.uniform(0.1, 0.9, size=10)
        target = rng.integers(0, 2, size=10)
        single = list_loss(row[None, :], target)
        duped = list_loss(np.stack([row, row, row]), target)
        assert float(single.value) == float(duped.value)

    def test_single_row_equals_plain_bce(self, rng):
        row = rng.uniform(0.1, 0.9, size=10)
        target = rng.integers(0, 2, size=10)
        assert float(list_loss(row[None, :], target).value) == pytest.approx(
            float(bce_avg(row, target)), rel=1e-12
        )

    def test_matches_min_of_means_oracle(self, rng):
        for _ in range(200):
            l, k = int(rng.integers(1, 9)), int(rng.integers(2, 33))
            cands = rng.uniform(1e-4, 1 - 1e-4, size=(l, k))
            target = rng.integers(0, 2, size=k)
            expect_val, expect_idx = list_loss_oracle(cands.tolist(), target.tolist())
            got = list_loss(cands, target)
            assert float(got.value) == pytest.approx(expect_val, abs=1e-9)
            assert got.argmin == expect_idx

    def test_appending_rows_never_increases_loss(self, rng):
        for _ in range(200):
            l, k = int(rng.integers(1, 6)), int(rng.integers(2, 17))
            cands = rng.uniform(1e-4, 1 - 1e-4, size=(l, k))
            target = rng.integers(0, 2, size=k)
            before = float(list_loss(cands, target).value)
            extra = rng.uniform(1e-4, 1 - 1e-4, size=(1, k))
            after = float(list_loss(np.vstack([cands, extra]), target).value)
            assert after <= before

    def test_row_permutation_invariance(self, rng):
        cands = rng.uniform(0.05, 0.95, size=(5, 9))
        target = rng.integers(0, 2, size=9)
        base = float(list_loss(cands, target).value)
        for _ in range(5):
            perm = rng.permutation(5)
            assert float(list_loss(cands[perm], target).value) == pytest.approx(base, rel=1e-15)

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            list_loss(np.zeros((0, 4)), np.zeros(4, dtype=int))

    def test_gradient_flows_only_through_argmin_row(self, rng):
        cands = torch.tensor(rng.uniform(0.2, 0.8, size=(3, 8)), requires_grad=True)
        target = rng.integers(0, 2, size=8)
        value, idx = list_loss(cands, target)
        value.backward()
        grad = cands.grad.numpy()
        for row in range(3):
            if row == idx:
                assert np.abs(grad[row]).max() > 0
            else:
                assert np.abs(grad[row]).max() == 0.0

    def test_non_argmin_perturbation_changes_nothing(self, rng):
        # Finite-difference probe at a non-tie point.
        cands = rng.uniform(0.2, 0.8, size=(4, 8))
        target = rng.integers(0, 2, size=8)
        value, idx = list_loss(cands, target)
        other = (idx + 1) % 4
        bumped = cands.copy()
        bumped[other, 3] += 1e-6
        assert float(list_loss(bumped, target).value) == float(value)


class TestBatchListLoss:
    def test_identical_examples_equal_single(self, rng):
        cands = rng.uniform(0.1, 0.9, size=(1, 3, 10))
        target = rng.integers(0, 2, size=(1, 10))
        single = float(list_loss(cands[0], target[0]).value)
        batch = np.repeat(cands, 5, axis=0)
        targets = np.repeat(target, 5, axis=0)
        assert float(batch_list_loss(batch, targets)) == pytest.approx(single, rel=1e-15)

    def test_two_examples_average(self, rng):
        cands = rng.uniform(0.1, 0.9, size=(2, 3, 10))
        targets = rng.integers(0, 2, size=(2, 10))
        a = float(list_loss(cands[0], targets[0]).value)
        b = float(list_loss(cands[1], targets[1]).value)
        assert float(batch_list_loss(cands, targets)) == pytest.approx((a + b) / 2, rel=1e-12)

    def test_matches_example_loop_oracle(self, rng):
        for _ in range(50):
            b, l, k = int(rng.integers(1, 5)), int(rng.integers(1, 5)), int(rng.integers(2, 17))
            cands = rng.uniform(1e-4, 1 - 1e-4, size=(b, l, k))
            targets = rng.integers(0, 2, size=(b, k))
            expected = np.mean([
                list_loss_oracle(cands[i].tolist(), targets[i].tolist())[0]
                for i in range(b)
            ])
            assert float(batch_list_loss(cands, targets)) == pytest.approx(expected, abs=1e-9)

    def test_batch_mismatch_rejected(self, rng):
        with pytest.raises(ValueError):
            batch_list_loss(np.zeros((2, 2, 4)) + 0.5, np.zeros((3, 4), dtype=int))

    def test_gradient_matches_finite_differences(self, rng):
        cands = rng.uniform(0.15, 0.85, size=(3, 4, 6))
        targets = rng.integers(0, 2, size=(3, 6))
        t = torch.tensor(cands, requires_grad=True)
        loss = batch_list_loss(t, targets)
        loss.backward()
        h = 1e-7
        for _ in range(20):
            b, l, k = (int(rng.integers(s)) for s in cands.shape)
            up, down = cands.copy(), cands.copy()
            up[b, l, k] += h
            down[b, l, k] -= h
            fd = (float(batch_list_loss(up, targets)) - float(batch_list_loss(down, targets))) / (2 * h)
            an = float(t.grad[b, l, k])
            assert an == pytest.approx(fd, rel=1e-4, abs=1e-10)

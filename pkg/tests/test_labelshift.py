import numpy as np
import pytest

from netchoice.labelshift import (
    ConfusionJoint,
    IllConditionedError,
    bbse_weights,
    confusion_from_holdout,
    corrected_priors,
    estimate_shift,
    fold_proportion,
)


class TestConfusion:
    def test_perfect_balanced_binary(self):
        preds = [1] * 50 + [2] * 50
        labels = [1] * 50 + [2] * 50
        joint = confusion_from_holdout(preds, labels)
        assert np.allclose(joint.matrix, np.diag([0.5, 0.5]))
        assert joint.n_holdout == 100

    def test_always_predict_first_class(self):
        preds = [1] * 100
        labels = [1] * 60 + [2] * 40
        joint = confusion_from_holdout(preds, labels, classes=(1, 2))
        assert np.allclose(joint.matrix[0], [0.6, 0.4])
        assert np.allclose(joint.matrix[1], [0.0, 0.0])

    def test_tally_oracle(self):
        rng = np.random.default_rng(0)
        preds = rng.integers(0, 3, size=500)
        labels = rng.integers(0, 3, size=500)
        joint = confusion_from_holdout(preds.tolist(), labels.tolist())
        for i in range(3):
            for j in range(3):
                expected = np.mean((preds == i) & (labels == j))
                assert joint.matrix[i, j] == pytest.approx(expected)
        assert joint.matrix.sum() == pytest.approx(1.0, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion_from_holdout([1], [1, 2])

    def test_invalid_matrix_rejected(self):
        with pytest.raises(ValueError):
            ConfusionJoint(matrix=np.array([[0.5, 0.1], [0.1, 0.1]]), classes=(0, 1), n_holdout=10)


class TestWeights:
    def test_diagonal_solve(self):
        C = np.diag([0.7, 0.3])
        mu = np.array([0.2, 0.8])
        w = bbse_weights(C, mu)
        assert np.allclose(w, mu / np.array([0.7, 0.3]))

    def test_hand_solved_2x2(self):
        C = np.array([[0.4, 0.1], [0.1, 0.4]])
        mu = np.array([0.35, 0.65])
        w = bbse_weights(C, mu)
        assert np.allclose(w, [0.5, 1.5], atol=1e-12)
        q = corrected_priors(w, C)
        assert np.allclose(q, [0.25, 0.75], atol=1e-12)

    def test_singular_rejected(self):
        C = np.array([[0.5, 0.5], [0.0, 0.0]])
        with pytest.raises(IllConditionedError):
            bbse_weights(C, np.array([0.5, 0.5]))

    def test_condition_threshold_reported(self):
        C = np.array([[0.5, 0.5 - 1e-12], [0.5, 0.5]])
        with pytest.raises(IllConditionedError) as err:
            bbse_weights(C, np.array([0.5, 0.5]))
        assert err.value.condition_number > 1e8


class TestCorrectedPriors:
    def test_unit_weights_give_source_marginals(self):
        C = np.array([[0.4, 0.1], [0.1, 0.4]])
        q = corrected_priors(np.ones(2), C)
        assert np.allclose(q, [0.5, 0.5])

    def test_negative_entry_clipped_and_renormalized(self):
        C = np.array([[0.4, 0.1], [0.1, 0.4]])
        q = corrected_priors(np.array([-0.01, 2.01]), C)
        assert q[0] == 0.0
        assert q.sum() == pytest.approx(1.0, abs=0)
        assert np.all(q >= 0)

    def test_perfect_classifier_recovers_marginal(self):
        C = np.diag([0.3, 0.7])
        mu = np.array([0.6, 0.4])
        joint = ConfusionJoint(matrix=C, classes=(0, 1), n_holdout=100)
        estimate = estimate_shift(joint, mu)
        assert np.allclose(estimate.corrected, mu, atol=1e-12)

    def test_no_shift_gives_unit_weights(self):
        C = np.array([[0.35, 0.05], [0.15, 0.45]])
        mu = C.sum(axis=1)  # prediction marginal under the source distribution
        w = bbse_weights(C, mu)
        assert np.allclose(w, 1.0, atol=1e-10)


class TestEndToEnd:
    def test_synthetic_shift_recovery(self):
        rng = np.random.default_rng(42)
        n = 10_000
        accuracy = 0.9
        # Source: balanced labels, classifier flips with probability 0.1.
        labels = rng.integers(0, 2, size=n)
        flips = rng.uniform(size=n) >= accuracy
        preds = np.where(flips, 1 - labels, labels)
        joint = confusion_from_holdout(preds.tolist(), labels.tolist(), classes=(0, 1))
        # Target: prior (0.2, 0.8), same classifier.
        target_labels = (rng.uniform(size=n) < 0.8).astype(int)
        target_flips = rng.uniform(size=n) >= accuracy
        target_preds = np.where(target_flips, 1 - target_labels, target_labels)
        mu = np.array([(target_preds == 0).mean(), (target_preds == 1).mean()])
        estimate = estimate_shift(joint, mu)
        assert np.abs(estimate.corrected - np.array([0.2, 0.8])).max() < 0.03

    def test_json_payload(self):
        C = np.array([[0.4, 0.1], [0.1, 0.4]])
        joint = ConfusionJoint(matrix=C, classes=("CG", "P"), n_holdout=50)
        estimate = estimate_shift(joint, np.array([0.35, 0.65]))
        payload = estimate.to_json_dict()
        assert payload["classes"] == ["CG", "P"]
        assert payload["corrected_priors"] == pytest.approx([0.25, 0.75], abs=1e-12)


class TestFoldProportion:
    def test_identical_folds(self):
        summary = fold_proportion([0.25] * 6)
        assert summary.mean == 0.25
        assert summary.sd == 0.0
        assert summary.se == 0.0

    def test_two_fold_hand_arithmetic(self):
        summary = fold_proportion([0.2, 0.3])
        assert summary.mean == pytest.approx(0.25)
        assert summary.sd == pytest.approx(0.07071067811865477, abs=1e-12)
        assert summary.se == pytest.approx(0.05, abs=1e-12)

    def test_single_fold_rejected(self):
        with pytest.raises(ValueError):
            fold_proportion([0.5])

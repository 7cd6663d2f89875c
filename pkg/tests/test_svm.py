import numpy as np
import pytest
from sklearn.metrics.pairwise import rbf_kernel as rbf_gram
from sklearn.svm import SVC

from src.errors import ConfigurationError, TrainingError
from src.model import (
    BinaryMachine,
    SvmModel,
    decision_values,
    dual_objective,
    load_svm,
    rbf_kernel,
    save_svm,
    smo_solve,
    svm_predict,
    train_svm,
)
from src.model.svm import dual_value


def _blobs(rng, n=20, sep=1.0, dim=2):
    X = np.vstack([rng.standard_normal((n, dim)) - sep, rng.standard_normal((n, dim)) + sep])
    y = np.array([1.0] * n + [-1.0] * n)
    return X, y


class TestKernel:
    def test_values(self):
        assert rbf_kernel([0.0, 0.0], [3.0, 4.0], 0.01) == pytest.approx(np.exp(-0.25))
        assert rbf_kernel([1.0, 2.0], [1.0, 2.0], 5.0) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigurationError):
            rbf_kernel([1.0], [1.0, 2.0], 1.0)

    def test_gamma_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            rbf_kernel([1.0], [2.0], 0.0)


class TestSmo:
    def test_matches_libsvm(self, rng):
        X, y = _blobs(rng, n=15, sep=0.7)
        K = rbf_gram(X, X, gamma=0.5)
        res = smo_solve(K, y, C=1.0, tol=1e-8)

        ref = SVC(C=1.0, kernel="rbf", gamma=0.5, tol=1e-8).fit(X, y)
        alpha_ref = np.zeros(len(y))
        alpha_ref[ref.support_] = np.abs(ref.dual_coef_[0])
        assert dual_value(res.alpha, y, K) == pytest.approx(dual_value(alpha_ref, y, K), abs=1e-6)

        ours = K @ (res.alpha * y) + res.bias
        np.testing.assert_allclose(ours, ref.decision_function(X), atol=1e-3)

    def test_constraints_hold(self, rng):
        X, y = _blobs(rng, sep=0.3)
        res = smo_solve(rbf_gram(X, X, gamma=1.0), y, C=0.5)
        assert res.alpha.min() >= 0.0
        assert res.alpha.max() <= 0.5
        assert abs(res.alpha @ y) < 1e-9

    def test_kkt_conditions(self, rng):
        X, y = _blobs(rng, sep=0.5)
        C = 2.0
        K = rbf_gram(X, X, gamma=0.5)
        res = smo_solve(K, y, C=C, tol=1e-6)
        margin = y * (K @ (res.alpha * y) + res.bias)
        eps = 1e-3
        assert np.all(margin[res.alpha <= 1e-12] >= 1 - eps)
        free = (res.alpha > 1e-8) & (res.alpha < C - 1e-8)
        np.testing.assert_allclose(margin[free], 1.0, atol=eps)
        assert np.all(margin[res.alpha > C - 1e-8] <= 1 + eps)

    def test_objective_never_decreases(self, rng):
        X, y = _blobs(rng, sep=0.4)
        res = smo_solve(rbf_gram(X, X, gamma=1.0), y, C=1.0, trace=True)
        trace = np.array(res.objective_trace)
        assert len(trace) == res.iterations + 1
        assert np.all(np.diff(trace) >= -1e-12)

    def test_conflicting_duplicates_terminate(self):
        X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        y = np.array([1.0, -1.0, 1.0, -1.0])
        res = smo_solve(rbf_gram(X, X, gamma=1.0), y, C=1.0)
        assert res.gap < 1e-3
        assert res.alpha.max() <= 1.0
        assert abs(res.alpha @ y) < 1e-9

    def test_iteration_cap(self, rng):
        X, y = _blobs(rng, sep=0.2)
        res = smo_solve(rbf_gram(X, X, gamma=1.0), y, C=10.0, tol=1e-12, max_iter=3)
        assert res.iterations == 3


class TestTrainSvm:
    def test_separable_blobs(self, rng):
        X, y = _blobs(rng, sep=4.0)
        labels = (y > 0).astype(int)
        model = train_svm(X, labels, C=1.0, gamma=0.5)
        assert model.classes == [0, 1]
        preds = [svm_predict(model, x)[0] for x in X]
        assert preds == labels.tolist()

    def test_xor(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        labels = [0, 0, 1, 1]
        model = train_svm(X, labels, C=10.0, gamma=1.0)
        assert [svm_predict(model, x)[0] for x in X] == labels

    def test_three_classes(self, rng):
        centres = np.array([[0.0, 5.0], [5.0, 0.0], [-5.0, -5.0]])
        X = np.vstack([c + rng.standard_normal((10, 2)) * 0.5 for c in centres])
        labels = np.repeat([0, 1, 2], 10)
        model = train_svm(X, labels, C=1.0, gamma=0.1)
        scores = decision_values(model, X)
        assert scores.shape == (30, 3)
        assert (scores.argmax(axis=1) == labels).all()
        assert all(v >= 0 for v in dual_objective(model))

    def test_support_vectors_only_keep_positive_alphas(self, rng):
        X, y = _blobs(rng, sep=4.0)
        model = train_svm(X, (y > 0).astype(int), C=1.0, gamma=0.5)
        for m in model.machines:
            assert len(m.support_vectors) == len(m.dual_coef) < len(X)
            assert np.all(m.dual_coef != 0)

    def test_zero_weight_duplicate_support_vector_changes_nothing(self, rng):
        X, y = _blobs(rng, sep=1.0)
        model = train_svm(X, (y > 0).astype(int), C=1.0, gamma=0.5)
        before = decision_values(model, X)
        for m in model.machines:
            m.support_vectors = np.vstack([m.support_vectors, m.support_vectors[:1]])
            m.dual_coef = np.append(m.dual_coef, 0.0)
        np.testing.assert_allclose(decision_values(model, X), before, rtol=1e-12, atol=1e-12)

    def test_duplicating_a_non_support_point_keeps_predictions(self, rng):
        X, y = _blobs(rng, sep=4.0)
        labels = (y > 0).astype(int)
        model = train_svm(X, labels, C=1.0, gamma=0.5)
        before = decision_values(model, X)

        far = int(np.argmax(before[:, 1] * np.where(labels == 1, 1.0, -1.0)))
        retrained = train_svm(np.vstack([X, X[far]]), np.append(labels, labels[far]), C=1.0, gamma=0.5)
        after = decision_values(retrained, X)
        np.testing.assert_allclose(after, before, atol=0.05)
        assert (after.argmax(axis=1) == before.argmax(axis=1)).all()

    def test_deterministic(self, rng):
        X, y = _blobs(rng, sep=0.5)
        a = train_svm(X, (y > 0).astype(int), gamma=0.5)
        b = train_svm(X, (y > 0).astype(int), gamma=0.5)
        np.testing.assert_array_equal(a.machines[0].dual_coef, b.machines[0].dual_coef)

    def test_standardize(self, rng):
        X, y = _blobs(rng, sep=3.0)
        X = X * np.array([1000.0, 0.001])
        model = train_svm(X, (y > 0).astype(int), gamma=0.5, standardize=True)
        assert model.mean is not None
        assert np.mean([svm_predict(model, x)[0] == int(t > 0) for x, t in zip(X, y)]) > 0.9

    def test_ties_go_to_lowest_class(self):
        machine = BinaryMachine(support_vectors=np.zeros((1, 2)), dual_coef=np.array([1.0]), bias=0.0)
        model = SvmModel(machines=[machine, machine], classes=[3, 7], gamma=1.0)
        label, scores = svm_predict(model, [0.5, 0.5])
        assert scores[0] == scores[1]
        assert label == 3

    @pytest.mark.parametrize("labels, error", [
        ([0, 0, 0, 0], TrainingError),
        ([0, 1, 0], ConfigurationError),
    ])
    def test_invalid_inputs(self, labels, error):
        with pytest.raises(error):
            train_svm(np.zeros((4, 2)), labels)

    def test_non_finite_embeddings(self):
        X = np.array([[0.0, np.nan], [1.0, 1.0]])
        with pytest.raises(TrainingError):
            train_svm(X, [0, 1])

    def test_dimension_mismatch_at_prediction(self, rng):
        X, y = _blobs(rng, sep=2.0)
        model = train_svm(X, (y > 0).astype(int))
        with pytest.raises(ConfigurationError):
            svm_predict(model, [1.0, 2.0, 3.0])


class TestPersistence:
    def test_save_and_load(self, tmp_path, rng):
        X, y = _blobs(rng, sep=1.0)
        model = train_svm(X, (y > 0).astype(int) + 4, C=1.0, gamma=0.5, standardize=True)
        back = load_svm(save_svm(tmp_path / "m.msfsvm", model))
        assert back.classes == [4, 5]
        assert back.gamma == 0.5 and back.C == 1.0
        np.testing.assert_allclose(back.mean, model.mean)
        np.testing.assert_allclose(decision_values(back, X), decision_values(model, X), atol=1e-4)

"""Polynomial surrogates: basis, fitting, degree selection and persistence."""
from itertools import product
from math import comb

import numpy as np
import pytest

from config.settings import settings
from explorer.space import load_space
from oracle.dataset import feature_names, gen_dataset
from oracle.params import default_oracle_params
from shared.config_loader import NetworkLibrary
from shared.errors import InsufficientDataError, MetricError, ModelError
from shared.models import PeType, Target
from surrogate.basis import MonomialBasis, build_basis, design_matrix, n_terms
from surrogate.metrics import mape, percentage_errors, rmspe
from surrogate.model import (
    PolySurrogate,
    fit,
    identity_scaling,
    load_model,
    model_from_dict,
    model_to_dict,
    predict,
    predict_grid,
    predict_many,
    save_model,
)
from surrogate.selection import fit_with_selection, holdout_split, kfold_split, select_degree


def random_polynomial(rng, d: int, K: int):
    basis = build_basis(d, K)
    coef = rng.uniform(0.5, 2.0, size=len(basis))
    exps = np.array(basis.terms, dtype=np.float64)

    def evaluate(X):
        return (np.prod(X[:, None, :] ** exps[None, :, :], axis=2) * coef).sum(axis=1)
    return basis, evaluate


@pytest.fixture(scope="module")
def power_table():
    space = load_space().restrict(pe_types=["INT16"])
    net = NetworkLibrary().get("resnet20")
    table = gen_dataset(space, [net], default_oracle_params()).table(Target.POWER, PeType.INT16)
    values = table.to_numpy(dtype=np.float64)
    return values[:, :-1], values[:, -1]


@pytest.mark.parametrize("d,K,expected", [(4, 5, 126), (14, 5, 11_628), (14, 3, 680), (1, 0, 1)])
def test_basis_counts(d, K, expected):
    assert n_terms(d, K) == expected
    assert len(build_basis(d, K)) == expected


def test_default_latency_rows_fit_the_highest_degree():
    low, high = settings.degree_range_latency
    assert (low, high) == (1, 5)
    n_train = settings.latency_max_rows - int(round(settings.holdout_fraction * settings.latency_max_rows))
    smallest_fold = n_train - max(len(t) for t in kfold_split(n_train, settings.cv_folds, seed=0))
    assert n_terms(len(feature_names(Target.LATENCY)), high) <= smallest_fold


def test_basis_matches_enumeration():
    for d in range(1, 5):
        for K in range(0, 6):
            brute = {q for q in product(range(K + 1), repeat=d) if sum(q) <= K}
            basis = build_basis(d, K)
            assert set(basis.terms) == brute
            assert len(basis.terms) == len(brute) == comb(d + K, K)


def test_basis_graded_order():
    basis = build_basis(3, 3)
    assert basis.terms[0] == (0, 0, 0)
    degrees = [sum(q) for q in basis.terms]
    assert degrees == sorted(degrees)
    assert basis.terms[1:4] == ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def test_basis_rejects_bad_dimensions():
    with pytest.raises(ModelError):
        build_basis(0, 2)


def test_design_matrix_matches_direct_powers():
    rng = np.random.default_rng(0)
    X = rng.uniform(-2, 2, size=(30, 3))
    basis = build_basis(3, 4)
    direct = np.stack([np.prod(X ** np.array(q), axis=1) for q in basis.terms], axis=1)
    np.testing.assert_allclose(design_matrix(basis, X), direct, rtol=1e-12, atol=1e-12)


def test_exact_recovery_of_random_polynomials():
    rng = np.random.default_rng(42)
    for _ in range(100):
        d = int(rng.integers(1, 5))
        K = int(rng.integers(0, 6))
        basis, truth = random_polynomial(rng, d, K)
        X = rng.uniform(1.0, 2.0, size=(3 * len(basis) + 5, d))
        model = fit(X, truth(X), basis)
        fresh = rng.uniform(1.0, 2.0, size=(20, d))
        np.testing.assert_allclose(predict_many(model, fresh), truth(fresh), rtol=1e-6)


def test_fit_needs_enough_rows():
    with pytest.raises(InsufficientDataError):
        fit(np.ones((5, 2)), np.ones(5), build_basis(2, 2))


def test_fit_flags_rank_deficiency():
    X = np.tile([[1.0, 2.0]], (20, 1))
    model = fit(X, np.full(20, 3.0), build_basis(2, 2))
    assert model.rank_deficient
    assert predict(model, [1.0, 2.0]) == pytest.approx(3.0)


def test_predict_checks_dimension():
    model = fit(np.random.default_rng(1).uniform(size=(20, 2)), np.arange(20.0) + 1, build_basis(2, 1))
    with pytest.raises(ModelError):
        predict(model, [1.0, 2.0, 3.0])
    with pytest.raises(ModelError):
        predict_many(model, np.ones((3, 4)))


def test_single_term_model_with_unit_scaling():
    basis = MonomialBasis(d=2, K=2, terms=((1, 1),))
    model = PolySurrogate(basis=basis, coefficients=(1.0,), feature_scaling=identity_scaling(2))
    assert predict(model, [2.0, 3.0]) == 6.0


def test_scaling_does_not_change_predictions():
    rng = np.random.default_rng(8)
    basis, truth = random_polynomial(rng, 2, 2)
    X = rng.uniform(1.0, 3.0, size=(40, 2))
    raw = fit(X, truth(X), basis, scaling=identity_scaling(2))
    scaled = fit(X, truth(X), basis)
    np.testing.assert_allclose(predict_many(raw, X), predict_many(scaled, X), rtol=1e-6)

def test_predict_many_matches_single_predictions():
    rng = np.random.default_rng(5)
    basis, truth = random_polynomial(rng, 3, 3)
    X = rng.uniform(1.0, 2.0, size=(100, 3))
    model = fit(X, truth(X), basis)
    batch = predict_many(model, X[:10])
    assert [predict(model, x) for x in X[:10]] == batch.tolist()


def test_model_persistence(tmp_path):
    rng = np.random.default_rng(8)
    basis, truth = random_polynomial(rng, 2, 2)
    X = rng.uniform(1.0, 2.0, size=(30, 2))
    model = fit(X, truth(X), basis, target=Target.AREA, pe_type=PeType.LIGHTPE1,
                feature_names=("u", "v"), context={"bw": 16}, target_scale="macs")
    path = save_model(model, tmp_path / "area_LightPE1.json")
    loaded = load_model(path)
    assert loaded == model
    assert loaded.target_scale == "macs"
    assert predict_many(loaded, X).tolist() == predict_many(model, X).tolist()


def test_model_from_dict_rejects_inconsistent_counts():
    rng = np.random.default_rng(9)
    basis, truth = random_polynomial(rng, 2, 1)
    X = rng.uniform(1.0, 2.0, size=(10, 2))
    data = model_to_dict(fit(X, truth(X), basis))
    data["coefficients"] = data["coefficients"][:-1]
    with pytest.raises(ModelError):
        model_from_dict(data)
    del data["exponents"]
    with pytest.raises(ModelError):
        model_from_dict(data)


def test_metrics():
    assert mape([110.0], [100.0]) == pytest.approx(10.0)
    assert rmspe([110.0, 90.0], [100.0, 100.0]) == pytest.approx(10.0)
    assert mape([1.0, 3.0], [2.0, 2.0]) == pytest.approx(50.0)
    assert percentage_errors([2.0], [2.0]) == (0.0, 0.0)


def test_metrics_two_point_values():
    assert mape([110.0, 190.0], [100.0, 200.0]) == pytest.approx(7.5)
    assert rmspe([110.0, 190.0], [100.0, 200.0]) == pytest.approx(np.sqrt(62.5), rel=1e-9)
    assert rmspe([110.0, 190.0], [100.0, 200.0]) == pytest.approx(7.9057, rel=1e-4)


def test_rmspe_never_below_mape():
    rng = np.random.default_rng(31)
    for _ in range(50):
        n = int(rng.integers(1, 40))
        truth = rng.uniform(0.5, 10.0, size=n)
        pred = truth * rng.uniform(0.2, 1.8, size=n)
        assert rmspe(pred, truth) >= mape(pred, truth) - 1e-12


def test_select_degree_constant_target_picks_smallest():
    X = np.random.default_rng(32).uniform(1.0, 2.0, size=(60, 2))
    chosen, report = select_degree(X, np.full(60, 7.0), [2, 3, 4], folds=5, seed=0)
    assert chosen == 2
    assert report.degrees[2].cv_mape == pytest.approx(0.0, abs=1e-9)


def test_fit_constant_target_predicts_constant():
    X = np.random.default_rng(33).uniform(1.0, 2.0, size=(40, 3))
    model = fit(X, np.full(40, 7.0), build_basis(3, 2))
    Z = np.random.default_rng(34).uniform(1.0, 2.0, size=(10, 3))
    assert predict_many(model, Z) == pytest.approx(np.full(10, 7.0), rel=1e-9)


def test_fit_ignores_row_order():
    rng = np.random.default_rng(35)
    basis, truth = random_polynomial(rng, 3, 2)
    X = rng.uniform(1.0, 2.0, size=(80, 3))
    y = truth(X) * rng.uniform(0.95, 1.05, size=80)
    perm = rng.permutation(80)
    model = fit(X, y, basis)
    shuffled = fit(X[perm], y[perm], basis)
    Z = rng.uniform(1.0, 2.0, size=(25, 3))
    assert predict_many(shuffled, Z) == pytest.approx(predict_many(model, Z), rel=1e-6)


@pytest.mark.parametrize("pred,truth", [([1.0], [0.0]), ([], []), ([1.0, 2.0], [1.0])])
def test_metrics_reject_undefined_inputs(pred, truth):
    with pytest.raises(MetricError):
        mape(pred, truth)


def test_kfold_split_partitions():
    folds = kfold_split(23, 5, seed=4)
    sizes = sorted(len(f) for f in folds)
    assert sizes[-1] - sizes[0] <= 1
    merged = np.sort(np.concatenate(folds))
    assert merged.tolist() == list(range(23))
    again = kfold_split(23, 5, seed=4)
    assert all(a.tolist() == b.tolist() for a, b in zip(folds, again))


@pytest.mark.parametrize("n,k", [(10, 1), (3, 4)])
def test_kfold_split_rejects_bad_fold_counts(n, k):
    with pytest.raises(ModelError):
        kfold_split(n, k, seed=0)


def test_holdout_split():
    train, test = holdout_split(50, 0.2, seed=1)
    assert len(test) == 10 and len(train) == 40
    assert set(train).isdisjoint(test)
    train, test = holdout_split(50, 0.0, seed=1)
    assert len(test) == 0


def test_select_degree_recovers_cubic():
    rng = np.random.default_rng(21)
    _, truth = random_polynomial(rng, 3, 3)
    X = rng.uniform(1.0, 2.0, size=(400, 3))
    chosen, report = select_degree(X, truth(X), range(1, 6), folds=5, seed=0)
    assert chosen == 3
    assert sorted(report.degrees) == [1, 2, 3, 4, 5]
    assert report.degrees[1].cv_mape > report.degrees[3].cv_mape


def test_select_degree_skips_degrees_without_rows():
    rng = np.random.default_rng(22)
    _, truth = random_polynomial(rng, 2, 1)
    X = rng.uniform(1.0, 2.0, size=(20, 2))
    chosen, report = select_degree(X, truth(X), range(1, 6), folds=5, seed=0)
    assert chosen == 1
    assert 5 in report.skipped


def test_select_degree_all_skipped():
    X = np.random.default_rng(0).uniform(1.0, 2.0, size=(10, 4))
    with pytest.raises(InsufficientDataError):
        select_degree(X, X.sum(axis=1), [4, 5], folds=5, seed=0)


def test_oracle_power_selects_degree_two(power_table):
    X, y = power_table
    chosen, _ = select_degree(X, y, range(1, 6), folds=5, seed=0)
    assert chosen == 2


def test_oracle_power_fits_exactly_with_degree_two(power_table):
    X, y = power_table
    model, report = fit_with_selection(X, y, K_range=[2], degree=2, seed=0,
                                       target=Target.POWER, pe_type=PeType.INT16)
    assert report.forced and report.chosen_K == 2
    assert report.heldout_mape <= 0.1
    assert model.K == 2


def test_fit_with_selection_report_document(power_table):
    X, y = power_table
    _, report = fit_with_selection(X, y, K_range=range(1, 4), seed=3)
    doc = report.to_document()
    assert list(doc["degrees"]) == ["1", "2", "3"]
    assert set(doc["degrees"]["2"]) == {"cv_mape", "cv_rmspe"}
    assert doc["chosen_K"] == 2
    assert doc["n_train"] + doc["n_test"] == len(y)


def test_fit_with_selection_subsamples(power_table):
    X, y = power_table
    _, report = fit_with_selection(X, y, K_range=[1, 2], seed=0, max_rows=200)
    assert report.n_train + report.n_test == 200


def test_predict_grid_matches_row_predictions():
    rng = np.random.default_rng(12)
    basis, truth = random_polynomial(rng, 5, 3)
    X = rng.uniform(1.0, 2.0, size=(200, 5))
    model = fit(X, truth(X), basis)
    rows, cols = X[:, :2], rng.uniform(1.0, 2.0, size=(7, 3))
    grid = predict_grid(model, rows, cols)
    assert grid.shape == (200, 7)
    pairs = np.hstack([np.repeat(rows, 7, axis=0), np.tile(cols, (200, 1))])
    np.testing.assert_allclose(grid.ravel(), predict_many(model, pairs), rtol=1e-9)


def test_predict_grid_rows_do_not_depend_on_batch():
    rng = np.random.default_rng(13)
    basis, truth = random_polynomial(rng, 4, 2)
    X = rng.uniform(1.0, 2.0, size=(600, 4))
    model = fit(X, truth(X), basis)
    rows, cols = X[:, :1], X[:9, 1:]
    full = predict_grid(model, rows, cols)
    for start, stop in ((0, 1), (255, 259), (300, 600)):
        assert predict_grid(model, rows[start:stop], cols).tolist() == full[start:stop].tolist()


def test_predict_grid_checks_dimension():
    model = fit(np.random.default_rng(1).uniform(size=(20, 3)), np.arange(20.0) + 1, build_basis(3, 1))
    with pytest.raises(ModelError):
        predict_grid(model, np.ones((2, 2)), np.ones((2, 2)))

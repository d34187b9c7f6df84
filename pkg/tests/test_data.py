import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from logitcond.conditioning import degsep, margin
from logitcond.data import (Dataset, DiscreteDistribution, contradictory_pair, dataset_to_csv_text,
                            generate_logistic, generate_planted_margin, ill_posed_fixture, load_csv,
                            planted_direction, read_csv_text, write_csv)
from logitcond.errors import BadLabel, NonFinite, ParseError
from logitcond.norms import Norm


def test_load_two_rows(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("1,0,+1\n0,1,-1\n")
    ds = load_csv(f)
    np.testing.assert_array_equal(ds.X, [[1, 0], [0, 1]])
    np.testing.assert_array_equal(ds.y, [1, -1])


def test_zero_one_labels():
    ds = read_csv_text("1,2,0\n3,4,1\n", zero_one=True)
    np.testing.assert_array_equal(ds.y, [-1, 1])


def test_bad_label_reports_row():
    with pytest.raises(BadLabel) as e:
        read_csv_text("1,2,1\n3,4,2\n")
    assert e.value.row == 2


def test_parse_error_reports_row_and_column():
    with pytest.raises(ParseError) as e:
        read_csv_text("# comment\nx1,x2,y\n1,2,1\n3,abc,-1\n")
    assert (e.value.row, e.value.col) == (4, 2)


def test_label_column_by_name_and_index():
    text = "y,a,b\n1,0.5,2\n-1,1.5,3\n"
    a = read_csv_text(text, label_column="y")
    b = read_csv_text(text, label_column=0)
    assert a == b
    np.testing.assert_array_equal(a.X, [[0.5, 2], [1.5, 3]])


def test_dataset_validation():
    with pytest.raises(NonFinite):
        Dataset(np.array([[np.nan]]), np.array([1]))
    with pytest.raises(BadLabel):
        Dataset(np.array([[1.0]]), np.array([0]))
    with pytest.raises(ValueError):
        Dataset(np.ones((2, 2)), np.array([1]))


def test_dataset_is_immutable():
    ds = Dataset(np.ones((2, 2)), np.array([1, -1]))
    with pytest.raises(ValueError):
        ds.X[0, 0] = 5.0


@given(arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 4)),
              elements=st.floats(-1e300, 1e300, allow_nan=False, allow_infinity=False)),
       st.data())
def test_csv_round_trip(X, data):
    y = np.array(data.draw(st.lists(st.sampled_from([-1, 1]), min_size=X.shape[0], max_size=X.shape[0])))
    ds = Dataset(X, y)
    back = read_csv_text(dataset_to_csv_text(ds, comments=["seed 1"]))
    assert back == ds


def test_write_csv_file(tmp_path):
    ds = generate_logistic(7, 3, [1, 2, 3], seed=1)
    write_csv(ds, tmp_path / "a.csv")
    assert load_csv(tmp_path / "a.csv") == ds


def test_uniform_distribution_second_moment():
    ds = generate_logistic(30, 3, [0.5, 0, -1], seed=2)
    dist = DiscreteDistribution.uniform(ds)
    np.testing.assert_allclose(dist.second_moment, ds.X.T @ ds.X / ds.n, rtol=0, atol=1e-12)
    assert dist.trace_sigma <= dist.radius_R ** 2
    assert np.linalg.eigvalsh(dist.second_moment)[0] >= -1e-12


def test_weighted_distribution_sampling_law():
    ds = generate_logistic(3, 1, [0.0], seed=0)
    dist = DiscreteDistribution(ds, [0.2, 0.5, 0.3])
    idx = dist.indices_from_uniforms(np.random.default_rng(0).random(200_000))
    freq = np.bincount(idx, minlength=3) / idx.size
    np.testing.assert_allclose(freq, [0.2, 0.5, 0.3], atol=5e-3)
    with pytest.raises(ValueError):
        DiscreteDistribution(ds, [0.5, 0.5, 0.5])


def test_generate_logistic_deterministic_and_prefix_stable():
    a = generate_logistic(50, 3, [1, 0, -1], seed=9)
    b = generate_logistic(50, 3, [1, 0, -1], seed=9)
    c = generate_logistic(20, 3, [1, 0, -1], seed=9)
    assert a == b
    assert c == Dataset(a.X[:20], a.y[:20])
    assert generate_logistic(50, 3, [1, 0, -1], seed=10) != a


def test_generate_logistic_fair_coin_at_zero():
    ds = generate_logistic(100_000, 1, [0.0], seed=123)
    frac = np.mean(ds.y == 1)
    assert 0.49 <= frac <= 0.51


def test_generate_logistic_large_beta_is_nearly_noiseless():
    beta = np.array([200.0, -100.0, 50.0])
    ds = generate_logistic(5000, 3, beta, seed=4)
    assert np.mean(ds.signed_rows @ beta < 0) < 0.01


@given(st.integers(1, 40), st.integers(1, 5), st.floats(0.01, 5.0), st.integers(0, 2 ** 40))
def test_planted_margin_contract(n, p, m, seed):
    ds = generate_planted_margin(n, p, m, seed)
    b = planted_direction(p, seed)
    rho = margin(ds, b)
    assert rho >= m - 1e-12 * max(1.0, m)
    assert abs(rho - m) <= 1e-12 * max(1.0, m)


def test_planted_pair_example():
    ds = Dataset(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1, -1]))
    assert abs(degsep(ds, Norm.L2).value - 1.0) <= 1e-12


def test_planted_margin_degsep_at_least_margin():
    ds = generate_planted_margin(50, 3, 0.3, seed=7)
    assert degsep(ds, Norm.L2).value >= 0.3 - 1e-8


def test_fixtures_shape():
    assert ill_posed_fixture().X.shape == (4, 3)
    assert contradictory_pair().n == 2

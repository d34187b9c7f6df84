import math

import numpy as np
import pytest

from logitcond.data import Dataset, planted_pair
from logitcond.experiments import (brute_degnsep_p2, brute_max_margin_p2, op_norm_to_l1_p2, suite_fixture,
                                   suite_thm34)
from logitcond.norms import Norm


def test_max_margin_oracle_on_known_geometry():
    assert brute_max_margin_p2(planted_pair()) == pytest.approx(1.0, abs=1e-12)
    # two points at +-45 degrees: best direction bisects them, margin cos(45)
    ds = Dataset(np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2), np.array([1, 1]))
    assert brute_max_margin_p2(ds) == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_degnsep_sweep_on_contradictory_rows():
    ds = Dataset(np.array([[1.0, 0.0], [1.0, 0.0]]), np.array([1, -1]))
    assert brute_degnsep_p2(ds, Norm.L2, 100_000) == pytest.approx(0.0, abs=1e-5)
    ds = Dataset(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]), np.ones(4, dtype=int))
    # every unit direction misclassifies by |cos| + |sin| over 4 rows
    assert brute_degnsep_p2(ds, Norm.L2, 100_000) == pytest.approx(0.25, abs=1e-9)


@pytest.mark.parametrize("norm", list(Norm))
def test_l1_operator_norm_of_rank_one(norm):
    rng = np.random.default_rng(0)
    u, v = rng.standard_normal(7), rng.standard_normal(2)
    dual = {Norm.L2: np.linalg.norm(v), Norm.L1: np.abs(v).max(), Norm.LINF: np.abs(v).sum()}[norm]
    assert op_norm_to_l1_p2(np.outer(u, v), norm) == pytest.approx(np.abs(u).sum() * dual, rel=1e-12)


def test_l1_operator_norm_against_sign_enumeration():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((8, 2))
    signs = np.array(np.meshgrid(*[[-1, 1]] * 8)).reshape(8, -1).T
    want = np.max(np.linalg.norm(signs @ M, axis=1))
    assert op_norm_to_l1_p2(M, Norm.L2) == pytest.approx(want, rel=1e-12)


def test_small_suites_are_deterministic(tmp_path):
    a = suite_thm34(seed=5, count=2, k=500, out_dir=str(tmp_path))
    b = suite_thm34(seed=5, count=2, k=500)
    assert a.passed and a.digests == b.digests
    assert (tmp_path / a.name / "000_l2.csv").read_text().startswith("# logitcond")
    assert suite_fixture().passed

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from probmives.ahp import (
    AHPError,
    consistency_ratio,
    group_weights,
    lambda_max,
    load_weight_table,
    pairwise_from_ratings,
    principal_weights,
    read_ratings,
)
from probmives.hierarchy import load_tree
from probmives.resources import data_path

ratings = st.lists(st.integers(min_value=0, max_value=10), min_size=2, max_size=9)


@pytest.fixture(scope="module")
def sus():
    return load_tree(data_path("sustainability"))


def ratings_csv(rows, criteria):
    lines = ["respondent,group," + ",".join(criteria)]
    lines += [f"{rid},{grp}," + ",".join(str(v) for v in vals) for rid, grp, vals in rows]
    return read_ratings(io.StringIO("\n".join(lines) + "\n"))


def test_pairwise_examples():
    assert pairwise_from_ratings([8, 4]).tolist() == [[1, 2], [0.5, 1]]
    assert np.array_equal(pairwise_from_ratings([5, 5, 5]), np.ones((3, 3)))
    a = pairwise_from_ratings([6, 3, 2])
    assert a[0, 2] == 3.0 and a[1, 2] == 1.5


def test_zero_rating_floored():
    a = pairwise_from_ratings([0, 1])
    assert a[0, 1] == 0.5


def test_principal_weights_examples():
    assert np.allclose(principal_weights([[1, 2], [0.5, 1]]), [2 / 3, 1 / 3], atol=1e-12)
    assert np.allclose(principal_weights(np.ones((4, 4))), [0.25] * 4)
    assert np.allclose(principal_weights(pairwise_from_ratings([6, 3, 2])), np.array([6, 3, 2]) / 11, atol=1e-12)


def test_consistency_ratio_examples():
    assert consistency_ratio([[1, 2], [0.5, 1]]) == 0.0
    # oracle: numpy.linalg.eigvals gives lambda_max 3.053621575878972
    a = [[1, 2, 4], [0.5, 1, 1], [0.25, 1, 1]]
    assert lambda_max(a) == pytest.approx(3.053621575878972, abs=1e-9)
    assert consistency_ratio(a) == pytest.approx(0.046225496447389, abs=1e-9)


def test_bad_matrices():
    with pytest.raises(AHPError):
        principal_weights([[1, 2, 3]])
    with pytest.raises(AHPError):
        principal_weights([[1, -1], [1, 1]])
    with pytest.raises(AHPError):
        consistency_ratio(np.ones((11, 11)))


@settings(max_examples=200, deadline=None)
@given(ratings)
def test_ratio_matrix_is_consistent(r):
    a = pairwise_from_ratings(r)
    floored = np.where(np.array(r) == 0, 0.5, r)
    assert consistency_ratio(a) <= 1e-8
    assert np.allclose(principal_weights(a), floored / floored.sum(), atol=1e-8)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(min_value=1, max_value=10), min_size=2, max_size=9), st.integers(min_value=2, max_value=9))
def test_scale_invariance_exact(r, c):
    base = principal_weights(pairwise_from_ratings(r))
    scaled = principal_weights(pairwise_from_ratings([c * x for x in r]))
    assert np.array_equal(base, scaled)


def test_group_weights_uniform(sus):
    crit = [c.id for c in sus.criteria]
    table = ratings_csv([("r1", "Architect", [7] * 12), ("r2", "Client", [7] * 12)], crit)
    gw = group_weights(table, sus)
    assert np.allclose(list(gw["B1"].weights.values()), [1 / 3] * 3)


def test_group_weights_single_respondent(sus):
    crit = [c.id for c in sus.criteria]
    vals = [8, 4, 4] + [5] * 9
    gw = group_weights(ratings_csv([("r1", "Engineer", vals)], crit), sus, "Engineer")
    assert np.allclose(list(gw["B1"].weights.values()), [0.5, 0.25, 0.25], atol=1e-12)
    assert gw["B1"].consistency_ratio <= 1e-8


def test_group_filter_and_means(sus):
    crit = [c.id for c in sus.criteria]
    table = ratings_csv(
        [("r1", "Architect", [10, 5, 5] + [5] * 9), ("r2", "Client", [2, 4, 4] + [5] * 9)], crit
    )
    general = group_weights(table, sus)["B1"].weights
    # pooled means (6, 4.5, 4.5)
    assert np.allclose(list(general.values()), np.array([6, 4.5, 4.5]) / 15)
    with pytest.raises(AHPError, match="available"):
        group_weights(table, sus, "Nobody")


def test_read_ratings_errors():
    with pytest.raises(AHPError, match="outside"):
        read_ratings(io.StringIO("respondent,group,C1\nr1,A,11\n"))
    with pytest.raises(AHPError, match="header"):
        read_ratings(io.StringIO("a,b,C1\n"))
    with pytest.raises(AHPError, match="integer"):
        read_ratings(io.StringIO("respondent,group,C1\nr1,A,x\n"))
    with pytest.raises(AHPError, match="empty"):
        read_ratings(io.StringIO(""))


def test_bypass_general_economics(sus):
    table = load_weight_table(data_path("ahp_sustainability"))
    econ = table.grouped(sus, "General")["B1"].weights
    assert list(econ.values()) == pytest.approx([0.34740, 0.33660, 0.31600])


def test_bypass_tables_cover_all_profiles():
    for name in ("ahp_sustainability", "ahp_circularity"):
        table = load_weight_table(data_path(name))
        assert len(table.profiles) == 7
        for prof in table.profiles.values():
            assert len(prof) == 12
            assert math.isclose(sum(prof.values()), 4.0, abs_tol=0.4)

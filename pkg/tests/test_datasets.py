import numpy as np
import pytest

from driftscope.datasets import ADULT_COLUMNS, census_sample, load_adult, resolve_tabular


def test_census_sample_shape_and_columns():
    rows = census_sample(n=500, seed=1)
    assert len(rows) == 500
    assert set(rows[0]) == set(ADULT_COLUMNS) | {"y"}
    assert all(r["y"] in (0, 1) for r in rows)


def test_census_sample_deterministic():
    a = census_sample(n=300, seed=7)
    b = census_sample(n=300, seed=7)
    assert a == b
    c = census_sample(n=300, seed=8)
    assert a != c


def test_census_sample_label_rate_realistic():
    rows = census_sample(n=20000, seed=0)
    rate = np.mean([r["y"] for r in rows])
    assert 0.10 < rate < 0.35


def test_census_sample_is_learnable():
    from driftscope.evaluation import ColumnData
    from driftscope.streams import fit_tree

    rows = census_sample(n=8000, seed=3)
    cols = ColumnData(rows)
    X = cols.feature_matrix()
    model = fit_tree(X[:4000], cols.y[:4000], max_depth=8)
    acc = (model.predict(X[4000:]) == cols.y[4000:]).mean()
    base = max(cols.y[4000:].mean(), 1 - cols.y[4000:].mean())
    assert acc > base + 0.03  # clearly better than majority class


def test_load_adult_headerless_format(tmp_path):
    lines = [
        "39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical,"
        " Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K",
        "50, Self-emp-not-inc, 83311, Bachelors, 13, Married-civ-spouse,"
        " Exec-managerial, Husband, White, Male, 0, 0, 13, United-States, >50K.",
    ]
    p = tmp_path / "adult.data"
    p.write_text("\n".join(lines) + "\n")
    rows = load_adult(p)
    assert len(rows) == 2
    assert rows[0]["age"] == "39"
    assert rows[0]["workclass"] == "State-gov"
    assert rows[0]["y"] == 0
    assert rows[1]["y"] == 1


def test_load_adult_headered_format(tmp_path):
    p = tmp_path / "adult.csv"
    p.write_text(
        "age,workclass,income\n40,Private,>50K\n30,?, <=50K\n"
    )
    rows = load_adult(p)
    assert rows[0] == {"age": "40", "workclass": "Private", "y": 1}
    assert rows[1]["y"] == 0


def test_resolve_tabular_fallback_and_env(tmp_path, monkeypatch):
    monkeypatch.delenv("DRIFTSCOPE_ADULT", raising=False)
    rows, name = resolve_tabular(None, n=100, seed=0)
    assert name == "census-surrogate"
    assert len(rows) == 100

    p = tmp_path / "adult.csv"
    p.write_text("age,workclass,income\n40,Private,>50K\n")
    monkeypatch.setenv("DRIFTSCOPE_ADULT", str(p))
    rows, name = resolve_tabular(None)
    assert name.startswith("adult:")
    assert len(rows) == 1

    rows, name = resolve_tabular("surrogate", n=50, seed=0)
    assert name == "census-surrogate"


def test_load_adult_bad_label(tmp_path):
    p = tmp_path / "adult.csv"
    p.write_text("age,income\n40,maybe\n")
    with pytest.raises(ValueError, match="income label"):
        load_adult(p)

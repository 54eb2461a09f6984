import numpy as np
import pytest

from prototree import Dataset, read_csv, write_csv


def test_validation():
    with pytest.raises(ValueError, match="non-empty"):
        Dataset(X=np.zeros((0, 2)), y=np.zeros(0))
    with pytest.raises(ValueError, match="one target per row"):
        Dataset(X=np.zeros((3, 2)), y=np.zeros(4))
    with pytest.raises(ValueError, match="2-d"):
        Dataset(X=np.zeros(3), y=np.zeros(3))


def test_arrays_are_frozen():
    ds = Dataset(X=np.ones((2, 1)), y=np.zeros(2))
    with pytest.raises(ValueError):
        ds.X[0, 0] = 5.0


def test_csv_round_trip_is_bit_exact(tmp_path):
    X = np.array([[0.1, -0.0], [1e-300, 3.0311], [7.25, -1e308]])
    y = np.array([0.0311, 2.0, -5e-17])
    ds = Dataset(X=X, y=y)
    path = tmp_path / "data.csv"
    write_csv(ds, path, ["a", "b"])
    back, names = read_csv(path)
    assert names == ["a", "b"]
    assert back.X.tobytes() == ds.X.tobytes()
    assert back.y.tobytes() == ds.y.tobytes()


def test_csv_header_names_default(tmp_path):
    ds = Dataset(X=np.ones((1, 2)), y=np.zeros(1))
    path = tmp_path / "d.csv"
    write_csv(ds, path)
    text = path.read_text().splitlines()
    assert text[0] == "x0,x1,target"


def test_csv_read_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("")
    with pytest.raises(ValueError, match="empty"):
        read_csv(p)
    p.write_text("onlytarget\n")
    with pytest.raises(ValueError, match="at least one variable"):
        read_csv(p)
    p.write_text("x,target\n")
    with pytest.raises(ValueError, match="no data rows"):
        read_csv(p)


def test_csv_name_count_mismatch(tmp_path):
    ds = Dataset(X=np.ones((1, 2)), y=np.zeros(1))
    with pytest.raises(ValueError, match="column name"):
        write_csv(ds, tmp_path / "x.csv", ["only_one"])

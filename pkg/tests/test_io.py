import numpy as np
import pytest

from fringelab import io


@pytest.mark.parametrize("text, ps", [("59", 59.0), ("59ps", 59.0), ("0.059ns", 59.0), (" 8.86 ps ", 8.86)])
def test_parse_time(text, ps):
    assert io.parse_time_ps(text) == pytest.approx(ps)


def test_parse_time_rejects_units():
    with pytest.raises(ValueError):
        io.parse_time_ps("3 fortnights")


def test_parse_grid():
    np.testing.assert_allclose(io.parse_grid("0:1:5"), np.linspace(0, 1, 5))
    np.testing.assert_allclose(io.parse_grid("0.1, 0.2,0.5"), [0.1, 0.2, 0.5])
    np.testing.assert_allclose(io.parse_grid("0ps:1ns:3", io.parse_time_ps), [0, 500, 1000])


def test_read_config(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# comment\nphi-min = 0.5\n\nscheme = 3,1+1,3  \n")
    assert io.read_config(path) == {"phi_min": "0.5", "scheme": "3,1+1,3"}
    path.write_text("no equals sign\n")
    with pytest.raises(ValueError):
        io.read_config(path)


def test_csv_round_trip(tmp_path):
    x = np.array([0.1, 1 / 3, 2e-17])
    path = io.write_csv(tmp_path / "t.csv", ["x", "label"], [x, ["a", "b", "c"]], {"k": 1})
    cols, meta = io.read_csv(path)
    np.testing.assert_array_equal(cols["x"], x)
    assert list(cols["label"]) == ["a", "b", "c"]
    assert meta["parameters"] == {"k": 1} and meta["tool"] == "fringelab"

from __future__ import annotations

import numpy as np
import pytest

from qpenta.cocycles import make_cocycle
from qpenta.export import export_heatmap, export_object, export_operator, read_heatmap, read_operator


def test_matrix_unit_heatmap(tmp_path):
    unit = np.zeros((4, 4))
    unit[1, 3] = 1.0
    path = tmp_path / "h.csv"
    export_heatmap(unit, path)
    grid, footer = read_heatmap(path)
    assert np.array_equal(grid, unit)
    assert list(footer) == [0.0, 1.0, 0.0, 0.0]


def test_omega_heatmap_is_a_zero_one_grid(tmp_path, f5):
    path = tmp_path / "omega.csv"
    export_object(f5, make_cocycle("coboundary:u=dlogsq", f5), "heatmap:omega", path)
    grid, footer = read_heatmap(path)
    assert grid.shape == (400, 400)
    assert np.all((np.abs(grid) <= 1e-12) | (np.abs(grid - 1) <= 1e-12))
    assert np.abs(footer - 1.0).max() <= 1e-12


def test_unitary_footer_recomputes_from_dump(tmp_path, engine5):
    path = tmp_path / "f.csv"
    export_operator(engine5.fourier, path)
    m = read_operator(path, (20, 20))
    assert np.abs(m - engine5.fourier.matrix).max() == 0.0
    hpath = tmp_path / "fh.csv"
    export_heatmap(engine5.omega_cocycle, hpath)
    grid, footer = read_heatmap(hpath)
    assert np.allclose((grid ** 2).sum(axis=1), footer)


def test_kernel_export(tmp_path, f5):
    path = tmp_path / "k.csv"
    export_object(f5, make_cocycle("trivial", f5), "kernel:q=2,xi=4", path)
    grid, _ = read_heatmap(path)
    assert np.argmax(grid) == 1 * 4 + 3 and grid.max() == pytest.approx(1.0)


def test_tables(tmp_path, f5x):
    om = make_cocycle("coboundary:u=dlogsq", f5x)
    assert "172" in export_object(f5x, om, "theta-table", tmp_path / "t.csv")
    export_object(f5x, om, "cocycle-table", tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().startswith("q1,q2,exponent,order")


def test_unknown_objects(tmp_path, f5):
    with pytest.raises(ValueError):
        export_object(f5, make_cocycle("trivial", f5), "heatmap:nope", tmp_path / "x.csv")
    with pytest.raises(ValueError):
        export_object(f5, make_cocycle("trivial", f5), "picture", tmp_path / "x.csv")

import math

import numpy as np
import pytest

import vkfem


def test_presets_listed():
    assert vkfem.preset_names() == ["example1", "example2", "example3", "lshape"]


def test_expression():
    chi = vkfem.Expression("1 - 5*(x^2+y^2) + (x^2+y^2)^2")
    assert chi(0.0, 0.0) == 1.0
    assert vkfem.Expression("(x+3)^2*(x-3)^2*(y+3)^2*(y-3)^2")(0, 0) == 6561.0
    with pytest.raises(vkfem.ParseError, match="position 3"):
        vkfem.Expression("x +")


def test_mesh_refinement():
    m = vkfem.make_square()
    assert m.vertices.shape == (5, 2)
    fine = vkfem.red_refine(m)
    assert fine.triangles.shape == (16, 3)
    assert fine.level == 1
    stats = vkfem.mesh_statistics(vkfem.make_lshape())
    assert math.isclose(stats["total_area"], 0.75)


def test_solve_example1_is_feasible():
    r = vkfem.solve("example1", level=3)
    assert r.status == "converged"
    assert r.outer_iterations <= 4
    assert r.max_newton_iterations <= 5
    xy = r.vertices
    chi = 1 - 5 * (xy[:, 0] ** 2 + xy[:, 1] ** 2) + (xy[:, 0] ** 2 + xy[:, 1] ** 2) ** 2
    interior = np.ones(len(xy), dtype=bool)
    interior[np.isclose(np.abs(xy), 0.5).any(axis=1)] = False
    assert np.all(r.u_vertex[interior] - chi[interior] >= -1e-10)
    assert len(r.active_set) > 0
    assert "# status converged" in r.log


def test_custom_problem_deep_obstacle():
    r = vkfem.solve(chi="-1e6", level=2)
    assert r.status == "converged"
    assert np.all(r.u == 0.0)


def test_eoc_and_smallness():
    rates = vkfem.eoc([16.496069, 12.963642, 8.621491, 4.927900, 2.541191, 1.157459])
    assert abs(rates[0] - 0.7666) < 1e-4
    s = vkfem.check_smallness("example3", grid=201)
    assert s["violated"]
    assert s["bound"] >= 20.79


def test_small_study():
    report = vkfem.refinement_study("example1", levels=3, threads=1)
    assert report["complete"]
    assert report["csv"].splitlines()[0].startswith("level,h,einf_u")
    assert len(report["levels"]) == 3
    assert report["levels"][0]["eoc_u"] is not None

import math

import pytest

from coarsedim.errors import InputError
from coarsedim.group_spaces.bounds import NormalSeries, asdim_upper_bound, hirsch_length
from coarsedim.group_spaces.hyperbolic import (
    BallSpacePoint,
    geometric_radii,
    height_projection,
    hyperbolization,
)
from coarsedim.metric_core import (
    measured_lipschitz,
    path_space,
    verify_metric_axioms,
)


class TestHirsch:
    def test_three_z(self):
        assert hirsch_length(NormalSeries.of(["Z", "Z", "Z"])) == 3

    def test_all_finite(self):
        assert hirsch_length(NormalSeries.of(["finite:2", "finite:3"])) == 0

    def test_mixed(self):
        assert hirsch_length(NormalSeries.of(["Z", "finite:2", "Z"])) == 2

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            NormalSeries.of([])


class TestBoundCalculator:
    def test_polycyclic_h3(self):
        rep = asdim_upper_bound({"rule": "polycyclic", "series": ["Z", "Z", "Z"]})
        assert rep["bound"] == 3
        assert any("Hirsch" in line for line in rep["derivation"])

    def test_free_product_of_ones(self):
        rep = asdim_upper_bound({"rule": "free_product", "left": 1, "right": 1})
        assert rep["bound"] == 1

    def test_free_product_zero_case_labeled(self):
        rep = asdim_upper_bound({"rule": "free_product", "left": 0, "right": 0})
        assert rep["bound"] == 1
        assert any("upper bound" in line for line in rep["derivation"])

    def test_amalgam(self):
        rep = asdim_upper_bound(
            {"rule": "amalgam", "c": 1, "a_quotient": 1, "b_quotient": 1}
        )
        assert rep["bound"] == 2

    def test_extension_nested(self):
        rep = asdim_upper_bound(
            {
                "rule": "extension",
                "quotient": {"rule": "polycyclic", "series": ["Z", "Z"]},
                "kernel": "Z",
            }
        )
        assert rep["bound"] == 3

    def test_leaves(self):
        assert asdim_upper_bound("Z")["bound"] == 1
        assert asdim_upper_bound("finite:5")["bound"] == 0
        assert asdim_upper_bound(2)["bound"] == 2

    def test_series_object_accepted(self):
        assert asdim_upper_bound(NormalSeries.of(["Z", "finite:2"]))["bound"] == 1


class TestHyperbolization:
    def test_same_point_zero(self):
        h = hyperbolization(path_space(3), [1.0, math.e])
        i = h.index[BallSpacePoint(0, 1.0)]
        assert h.space.dist(i, i) == 0.0

    def test_same_center_radius_ratio(self):
        h = hyperbolization(path_space(2), [1.0, math.e**2])
        i = h.index[BallSpacePoint(0, 1.0)]
        j = h.index[BallSpacePoint(0, math.e**2)]
        assert h.space.dist(i, j) == pytest.approx(2.0)

    def test_unit_separation(self):
        h = hyperbolization(path_space(2), [1.0])
        i = h.index[BallSpacePoint(0, 1.0)]
        j = h.index[BallSpacePoint(1, 1.0)]
        assert h.space.dist(i, j) == pytest.approx(2.0 * math.log(2.0))

    def test_metric_axioms_exhaustive(self):
        h = hyperbolization(path_space(10), geometric_radii(levels=5))
        report = verify_metric_axioms(h.space, triple_mode="exhaustive")
        assert report["ok"]

    def test_nonpositive_radius_rejected(self):
        with pytest.raises(InputError):
            hyperbolization(path_space(2), [0.0, 1.0])


class TestHeightProjection:
    def test_values(self):
        h = hyperbolization(path_space(3), [1.0, math.e])
        proj = height_projection(h)
        assert proj.images[h.index[BallSpacePoint(0, 1.0)]] == 0.0
        assert proj.images[h.index[BallSpacePoint(0, math.e)]] == pytest.approx(1.0)

    def test_one_lipschitz_exhaustive(self):
        h = hyperbolization(path_space(10), geometric_radii(levels=5))
        proj = height_projection(h)
        assert measured_lipschitz(proj) <= 1.0 + 1e-12
